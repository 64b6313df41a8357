#include "ipqp/qps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ipqp
{

QpsParseError::QpsParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), m_line(line)
{
}

const std::string& QpsFile::objective_row() const
{
    for (const QpsRow& r : rows) {
        if (r.sense == RowSense::objective) return r.name;
    }
    throw std::invalid_argument("QPS file has no objective row");
}

namespace
{

enum class Section
{
    none,
    name,
    objsense,
    rows,
    columns,
    rhs,
    ranges,
    bounds,
    quadobj,
    qmatrix,
    endata,
};

std::vector<std::string_view> tokenize(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) j++;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Fixed-format fields: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61 (1-based).
std::vector<std::string_view> fixed_fields(std::string_view line)
{
    static constexpr std::pair<std::size_t, std::size_t> spans[] = {
        {1, 2}, {4, 8}, {14, 8}, {24, 12}, {39, 8}, {49, 12}};
    std::vector<std::string_view> out;
    for (const auto& [start, len] : spans) {
        if (start >= line.size()) {
            out.emplace_back();
            continue;
        }
        out.push_back(trim(line.substr(start, len)));
    }
    return out;
}

// drops the leading type field and trailing empty fields
std::vector<std::string_view> fixed_data_fields(std::string_view line, bool keep_type)
{
    std::vector<std::string_view> f = fixed_fields(line);
    std::vector<std::string_view> out;
    for (std::size_t k = keep_type ? 0 : 1; k < f.size(); k++) out.push_back(f[k]);
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

std::optional<double> to_number(std::string_view s)
{
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        // spelled-out infinities show up in some generators
        std::string lower(s);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (lower == "inf" || lower == "infinity" || lower == "1e+30" || lower == "1e30") return infinity;
        if (lower == "-inf" || lower == "-infinity") return -infinity;
        return std::nullopt;
    }
    if (value >= 1e30) return infinity;
    if (value <= -1e30) return -infinity;
    return value;
}

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return out;
}

std::optional<BoundType> bound_type(std::string_view s)
{
    const std::string t = upper(s);
    if (t == "UP") return BoundType::up;
    if (t == "LO") return BoundType::lo;
    if (t == "FX") return BoundType::fx;
    if (t == "FR") return BoundType::fr;
    if (t == "MI") return BoundType::mi;
    if (t == "PL") return BoundType::pl;
    return std::nullopt;
}

bool bound_has_value(BoundType t)
{
    return t == BoundType::up || t == BoundType::lo || t == BoundType::fx;
}

const char* bound_name(BoundType t)
{
    switch (t) {
    case BoundType::up: return "UP";
    case BoundType::lo: return "LO";
    case BoundType::fx: return "FX";
    case BoundType::fr: return "FR";
    case BoundType::mi: return "MI";
    case BoundType::pl: return "PL";
    }
    return "??";
}

class Parser
{
public:
    QpsFile run(std::string_view text)
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(pos, end - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            m_line++;
            handle_line(line);
            if (m_section == Section::endata) break;
            if (end == text.size()) break;
            pos = end + 1;
        }
        if (m_section != Section::endata) {
            throw QpsParseError(m_line, "missing ENDATA");
        }
        if (m_objective.empty()) {
            throw QpsParseError(m_line, "missing objective row");
        }
        finalize_quadratic();
        return std::move(m_file);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw QpsParseError(m_line, msg); }

    double number(std::string_view s) const
    {
        const auto v = to_number(s);
        if (!v) fail("non-numeric field '" + std::string(s) + "'");
        return *v;
    }

    void handle_line(std::string_view line)
    {
        if (trim(line).empty() || line.front() == '*') return;

        if (!std::isspace(static_cast<unsigned char>(line.front()))) {
            header(line);
            return;
        }
        switch (m_section) {
        case Section::none:
        case Section::name: fail("data line outside of a section");
        case Section::objsense: objsense(trim(line)); break;
        case Section::rows: row(line); break;
        case Section::columns: column(line); break;
        case Section::rhs: row_values(line, m_file.rhs, m_rhs_index, false); break;
        case Section::ranges: row_values(line, m_file.ranges, m_range_index, true); break;
        case Section::bounds: bound(line); break;
        case Section::quadobj:
        case Section::qmatrix: quad(line); break;
        case Section::endata: break;
        }
    }

    void header(std::string_view line)
    {
        const auto tokens = tokenize(line);
        const std::string key = upper(tokens.front());
        if (key == "NAME") {
            m_section = Section::name;
            m_file.name = tokens.size() > 1 ? std::string(trim(line.substr(line.find(tokens[1])))) : std::string();
        } else if (key == "OBJSENSE") {
            m_section = Section::objsense;
            if (tokens.size() > 1) objsense(tokens[1]);
        } else if (key == "ROWS") {
            m_section = Section::rows;
        } else if (key == "COLUMNS") {
            m_section = Section::columns;
        } else if (key == "RHS") {
            m_section = Section::rhs;
        } else if (key == "RANGES") {
            m_section = Section::ranges;
        } else if (key == "BOUNDS") {
            m_section = Section::bounds;
        } else if (key == "QUADOBJ" || key == "QSECTION") {
            m_section = Section::quadobj;
        } else if (key == "QMATRIX") {
            m_section = Section::qmatrix;
        } else if (key == "ENDATA") {
            m_section = Section::endata;
        } else {
            fail("unknown section '" + std::string(tokens.front()) + "'");
        }
    }

    void objsense(std::string_view token)
    {
        const std::string t = upper(token);
        if (t != "MIN" && t != "MINIMIZE") fail("only minimization is supported");
    }

    void row(std::string_view line)
    {
        auto tokens = tokenize(line);
        if (tokens.size() != 2) tokens = fixed_data_fields(line, true);
        if (tokens.size() != 2) fail("malformed ROWS record");
        const std::string type = upper(tokens[0]);
        std::string name(tokens[1]);
        if (m_row_index.count(name) || m_free_rows.count(name)) fail("duplicate row '" + name + "'");
        RowSense sense;
        if (type == "N") {
            if (!m_objective.empty()) {
                m_free_rows.insert(std::move(name));
                return;
            }
            m_objective = name;
            sense = RowSense::objective;
        } else if (type == "E") {
            sense = RowSense::equal;
        } else if (type == "L") {
            sense = RowSense::less;
        } else if (type == "G") {
            sense = RowSense::greater;
        } else {
            fail("unknown row type '" + std::string(tokens[0]) + "'");
        }
        m_row_index.emplace(name, m_file.rows.size());
        m_file.rows.push_back({std::move(name), sense});
    }

    // true if the row is a dropped free row
    bool check_row(std::string_view name) const
    {
        const std::string key(name);
        if (m_row_index.count(key)) return false;
        if (m_free_rows.count(key)) return true;
        fail("undeclared row '" + key + "'");
    }

    bool known_row(std::string_view name) const
    {
        const std::string key(name);
        return m_row_index.count(key) || m_free_rows.count(key);
    }

    // (row, value) pairs from `first` on name declared rows and hold numbers
    bool plausible_pairs(const std::vector<std::string_view>& tokens, std::size_t first) const
    {
        if (tokens.size() <= first || (tokens.size() - first) % 2 != 0) return false;
        for (std::size_t k = first; k + 1 < tokens.size(); k += 2) {
            if (!known_row(tokens[k]) || !to_number(tokens[k + 1])) return false;
        }
        return true;
    }

    // free-form reading unless it does not make sense and the fixed columns do
    // (names with blanks only exist in fixed layout)
    // returns true when `tokens` was replaced by the fixed fields (set name first)
    bool pick_layout(std::string_view line, std::vector<std::string_view>& tokens, std::size_t free_first) const
    {
        if (plausible_pairs(tokens, free_first)) return false;
        auto fixed = fixed_data_fields(line, false);
        if (!plausible_pairs(fixed, 1)) return false;
        tokens = std::move(fixed);
        return true;
    }

    void check_column(std::string_view name) const
    {
        if (!m_col_index.count(std::string(name))) fail("undeclared column '" + std::string(name) + "'");
    }

    void column(std::string_view line)
    {
        auto tokens = tokenize(line);
        if (tokens.size() == 3 && upper(tokens[1]) == "'MARKER'") return;
        pick_layout(line, tokens, 1);
        if (tokens.size() != 3 && tokens.size() != 5) fail("malformed COLUMNS record");

        const std::string col(tokens[0]);
        if (!m_col_index.count(col)) {
            m_col_index.emplace(col, m_file.columns.size());
            m_file.columns.push_back(col);
        }
        for (std::size_t k = 1; k + 1 < tokens.size(); k += 2) {
            const double value = number(tokens[k + 1]);
            if (check_row(tokens[k])) continue;
            const std::string r(tokens[k]);
            const auto key = std::make_pair(col, r);
            const auto it = m_entry_index.find(key);
            if (it != m_entry_index.end()) {
                m_file.entries[it->second].value += value;
            } else {
                m_entry_index.emplace(key, m_file.entries.size());
                m_file.entries.push_back({col, r, value});
            }
        }
    }

    void row_values(std::string_view line, std::vector<QpsRowValue>& out,
                    std::unordered_map<std::string, std::size_t>& index, bool is_range)
    {
        auto tokens = tokenize(line);
        // an odd count carries the leading set name
        std::size_t first = tokens.size() % 2 == 1 ? 1 : 0;
        if (pick_layout(line, tokens, first)) first = 1;
        if (tokens.size() < first + 2 || tokens.size() > first + 4) fail("malformed RHS/RANGES record");
        for (std::size_t k = first; k + 1 < tokens.size(); k += 2) {
            const double value = number(tokens[k + 1]);
            if (check_row(tokens[k])) continue;
            const std::string r(tokens[k]);
            if (is_range && r == m_objective) fail("range on the objective row");
            const auto it = index.find(r);
            if (it != index.end()) {
                out[it->second].value += value;
            } else {
                index.emplace(r, out.size());
                out.push_back({r, value});
            }
        }
    }

    void bound(std::string_view line)
    {
        auto tokens = tokenize(line);
        if (tokens.empty()) fail("malformed BOUNDS record");
        const auto type = bound_type(tokens[0]);
        if (!type) fail("unsupported bound type '" + std::string(tokens[0]) + "'");
        const std::size_t with_set = bound_has_value(*type) ? 4 : 3;
        if (tokens.size() != with_set && tokens.size() != with_set - 1) {
            tokens = fixed_data_fields(line, true);
            if (tokens.size() < with_set - 1) fail("malformed BOUNDS record");
            tokens.resize(with_set);
        }
        const std::size_t col_at = tokens.size() == with_set ? 2 : 1;
        check_column(tokens[col_at]);
        QpsBound b{*type, std::string(tokens[col_at]), 0.0};
        if (bound_has_value(*type)) b.value = number(tokens[col_at + 1]);
        m_file.bounds.push_back(std::move(b));
    }

    void quad(std::string_view line)
    {
        auto tokens = tokenize(line);
        if (tokens.size() != 3) tokens = fixed_data_fields(line, false);
        if (tokens.size() != 3) fail("malformed quadratic record");
        check_column(tokens[0]);
        check_column(tokens[1]);
        const double value = number(tokens[2]);
        std::size_t i = m_col_index.at(std::string(tokens[0]));
        std::size_t j = m_col_index.at(std::string(tokens[1]));
        const bool mirrored = i < j;
        if (mirrored) std::swap(i, j);
        const auto key = std::make_pair(i, j);
        auto& slot = m_quad[key];
        if (m_section == Section::quadobj) {
            slot.lower += value;
            slot.has_lower = true;
        } else if (mirrored) {
            slot.upper += value;
            slot.has_upper = true;
        } else {
            slot.lower += value;
            slot.has_lower = true;
        }
    }

    void finalize_quadratic()
    {
        for (const auto& [key, slot] : m_quad) {
            double v = 0.0;
            if (key.first == key.second || !slot.has_upper) {
                v = slot.lower;
            } else if (!slot.has_lower) {
                v = slot.upper;
            } else {
                v = 0.5 * (slot.lower + slot.upper); // both triangles of QMATRIX
            }
            m_file.quadobj.push_back({m_file.columns[key.first], m_file.columns[key.second], v});
        }
    }

    struct QuadSlot
    {
        double lower = 0.0;
        double upper = 0.0;
        bool has_lower = false;
        bool has_upper = false;
    };

    QpsFile m_file;
    Section m_section = Section::none;
    std::size_t m_line = 0;
    std::string m_objective;
    std::unordered_map<std::string, std::size_t> m_row_index;
    std::unordered_set<std::string> m_free_rows;
    std::unordered_map<std::string, std::size_t> m_col_index;
    std::map<std::pair<std::string, std::string>, std::size_t> m_entry_index;
    std::unordered_map<std::string, std::size_t> m_rhs_index;
    std::unordered_map<std::string, std::size_t> m_range_index;
    // keyed by (row, column) declaration indices with row ≥ column; ordered for determinism
    std::map<std::pair<std::size_t, std::size_t>, QuadSlot> m_quad;
};

std::string format_number(double v)
{
    if (v == infinity) return "1e+30";
    if (v == -infinity) return "-1e+30";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

QpsFile parse_qps(std::string_view text)
{
    return Parser().run(text);
}

QpsFile read_qps_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_qps(buf.str());
}

std::string write_qps(const QpsFile& file)
{
    std::string out;
    auto line = [&](std::initializer_list<std::string_view> fields) {
        out += ' ';
        for (std::string_view f : fields) {
            out += ' ';
            out += f;
        }
        out += '\n';
    };

    out += "NAME";
    if (!file.name.empty()) out += "          " + file.name;
    out += "\nROWS\n";
    for (const QpsRow& r : file.rows) {
        const char* type = r.sense == RowSense::objective ? "N"
                           : r.sense == RowSense::equal   ? "E"
                           : r.sense == RowSense::less    ? "L"
                                                          : "G";
        line({type, r.name});
    }
    out += "COLUMNS\n";
    for (const QpsEntry& e : file.entries) {
        line({e.column, e.row, format_number(e.value)});
    }
    // columns without a single entry still need declaring
    {
        std::unordered_set<std::string> seen;
        for (const QpsEntry& e : file.entries) seen.insert(e.column);
        for (const std::string& c : file.columns) {
            if (!seen.count(c)) line({c, file.objective_row(), "0"});
        }
    }
    out += "RHS\n";
    for (const QpsRowValue& v : file.rhs) {
        line({"RHS", v.row, format_number(v.value)});
    }
    if (!file.ranges.empty()) {
        out += "RANGES\n";
        for (const QpsRowValue& v : file.ranges) {
            line({"RNG", v.row, format_number(v.value)});
        }
    }
    if (!file.bounds.empty()) {
        out += "BOUNDS\n";
        for (const QpsBound& b : file.bounds) {
            if (bound_has_value(b.type)) {
                line({bound_name(b.type), "BND", b.column, format_number(b.value)});
            } else {
                line({bound_name(b.type), "BND", b.column});
            }
        }
    }
    if (!file.quadobj.empty()) {
        out += "QUADOBJ\n";
        for (const QpsQuad& q : file.quadobj) {
            line({q.column, q.row, format_number(q.value)});
        }
    }
    out += "ENDATA\n";
    return out;
}

QpProblem to_problem(const QpsFile& file)
{
    const std::string& objective = file.objective_row();
    const Index n = static_cast<Index>(file.columns.size());

    std::unordered_map<std::string, Index> col_index;
    for (Index j = 0; j < n; j++) col_index.emplace(file.columns[j], j);
    std::unordered_map<std::string, std::size_t> row_index;
    for (std::size_t i = 0; i < file.rows.size(); i++) row_index.emplace(file.rows[i].name, i);

    std::vector<double> rhs(file.rows.size(), 0.0);
    for (const QpsRowValue& v : file.rhs) rhs[row_index.at(v.row)] = v.value;
    std::vector<std::optional<double>> range(file.rows.size());
    for (const QpsRowValue& v : file.ranges) {
        if (v.row == objective) throw std::invalid_argument("range on the objective row");
        range[row_index.at(v.row)] = v.value;
    }

    // per constraint row, its A row or its G rows (sign, rhs)
    struct Target
    {
        Index a_row = -1;
        std::vector<std::pair<Index, double>> g_rows; // (row, sign)
    };
    std::vector<Target> targets(file.rows.size());
    std::vector<double> b;
    std::vector<double> h;
    for (std::size_t i = 0; i < file.rows.size(); i++) {
        const QpsRow& r = file.rows[i];
        if (r.sense == RowSense::objective) continue;
        const double v = rhs[i];
        if (range[i]) {
            const double R = *range[i];
            double lo = v;
            double hi = v;
            if (r.sense == RowSense::less) {
                lo = v - std::abs(R);
            } else if (r.sense == RowSense::greater) {
                hi = v + std::abs(R);
            } else if (R >= 0.0) {
                hi = v + R;
            } else {
                lo = v + R;
            }
            targets[i].g_rows.emplace_back(static_cast<Index>(h.size()), 1.0);
            h.push_back(hi);
            targets[i].g_rows.emplace_back(static_cast<Index>(h.size()), -1.0);
            h.push_back(-lo);
        } else if (r.sense == RowSense::equal) {
            targets[i].a_row = static_cast<Index>(b.size());
            b.push_back(v);
        } else if (r.sense == RowSense::less) {
            targets[i].g_rows.emplace_back(static_cast<Index>(h.size()), 1.0);
            h.push_back(v);
        } else {
            targets[i].g_rows.emplace_back(static_cast<Index>(h.size()), -1.0);
            h.push_back(-v);
        }
    }

    QpProblem qp;
    qp.c.setZero(n);
    std::vector<Triplet> a_entries;
    std::vector<Triplet> g_entries;
    for (const QpsEntry& e : file.entries) {
        const Index j = col_index.at(e.column);
        if (e.row == objective) {
            qp.c[j] += e.value;
            continue;
        }
        const Target& t = targets[row_index.at(e.row)];
        if (t.a_row >= 0) a_entries.push_back({t.a_row, j, e.value});
        for (const auto& [g, sign] : t.g_rows) g_entries.push_back({g, j, sign * e.value});
    }
    qp.objective_constant = -rhs[row_index.at(objective)];

    // bounds, MPS defaults [0, inf)
    std::vector<double> l(static_cast<std::size_t>(n), 0.0);
    std::vector<double> u(static_cast<std::size_t>(n), infinity);
    std::vector<std::optional<double>> fixed(static_cast<std::size_t>(n));
    std::vector<bool> lower_set(static_cast<std::size_t>(n), false);
    for (const QpsBound& bd : file.bounds) {
        const Index j = col_index.at(bd.column);
        switch (bd.type) {
        case BoundType::up:
            u[j] = bd.value;
            // a negative upper bound on a variable without an explicit lower one frees it below
            if (bd.value < 0.0 && !lower_set[j] && l[j] == 0.0) l[j] = -infinity;
            break;
        case BoundType::lo:
            l[j] = bd.value;
            lower_set[j] = true;
            break;
        case BoundType::fx: fixed[j] = bd.value; break;
        case BoundType::fr:
            l[j] = -infinity;
            u[j] = infinity;
            break;
        case BoundType::mi: l[j] = -infinity; break;
        case BoundType::pl: u[j] = infinity; break;
        }
    }
    for (Index j = 0; j < n; j++) {
        if (fixed[j]) {
            a_entries.push_back({static_cast<Index>(b.size()), j, 1.0});
            b.push_back(*fixed[j]);
            l[j] = -infinity;
            u[j] = infinity;
        } else if (l[j] > u[j]) {
            throw std::invalid_argument("inconsistent bounds on column '" + file.columns[j] + "'");
        }
    }

    std::vector<Triplet> p_entries;
    for (const QpsQuad& q : file.quadobj) {
        Index i = col_index.at(q.row);
        Index j = col_index.at(q.column);
        if (i > j) std::swap(i, j);
        p_entries.push_back({i, j, q.value});
    }

    qp.P = SparseMatrixCsc::from_triplets(n, n, p_entries);
    qp.A = SparseMatrixCsc::from_triplets(static_cast<Index>(b.size()), n, a_entries);
    qp.b = Eigen::Map<const Vec>(b.data(), static_cast<Index>(b.size()));
    qp.G = SparseMatrixCsc::from_triplets(static_cast<Index>(h.size()), n, g_entries);
    qp.h = Eigen::Map<const Vec>(h.data(), static_cast<Index>(h.size()));
    qp.l = Eigen::Map<const Vec>(l.data(), n);
    qp.u = Eigen::Map<const Vec>(u.data(), n);
    return qp;
}

} // namespace ipqp
