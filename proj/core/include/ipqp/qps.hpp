#ifndef IPQP_QPS_HPP
#define IPQP_QPS_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipqp/problem.hpp"

namespace ipqp
{

enum class RowSense
{
    objective,
    equal,
    less,
    greater,
};

struct QpsRow
{
    std::string name;
    RowSense sense = RowSense::equal;

    bool operator==(const QpsRow&) const = default;
};

/// (column, row, value) of the COLUMNS section.
struct QpsEntry
{
    std::string column;
    std::string row;
    double value = 0.0;

    bool operator==(const QpsEntry&) const = default;
};

/// Row-indexed value of the RHS and RANGES sections.
struct QpsRowValue
{
    std::string row;
    double value = 0.0;

    bool operator==(const QpsRowValue&) const = default;
};

enum class BoundType
{
    up,
    lo,
    fx,
    fr,
    mi,
    pl,
};

struct QpsBound
{
    BoundType type = BoundType::up;
    std::string column;
    double value = 0.0; // unused for FR, MI, PL

    bool operator==(const QpsBound&) const = default;
};

/// Quadratic objective entry, normalized so that `row` does not come before
/// `column` in declaration order (lower triangle).
struct QpsQuad
{
    std::string row;
    std::string column;
    double value = 0.0;

    bool operator==(const QpsQuad&) const = default;
};

struct QpsFile
{
    std::string name;
    std::vector<QpsRow> rows;          // includes the objective row
    std::vector<std::string> columns;  // declaration order
    std::vector<QpsEntry> entries;     // duplicates summed, first-appearance order
    std::vector<QpsRowValue> rhs;
    std::vector<QpsRowValue> ranges;
    std::vector<QpsBound> bounds;      // applied in order
    std::vector<QpsQuad> quadobj;

    const std::string& objective_row() const;

    bool operator==(const QpsFile&) const = default;
};

class QpsParseError : public std::runtime_error
{
public:
    QpsParseError(std::size_t line, const std::string& message);

    std::size_t line() const { return m_line; }

private:
    std::size_t m_line;
};

/// Reads fixed or free MPS/QPS text. Integer markers are skipped; extra N rows
/// beyond the first are treated as free rows and dropped.
QpsFile parse_qps(std::string_view text);
QpsFile read_qps_file(const std::string& path);

/// Free-form text that parses back to the same structure.
std::string write_qps(const QpsFile& file);

/// Maps the file onto the solver's problem form. '≥' rows are negated into G,
/// ranged rows become two G rows, FX bounds become equality rows appended to A.
QpProblem to_problem(const QpsFile& file);

} // namespace ipqp

#endif // IPQP_QPS_HPP
