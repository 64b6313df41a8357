#include "ipqp_tools/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "ipqp/qps.hpp"
#include "ipqp/solver.hpp"
#include "ipqp/termination.hpp"

namespace ipqp::tools
{

namespace
{

bool is_problem_file(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".qps" || ext == ".mps" || ext == ".sif";
}

// JSON has no infinity
nlohmann::json number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

double number_or(const nlohmann::json& j, const char* key, double fallback)
{
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<double>();
}

constexpr double min_time = 1e-9;

} // namespace

std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& directory)
{
    if (!std::filesystem::is_directory(directory)) {
        throw std::invalid_argument("not a directory: " + directory.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.is_regular_file() && is_problem_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

BenchmarkRecord run_problem(const std::filesystem::path& file, const Settings& settings)
{
    BenchmarkRecord rec;
    rec.problem = file.stem().string();
    try {
        const QpsFile qps = read_qps_file(file.string());
        if (!qps.name.empty()) rec.problem = qps.name;
        const QpProblem problem = to_problem(qps);
        Solver solver(problem, settings);
        const SolveResult& res = solver.solve();
        rec.status = res.status;
        rec.solve_time = res.solve_time;
        rec.setup_time = res.setup_time;
        rec.iterations = res.iterations;
        rec.objective = res.objective;

        // do not trust the loop's numbers
        const TerminationInfo info = check_termination(problem, res.iterate, settings);
        rec.primal_res = info.primal_res;
        rec.dual_res = info.dual_res;
        rec.gap = info.gap;
    } catch (const std::exception& e) {
        rec.status = Status::numerical_error;
        rec.note = e.what();
    }
    return rec;
}

std::vector<BenchmarkRecord> run_corpus(const std::filesystem::path& directory, const Settings& settings,
                                        unsigned workers)
{
    const auto files = list_corpus(directory);
    std::vector<BenchmarkRecord> records(files.size());
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < files.size(); i++) records[i] = run_problem(files[i], settings);
        return records;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; w++) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < files.size(); i = next++) {
                records[i] = run_problem(files[i], settings);
            }
        });
    }
    for (auto& t : pool) t.join();
    return records;
}

double failure_rate(const std::vector<BenchmarkRecord>& records)
{
    if (records.empty()) {
        throw std::invalid_argument("failure_rate: empty record list");
    }
    const auto failures = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.solved(); });
    return 100.0 * static_cast<double>(failures) / static_cast<double>(records.size());
}

std::string format_rate(double percent)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", percent);
    return buf;
}

std::vector<BenchmarkRecord> sort_by_solver_time(std::vector<BenchmarkRecord> records)
{
    auto key = [](const BenchmarkRecord& r) { return r.solved() ? r.total_time() : failed_time; };
    std::stable_sort(records.begin(), records.end(), [&](const auto& a, const auto& b) {
        const double ka = key(a);
        const double kb = key(b);
        if (ka != kb) return ka < kb;
        return a.problem < b.problem;
    });
    return records;
}

void write_time_table_csv(std::ostream& out, const std::vector<BenchmarkRecord>& sorted)
{
    out << "rank,problem,status,time\n";
    for (std::size_t i = 0; i < sorted.size(); i++) {
        const auto& r = sorted[i];
        out << i + 1 << ',' << r.problem << ',' << to_string(r.status) << ',';
        if (r.solved()) {
            out << r.total_time();
        } else {
            out << "inf";
        }
        out << '\n';
    }
}

PerformanceProfile performance_profile(const std::vector<SolverRun>& runs, std::size_t samples, double theta_max)
{
    if (runs.empty()) {
        throw std::invalid_argument("performance_profile: no solver results");
    }
    if (samples < 2 || !(theta_max > 1.0)) {
        throw std::invalid_argument("performance_profile: bad grid");
    }

    // per solver, problem -> time
    std::vector<std::map<std::string, double>> times(runs.size());
    for (std::size_t s = 0; s < runs.size(); s++) {
        for (const auto& r : runs[s].records) {
            if (!times[s].emplace(r.problem, r.solved() ? r.total_time() : failed_time).second) {
                throw std::invalid_argument("performance_profile: duplicate problem '" + r.problem + "' for " +
                                            runs[s].solver);
            }
        }
    }
    for (std::size_t s = 1; s < runs.size(); s++) {
        if (times[s].size() != times[0].size() ||
            !std::equal(times[s].begin(), times[s].end(), times[0].begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw std::invalid_argument("performance_profile: problem lists differ between solvers");
        }
    }

    const std::size_t np = times[0].size();
    std::vector<std::vector<double>> ratios(runs.size());
    for (const auto& [name, unused] : times[0]) {
        double best = failed_time;
        for (const auto& t : times) best = std::min(best, t.at(name));
        for (std::size_t s = 0; s < runs.size(); s++) {
            const double t = times[s].at(name);
            double ratio = failed_time;
            if (std::isfinite(t)) {
                // clock resolution floor keeps 0/0 out
                ratio = std::max(t, min_time) / std::max(best, min_time);
            }
            ratios[s].push_back(ratio);
        }
    }

    PerformanceProfile prof;
    for (const auto& r : runs) prof.solvers.push_back(r.solver);
    prof.theta.resize(samples);
    for (std::size_t i = 0; i < samples; i++) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        prof.theta[i] = i + 1 == samples ? theta_max : std::pow(theta_max, t);
    }
    prof.rho.assign(runs.size(), std::vector<double>(samples, 0.0));
    for (std::size_t s = 0; s < runs.size(); s++) {
        std::vector<double> sorted = ratios[s];
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < samples; i++) {
            const auto count = std::upper_bound(sorted.begin(), sorted.end(), prof.theta[i]) - sorted.begin();
            prof.rho[s][i] = np > 0 ? static_cast<double>(count) / static_cast<double>(np) : 0.0;
        }
    }
    return prof;
}

void write_profile_csv(std::ostream& out, const PerformanceProfile& profile)
{
    out << "theta";
    for (const auto& s : profile.solvers) out << ',' << s;
    out << '\n';
    for (std::size_t i = 0; i < profile.theta.size(); i++) {
        out << profile.theta[i];
        for (const auto& curve : profile.rho) out << ',' << curve[i];
        out << '\n';
    }
}

std::string to_json_line(const BenchmarkRecord& r)
{
    nlohmann::json j;
    j["problem"] = r.problem;
    j["status"] = to_string(r.status);
    j["solve_time"] = number(r.solve_time);
    j["setup_time"] = number(r.setup_time);
    j["iterations"] = r.iterations;
    j["primal_res"] = number(r.primal_res);
    j["dual_res"] = number(r.dual_res);
    j["gap"] = number(r.gap);
    j["objective"] = number(r.objective);
    if (!r.note.empty()) j["note"] = r.note;
    return j.dump();
}

BenchmarkRecord from_json_line(const std::string& line)
{
    const auto j = nlohmann::json::parse(line);
    BenchmarkRecord r;
    r.problem = j.at("problem").get<std::string>();
    const auto status = status_from_string(j.at("status").get<std::string>());
    if (!status) {
        throw std::invalid_argument("unknown status '" + j.at("status").get<std::string>() + "'");
    }
    r.status = *status;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.solve_time = number_or(j, "solve_time", 0.0);
    r.setup_time = number_or(j, "setup_time", 0.0);
    r.iterations = j.value("iterations", Index{0});
    r.primal_res = number_or(j, "primal_res", nan);
    r.dual_res = number_or(j, "dual_res", nan);
    r.gap = number_or(j, "gap", nan);
    r.objective = number_or(j, "objective", nan);
    r.note = j.value("note", std::string());
    return r;
}

void write_records(std::ostream& out, const std::vector<BenchmarkRecord>& records)
{
    for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<BenchmarkRecord> read_records(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::vector<BenchmarkRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(from_json_line(line));
    }
    return out;
}

} // namespace ipqp::tools
