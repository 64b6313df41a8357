#ifndef IPQP_TOOLS_HARNESS_HPP
#define IPQP_TOOLS_HARNESS_HPP

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ipqp/problem.hpp"

namespace ipqp::tools
{

/// Time given to failed problems when ranking; they sort after every solved one.
constexpr double failed_time = std::numeric_limits<double>::infinity();

struct BenchmarkRecord
{
    std::string problem;
    Status status = Status::numerical_error;
    double solve_time = 0.0;
    double setup_time = 0.0;
    Index iterations = 0;
    double primal_res = 0.0; // recomputed from the returned iterate
    double dual_res = 0.0;
    double gap = 0.0;
    double objective = 0.0;
    std::string note;        // parse/setup errors

    bool solved() const { return status == Status::solved; }
    /// setup + solve, the internally measured time.
    double total_time() const { return setup_time + solve_time; }
};

/// QPS/MPS files of a directory (non-recursive), sorted by file name.
std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& directory);

/// Parses, sets up and solves one file. Never throws for bad input files:
/// they come back as NumericalError records with a note.
BenchmarkRecord run_problem(const std::filesystem::path& file, const Settings& settings);

/// Every problem of `directory` in name order; `workers` > 1 solves in
/// parallel but the result order stays the same.
std::vector<BenchmarkRecord> run_corpus(const std::filesystem::path& directory, const Settings& settings,
                                        unsigned workers = 1);

/// 100 * failures / records. Throws std::invalid_argument on an empty list.
double failure_rate(const std::vector<BenchmarkRecord>& records);
/// Two decimals and a percent sign, e.g. "0.72%".
std::string format_rate(double percent);

/// Ascending by total time, ties broken by name, failures last.
std::vector<BenchmarkRecord> sort_by_solver_time(std::vector<BenchmarkRecord> records);
void write_time_table_csv(std::ostream& out, const std::vector<BenchmarkRecord>& sorted);

struct SolverRun
{
    std::string solver;
    std::vector<BenchmarkRecord> records;
};

struct PerformanceProfile
{
    std::vector<std::string> solvers;
    std::vector<double> theta;             // log grid on [1, theta_max]
    std::vector<std::vector<double>> rho;  // rho[solver][grid point]
};

/// Dolan-Moré profile over the shared problem list. Failed problems get an
/// infinite ratio. Throws std::invalid_argument when the problem sets differ
/// or no run is given.
PerformanceProfile performance_profile(const std::vector<SolverRun>& runs, std::size_t samples = 201,
                                       double theta_max = 1e4);
void write_profile_csv(std::ostream& out, const PerformanceProfile& profile);

/// One JSON object per line.
std::string to_json_line(const BenchmarkRecord& record);
BenchmarkRecord from_json_line(const std::string& line);
void write_records(std::ostream& out, const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> read_records(const std::filesystem::path& path);

} // namespace ipqp::tools

#endif // IPQP_TOOLS_HARNESS_HPP
