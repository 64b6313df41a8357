#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ipqp/qps.hpp"
#include "ipqp/solver.hpp"
#include "ipqp/termination.hpp"
#include "ipqp_tools/harness.hpp"

using namespace ipqp;

namespace
{

struct SolverFlags
{
    std::optional<double> eps_abs;
    std::optional<double> eps_rel;
    std::optional<long> max_iter;
    std::optional<double> time_limit;
    bool no_ruiz = false;
    bool low_accuracy = false;
    bool verbose = false;

    void attach(CLI::App* app)
    {
        app->add_option("--eps-abs", eps_abs, "absolute tolerance");
        app->add_option("--eps-rel", eps_rel, "relative tolerance");
        app->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::NonNegativeNumber);
        app->add_option("--time-limit", time_limit, "seconds per problem, setup included")
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--no-ruiz", no_ruiz, "disable Ruiz equilibration");
        app->add_flag("--low-accuracy", low_accuracy, "eps_abs = 1e-3, eps_rel = 1e-4");
        app->add_flag("-v,--verbose", verbose, "per-iteration log");
    }

    Settings settings() const
    {
        Settings s = low_accuracy ? Settings::low_accuracy() : Settings{};
        if (eps_abs) s.eps_abs = *eps_abs;
        if (eps_rel) s.eps_rel = *eps_rel;
        if (max_iter) s.max_iter = *max_iter;
        s.time_limit = time_limit;
        s.equilibrate = !no_ruiz;
        s.verbose = verbose;
        s.validate();
        return s;
    }
};

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void print_record(const tools::BenchmarkRecord& r)
{
    std::printf("%-12s %-16s iter %4td  obj % .8e  p %.2e  d %.2e  gap %.2e  time %.3es\n", r.problem.c_str(),
                to_string(r.status), r.iterations, r.objective, r.primal_res, r.dual_res, r.gap, r.total_time());
    if (!r.note.empty()) std::printf("             note: %s\n", r.note.c_str());
}

int run_solve(const std::string& file, const SolverFlags& flags, const std::string& json, const std::string& csv)
{
    const Settings settings = flags.settings();
    const QpsFile qps = read_qps_file(file);
    const QpProblem problem = to_problem(qps);
    Solver solver(problem, settings);
    const SolveResult& res = solver.solve();

    tools::BenchmarkRecord rec;
    rec.problem = qps.name.empty() ? std::filesystem::path(file).stem().string() : qps.name;
    rec.status = res.status;
    rec.solve_time = res.solve_time;
    rec.setup_time = res.setup_time;
    rec.iterations = res.iterations;
    rec.objective = res.objective;
    const TerminationInfo info = check_termination(problem, res.iterate, settings);
    rec.primal_res = info.primal_res;
    rec.dual_res = info.dual_res;
    rec.gap = info.gap;
    print_record(rec);

    if (!json.empty()) {
        auto out = open_output(json);
        out << tools::to_json_line(rec) << '\n';
    }
    if (!csv.empty()) {
        auto out = open_output(csv);
        out.precision(17);
        out << "variable,x\n";
        for (Index j = 0; j < problem.n(); j++) out << qps.columns[j] << ',' << res.iterate.x[j] << '\n';
    }
    return rec.solved() ? 0 : 1;
}

int run_bench(const std::string& dir, const SolverFlags& flags, unsigned workers, const std::string& json,
              const std::string& csv)
{
    const auto records = tools::run_corpus(dir, flags.settings(), workers);
    for (const auto& r : records) print_record(r);
    if (records.empty()) {
        std::printf("no problems found in %s\n", dir.c_str());
    } else {
        std::printf("%zu problems, failure rate %s\n", records.size(),
                    tools::format_rate(tools::failure_rate(records)).c_str());
    }
    if (!json.empty()) {
        auto out = open_output(json);
        tools::write_records(out, records);
    }
    if (!csv.empty()) {
        auto out = open_output(csv);
        tools::write_time_table_csv(out, tools::sort_by_solver_time(records));
    }
    for (const auto& r : records) {
        if (!r.solved()) return 1;
    }
    return 0;
}

int run_profile(const std::vector<std::string>& inputs, std::size_t samples, double theta_max,
                const std::string& csv)
{
    std::vector<tools::SolverRun> runs;
    bool all_solved = true;
    for (const auto& path : inputs) {
        tools::SolverRun run{std::filesystem::path(path).stem().string(), tools::read_records(path)};
        for (const auto& r : run.records) all_solved = all_solved && r.solved();
        if (!run.records.empty()) {
            std::printf("%-20s failure rate %s\n", run.solver.c_str(),
                        tools::format_rate(tools::failure_rate(run.records)).c_str());
        }
        runs.push_back(std::move(run));
    }
    const auto profile = tools::performance_profile(runs, samples, theta_max);
    if (csv.empty()) {
        tools::write_profile_csv(std::cout, profile);
    } else {
        auto out = open_output(csv);
        tools::write_profile_csv(out, profile);
    }
    return all_solved ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ipqp: sparse convex QP solver (interior-point proximal method of multipliers)"};
    app.require_subcommand(1);

    SolverFlags solve_flags;
    std::string solve_file;
    std::string solve_json;
    std::string solve_csv;
    auto* solve = app.add_subcommand("solve", "solve one QPS file");
    solve->add_option("file", solve_file, "QPS file")->required()->check(CLI::ExistingFile);
    solve_flags.attach(solve);
    solve->add_option("--json", solve_json, "write the result record as a JSON line");
    solve->add_option("--csv", solve_csv, "write the primal solution as CSV");

    SolverFlags bench_flags;
    std::string bench_dir;
    std::string bench_json;
    std::string bench_csv;
    unsigned workers = 1;
    auto* bench = app.add_subcommand("bench", "solve every QPS file of a directory");
    bench->add_option("dir", bench_dir, "corpus directory")->required()->check(CLI::ExistingDirectory);
    bench_flags.attach(bench);
    bench->add_option("--json", bench_json, "write one JSON record per problem");
    bench->add_option("--csv", bench_csv, "write the per-problem time table, fastest first");
    bench->add_option("--workers", workers, "parallel worker slots")->check(CLI::PositiveNumber);

    std::vector<std::string> profile_inputs;
    std::string profile_csv;
    std::size_t samples = 201;
    double theta_max = 1e4;
    auto* profile = app.add_subcommand("profile", "Dolan-More performance profile from bench JSON results");
    profile->add_option("results", profile_inputs, "JSON-lines result files, one per solver")
        ->required()
        ->check(CLI::ExistingFile);
    profile->add_option("--csv", profile_csv, "output CSV (stdout if omitted)");
    profile->add_option("--samples", samples, "grid points on [1, theta-max]")->check(CLI::Range(2, 100000));
    profile->add_option("--theta-max", theta_max, "largest ratio on the grid")->check(CLI::Range(1.0001, 1e12));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(solve_file, solve_flags, solve_json, solve_csv);
        if (*bench) return run_bench(bench_dir, bench_flags, workers, bench_json, bench_csv);
        if (*profile) return run_profile(profile_inputs, samples, theta_max, profile_csv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
