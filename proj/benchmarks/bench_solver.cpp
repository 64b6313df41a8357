#include <benchmark/benchmark.h>

#include "ipqp/solver.hpp"
#include "random_qp.hpp"

using namespace ipqp;

namespace
{

testing::RandomQp make_problem(Index n)
{
    testing::RandomQpGenerator gen(42);
    testing::RandomQpOptions opt;
    opt.n = n;
    opt.p = n / 5;
    opt.m = n / 2;
    opt.condition = 1e4;
    opt.density = std::min(0.3, 10.0 / static_cast<double>(n));
    opt.box = true;
    return gen.generate(opt);
}

void BM_Setup(benchmark::State& state)
{
    const auto rq = make_problem(state.range(0));
    for (auto _ : state) {
        Solver solver(rq.problem, Settings{});
        benchmark::DoNotOptimize(solver.kkt().dim());
    }
}
BENCHMARK(BM_Setup)->Arg(50)->Arg(200)->Arg(800);

void BM_Solve(benchmark::State& state)
{
    const auto rq = make_problem(state.range(0));
    Solver solver(rq.problem, Settings{});
    Index iterations = 0;
    for (auto _ : state) {
        const auto& res = solver.solve();
        iterations = res.iterations;
        benchmark::DoNotOptimize(res.iterate.x.data());
    }
    state.counters["iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_Solve)->Arg(50)->Arg(200)->Arg(800);

void BM_UpdateAndSolve(benchmark::State& state)
{
    const auto rq = make_problem(state.range(0));
    Solver solver(rq.problem, Settings{});
    Vec c = rq.problem.c;
    QpUpdate upd;
    upd.c = &c;
    for (auto _ : state) {
        c[0] += 1e-3;
        solver.update(upd);
        benchmark::DoNotOptimize(solver.solve().iterate.x.data());
    }
}
BENCHMARK(BM_UpdateAndSolve)->Arg(50)->Arg(200);

} // namespace
