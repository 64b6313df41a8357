#include <benchmark/benchmark.h>

#include "ipqp/ldl.hpp"
#include "ipqp/ordering.hpp"
#include "oracles.hpp"

using namespace ipqp;

namespace
{

void BM_SymbolicFactorize(benchmark::State& state)
{
    testing::RandomQpGenerator gen(1);
    const Index n = state.range(0);
    const auto K = testing::random_quasi_definite(gen, 2 * n / 3, n - 2 * n / 3, 8.0 / static_cast<double>(n));
    for (auto _ : state) {
        auto perm = amd_ordering(K);
        benchmark::DoNotOptimize(symbolic_factorize(K, perm));
    }
}
BENCHMARK(BM_SymbolicFactorize)->Arg(100)->Arg(400)->Arg(1600);

void BM_NumericFactorize(benchmark::State& state)
{
    testing::RandomQpGenerator gen(1);
    const Index n = state.range(0);
    const Index n1 = 2 * n / 3;
    const auto K = testing::random_quasi_definite(gen, n1, n - n1, 8.0 / static_cast<double>(n));
    LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
    const auto signs = testing::block_signs(n1, n - n1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.factorize(K, signs));
    }
    state.counters["L_nnz"] = static_cast<double>(f.symbolic().l_nnz());
}
BENCHMARK(BM_NumericFactorize)->Arg(100)->Arg(400)->Arg(1600);

void BM_Solve(benchmark::State& state)
{
    testing::RandomQpGenerator gen(1);
    const Index n = state.range(0);
    const Index n1 = 2 * n / 3;
    const auto K = testing::random_quasi_definite(gen, n1, n - n1, 8.0 / static_cast<double>(n));
    LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
    f.factorize(K, testing::block_signs(n1, n - n1));
    std::vector<double> x(static_cast<std::size_t>(n), 1.0);
    std::vector<double> work(static_cast<std::size_t>(n));
    for (auto _ : state) {
        f.solve_in_place(x, work);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_Solve)->Arg(100)->Arg(400)->Arg(1600);

} // namespace
