// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Usage: ipqp_acceptance [maros fixture directory]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "alloc_counter.hpp"
#include "ipqp/equilibration.hpp"
#include "ipqp/ipm.hpp"
#include "ipqp/ldl.hpp"
#include "ipqp/ordering.hpp"
#include "ipqp/qps.hpp"
#include "ipqp/solver.hpp"
#include "ipqp/termination.hpp"
#include "ipqp_tools/harness.hpp"
#include "oracles.hpp"

using namespace ipqp;
using namespace ipqp::testing;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok && pass) detail = why;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

constexpr std::uint64_t suite_seed = 20240611;
constexpr int suite_size = 200;

std::vector<RandomQp> make_suite()
{
    RandomQpGenerator gen(suite_seed);
    std::vector<RandomQp> suite;
    for (int k = 0; k < suite_size; k++) suite.push_back(gen.generate(gen.suite_options(k)));
    return suite;
}

// solve and recheck optimality densely on the data handed to the solver
bool solved_and_verified(const QpProblem& qp, const Settings& s, Index* iterations = nullptr)
{
    Solver solver(qp, s);
    const auto& res = solver.solve();
    if (iterations) *iterations = res.iterations;
    return res.status == Status::solved && dense_check(qp, res.iterate, s.eps_abs, s.eps_rel).converged;
}

Outcome random_suite(const std::vector<RandomQp>& suite)
{
    Outcome out;
    Settings s;
    int solved = 0;
    Index total_iter = 0;
    Index max_n = 0, max_p = 0, max_m = 0;
    double max_cond = 0.0;
    for (std::size_t k = 0; k < suite.size(); k++) {
        const QpProblem& qp = suite[k].problem;
        max_n = std::max(max_n, qp.n());
        max_p = std::max(max_p, qp.p());
        max_m = std::max(max_m, qp.m());
        max_cond = std::max(max_cond, std::pow(10.0, static_cast<double>(k % 7)));
        Index it = 0;
        const bool ok = solved_and_verified(qp, s, &it);
        solved += ok;
        total_iter += it;
        out.require(ok, fmt("problem %zu not solved/verified", k));
    }
    out.require(max_n <= 100 && max_p <= 30 && max_m <= 60, "suite dimensions out of range");
    out.detail = fmt("%d/%d solved, optimality rechecked densely; n<=%td p<=%td m<=%td cond<=%.0e; mean %.1f iterations%s",
                     solved, suite_size, max_n, max_p, max_m, max_cond,
                     static_cast<double>(total_iter) / suite_size, out.pass ? "" : ("; " + out.detail).c_str());
    return out;
}

Outcome degeneracy(const std::vector<RandomQp>& suite)
{
    Outcome out;
    Settings s;
    int dup_ok = 0;
    int dup_total = 0;
    int rank_ok = 0;
    for (std::size_t k = 0; k < suite.size(); k++) {
        if (suite[k].problem.p() > 0) {
            dup_total++;
            const bool ok = solved_and_verified(duplicate_equalities(suite[k].problem), s);
            dup_ok += ok;
            out.require(ok, fmt("duplicated rows of problem %zu failed", k));
        }
        const bool ok = solved_and_verified(rank_deficient(suite[k]).problem, s);
        rank_ok += ok;
        out.require(ok, fmt("rank-deficient P of problem %zu failed", k));
    }
    const std::string why = out.pass ? "" : "; " + out.detail;
    out.detail = fmt("duplicated equality rows %d/%d solved, rank-deficient P (half the spectrum zeroed) %d/%d solved%s",
                     dup_ok, dup_total, rank_ok, suite_size, why.c_str());
    return out;
}

Outcome factorization()
{
    Outcome out;
    RandomQpGenerator gen(suite_seed + 1);
    double worst_rec = 0.0;
    double worst_solve = 0.0;
    Index max_dim = 0;
    for (int t = 0; t < 100; t++) {
        const Index n1 = gen.index(1, 100);
        const Index n2 = gen.index(1, 150 - n1);
        const SparseMatrixCsc K = random_quasi_definite(gen, n1, n2, gen.uniform(0.02, 0.3));
        max_dim = std::max(max_dim, n1 + n2);
        LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
        const FactorResult r = f.factorize(K, block_signs(n1, n2));
        out.require(r.ok(), fmt("factorization %d failed", t));
        if (!r.ok()) continue;
        const double scale = max_abs(symmetric_from_upper(K));
        worst_rec = std::max(worst_rec, reconstruction_error(K, f) / scale);

        Vec rhs(n1 + n2);
        for (Index i = 0; i < rhs.size(); i++) rhs[i] = gen.normal();
        const std::vector<double> x = f.solve(std::vector<double>(rhs.data(), rhs.data() + rhs.size()));
        const Vec dense = symmetric_from_upper(K).fullPivLu().solve(rhs);
        const Vec ours = Eigen::Map<const Vec>(x.data(), rhs.size());
        worst_solve = std::max(worst_solve, inf_norm(ours - dense) / inf_norm(dense));
    }
    out.require(worst_rec <= 1e-10, "reconstruction error above 1e-10");
    out.require(worst_solve <= 1e-9, "solve differs from dense oracle by more than 1e-9");
    const std::string why = out.pass ? "" : "; " + out.detail;
    out.detail = fmt("100 quasi-definite matrices, dim<=%td: max |PKPᵀ-LDLᵀ|/|K| = %.1e (<=1e-10), max solve rel. diff = %.1e (<=1e-9)%s",
                     max_dim, worst_rec, worst_solve, why.c_str());
    return out;
}

// well scaled data (entry magnitudes in [0.5, ~6]) under random row/column scaling 10^U(-3, 3)
QpProblem badly_scaled_instance(RandomQpGenerator& gen, Index n, Index p, Index m)
{
    auto magnitude = [&] { return (gen.coin(0.5) ? 1.0 : -1.0) * gen.uniform(0.5, 1.0); };
    DenseMatrix P = DenseMatrix::Zero(n, n);
    for (Index i = 0; i < n; i++) {
        for (Index j = i + 1; j < n; j++) {
            if (gen.coin(0.1)) P(i, j) = P(j, i) = magnitude();
        }
    }
    for (Index i = 0; i < n; i++) P(i, i) = 1.0 + P.row(i).cwiseAbs().sum(); // diagonally dominant
    DenseMatrix A = DenseMatrix::Zero(p, n);
    DenseMatrix G = DenseMatrix::Zero(m, n);
    for (DenseMatrix* M : {&A, &G}) {
        for (Index i = 0; i < M->rows(); i++) {
            for (Index j = 0; j < n; j++) {
                if (gen.coin(0.2)) (*M)(i, j) = magnitude();
            }
            (*M)(i, gen.index(0, n - 1)) = magnitude();
        }
    }
    auto factors = [&](Index k) {
        Vec f(k);
        for (Index i = 0; i < k; i++) f[i] = std::pow(10.0, gen.uniform(-3.0, 3.0));
        return f;
    };
    const Vec dx = factors(n);
    const Vec dy = factors(p);
    const Vec dz = factors(m);
    QpProblem qp;
    qp.P = to_csc(dx.asDiagonal() * P * dx.asDiagonal(), true);
    qp.A = p > 0 ? to_csc(dy.asDiagonal() * A * dx.asDiagonal()) : empty_rows(n);
    qp.G = m > 0 ? to_csc(dz.asDiagonal() * G * dx.asDiagonal()) : empty_rows(n);
    // a feasible point fixes b and a slack-positive h
    Vec x0(n);
    for (Index i = 0; i < n; i++) x0[i] = gen.normal() / dx[i];
    qp.c = Vec(n);
    for (Index i = 0; i < n; i++) qp.c[i] = gen.normal() * dx[i];
    qp.b = to_dense(qp.A) * x0;
    qp.h = to_dense(qp.G) * x0;
    for (Index i = 0; i < m; i++) qp.h[i] += gen.uniform(0.1, 1.0) * dz[i];
    return qp;
}

Outcome ruiz()
{
    Outcome out;
    RandomQpGenerator gen(suite_seed + 2);
    double lo = infinity;
    double hi = 0.0;
    double worst = 0.0;
    double worst_11 = 0.0;
    int within = 0;
    for (int t = 0; t < 50; t++) {
        const QpProblem qp = badly_scaled_instance(gen, gen.index(10, 60), gen.index(1, 10), gen.index(1, 30));
        for (const SparseMatrixCsc* M : {&qp.P, &qp.A, &qp.G}) {
            for (double v : M->values) {
                lo = std::min(lo, std::abs(v));
                hi = std::max(hi, std::abs(v));
            }
        }
        double dev[2] = {0.0, 0.0};
        for (int variant = 0; variant < 2; variant++) {
            const auto [scaled, eq] = ruiz_equilibrate(qp, variant == 0 ? 10 : 11, 1e-3);
            // norms of the diagonally scaled matrix, before the uniform cost scaling of P
            SparseMatrixCsc P = scaled.P;
            for (double& v : P.values) v /= eq.c_scale;
            const StackedNorms norms = stacked_norms(P, scaled.A, scaled.G);
            for (const Vec* v : {&norms.x, &norms.y, &norms.z}) {
                for (Index i = 0; i < v->size(); i++) {
                    if ((*v)[i] != 0.0) dev[variant] = std::max(dev[variant], std::abs((*v)[i] - 1.0));
                }
            }
        }
        within += dev[0] <= 0.01;
        worst = std::max(worst, dev[0]);
        worst_11 = std::max(worst_11, dev[1]);
    }
    out.require(within == 50, "stacked norms outside [0.99, 1.01] after 10 passes");

    // ill-conditioned fixture, solved with and without equilibration, both checked on the original data
    RandomQpGenerator fix_gen(suite_seed + 3);
    const QpProblem fixture = badly_scaled_instance(fix_gen, 30, 5, 15);
    Settings with;
    Settings without;
    without.equilibrate = false;
    Index it_with = 0;
    Index it_without = 0;
    const bool ok_with = solved_and_verified(fixture, with, &it_with);
    const bool ok_without = solved_and_verified(fixture, without, &it_without);
    out.require(ok_with && ok_without, "ill-conditioned fixture not solved both ways");

    const std::string why = out.pass ? "" : "; " + out.detail;
    out.detail = fmt("50 instances, entries %.0e..%.0e: %d/50 within [0.99,1.01] after <=10 passes (worst |norm-1| = %.4f; %.4f after 11 passes); "
                     "fixture solved with Ruiz %s (%td it), without %s (%td it)%s",
                     lo, hi, within, worst, worst_11, ok_with ? "yes" : "no", it_with, ok_without ? "yes" : "no",
                     it_without, why.c_str());
    return out;
}

Outcome maros(const std::filesystem::path& dir)
{
    Outcome out;
    const auto records = tools::run_corpus(dir, Settings::low_accuracy());
    out.require(records.size() >= 10, fmt("only %zu fixtures found", records.size()));
    if (records.empty()) {
        out.detail = "no fixtures in " + dir.string();
        return out;
    }
    const std::string rate = tools::format_rate(tools::failure_rate(records));
    out.require(rate == "0.00%", "failures: " + rate);
    std::string failed;
    for (const auto& r : records) {
        if (!r.solved()) failed += " " + r.problem;
    }
    out.detail = fmt("%zu Maros-Meszaros fixtures at eps_abs=1e-3, eps_rel=1e-4: failure rate %s%s", records.size(),
                     rate.c_str(), failed.empty() ? "" : (" (failed:" + failed + ")").c_str());
    return out;
}

tools::BenchmarkRecord rec(const std::string& name, double t, Status st = Status::solved)
{
    tools::BenchmarkRecord r;
    r.problem = name;
    r.solve_time = t;
    r.status = st;
    return r;
}

Outcome harness()
{
    Outcome out;
    auto with_failures = [](int total, int failures) {
        std::vector<tools::BenchmarkRecord> v;
        for (int i = 0; i < total; i++) v.push_back(rec("p" + std::to_string(i), 1.0, i < failures ? Status::time_limit : Status::solved));
        return v;
    };
    const std::string r0 = tools::format_rate(tools::failure_rate(with_failures(138, 0)));
    const std::string r1 = tools::format_rate(tools::failure_rate(with_failures(138, 1)));
    const std::string r6 = tools::format_rate(tools::failure_rate(with_failures(138, 6)));
    out.require(r0 == "0.00%" && r1 == "0.72%" && r6 == "4.35%", "failure-rate arithmetic");

    // single solver all solved
    const auto single = tools::performance_profile({{"a", {rec("x", 1.0), rec("y", 3.0)}}});
    bool ex1 = true;
    for (double r : single.rho[0]) ex1 = ex1 && r == 1.0;
    // two solvers, one problem, times 1 and 2, on a grid through θ = 2
    const auto two = tools::performance_profile({{"fast", {rec("x", 1.0)}}, {"slow", {rec("x", 2.0)}}}, 3, 4.0);
    const bool ex2 = two.theta[1] == 2.0 && two.rho[0][0] == 1.0 && two.rho[1][0] == 0.0 && two.rho[1][1] == 1.0;
    // half failed
    std::vector<tools::BenchmarkRecord> half;
    std::vector<tools::BenchmarkRecord> other;
    for (int i = 0; i < 8; i++) {
        half.push_back(rec("p" + std::to_string(i), 1.0, i % 2 ? Status::numerical_error : Status::solved));
        other.push_back(rec("p" + std::to_string(i), 0.5 + i));
    }
    const auto hp = tools::performance_profile({{"half", half}, {"other", other}}, 201, 1e8);
    bool ex3 = true;
    for (double r : hp.rho[0]) ex3 = ex3 && r <= 0.5;
    bool mono = true;
    for (const auto* prof : {&single, &two, &hp}) {
        for (const auto& curve : prof->rho) {
            for (std::size_t i = 1; i < curve.size(); i++) mono = mono && curve[i] >= curve[i - 1];
        }
    }
    out.require(ex1 && ex2 && ex3 && mono, "performance profile examples");
    out.detail = fmt("1/138 -> %s, 6/138 -> %s, 0/138 -> %s; profile examples %s/%s/%s, monotone %s", r1.c_str(),
                     r6.c_str(), r0.c_str(), ex1 ? "ok" : "FAIL", ex2 ? "ok" : "FAIL", ex3 ? "ok" : "FAIL",
                     mono ? "yes" : "NO");
    return out;
}

Outcome lifecycle(const std::vector<RandomQp>& suite)
{
    Outcome out;
    RandomQpGenerator gen(suite_seed + 4);
    double worst = 0.0;
    std::size_t allocations = 0;
    int compared = 0;
    for (std::size_t k = 0; k < suite.size(); k += 10) {
        const QpProblem& base = suite[k].problem;
        QpProblem changed = base;
        for (double& v : changed.P.values) v *= gen.uniform(0.9, 1.1);
        for (double& v : changed.A.values) v *= gen.uniform(0.9, 1.1);
        for (double& v : changed.G.values) v *= gen.uniform(0.9, 1.1);
        for (Index i = 0; i < changed.n(); i++) changed.c[i] += 0.1 * gen.normal();
        changed.h.array() += 0.1;
        // keep b consistent with a point where G rows stay feasible
        changed.b = to_dense(changed.A) * suite[k].x_star;
        changed.h = changed.h.cwiseMax(to_dense(changed.G) * suite[k].x_star + Vec::Constant(changed.m(), 0.1));
        if (changed.u.size() > 0) changed.u.array() += 0.5;

        Solver updated(base, Settings{});
        {
            AllocationWindow window;
            updated.solve();
            updated.update({&changed.P, &changed.c, &changed.A, &changed.b, &changed.G, &changed.h, &changed.l,
                            &changed.u});
            updated.solve();
            allocations += window.count();
        }
        Solver fresh(changed, Settings{});
        const SolveResult& a = updated.result();
        const SolveResult& b = fresh.solve();
        out.require(a.status == b.status, fmt("status differs on problem %zu", k));
        for (auto [u, v] : {std::pair{&a.iterate.x, &b.iterate.x}, std::pair{&a.iterate.y, &b.iterate.y},
                            std::pair{&a.iterate.z, &b.iterate.z}, std::pair{&a.iterate.s, &b.iterate.s}}) {
            worst = std::max(worst, inf_norm(*u - *v));
        }
        compared++;
    }
    out.require(worst <= 1e-12, "update-then-solve differs from fresh setup");
    out.require(allocations == 0, "allocations inside update/solve");
    const std::string why = out.pass ? "" : "; " + out.detail;
    out.detail = fmt("%d problems: max |update+solve - fresh setup+solve| over x,y,z,s = %.1e (<=1e-12); "
                     "heap allocations inside solve/update/solve after setup = %zu%s",
                     compared, worst, allocations, why.c_str());
    return out;
}

Outcome algorithmic(const std::vector<RandomQp>& suite)
{
    Outcome out;
    // formula-forced examples
    auto v = [](std::initializer_list<double> x) {
        Vec out(static_cast<Index>(x.size()));
        Index i = 0;
        for (double e : x) out[i++] = e;
        return out;
    };
    bool formulas = true;
    formulas = formulas && step_size(v({1, 2}), Vec::Zero(2), 0.995) == 1.0;
    formulas = formulas && std::abs(step_size(v({1, 2}), v({-1, -4}), 0.995) - 0.4975) <= 1e-15;
    formulas = formulas && step_size(v({1}), v({-0.1}), 0.995) == 1.0;
    const Centering c0 = centering_parameter(v({1, 2}), v({3, 1}), v({-1, -2}), Vec::Zero(2), 1.0, 1.0);
    const Centering c1 = centering_parameter(v({1, 2}), v({3, 1}), Vec::Zero(2), Vec::Zero(2), 1.0, 1.0);
    const Centering c2 = centering_parameter(v({1}), v({1}), v({-0.5}), v({-0.5}), 1.0, 1.0);
    formulas = formulas && c0.eta == 0.0 && c0.sigma == 0.0 && c1.eta == 1.0 && c1.sigma == 1.0;
    formulas = formulas && c2.eta == 0.25 && c2.sigma == 0.015625;
    Vec rs(1);
    corrector_rhs(v({1}), v({1}), v({-1}), v({-1}), 1.0, 0.1, rs);
    formulas = formulas && std::abs(rs[0] + 1.9) <= 1e-15;
    corrector_rhs(v({2}), v({3}), v({0}), v({0}), 0.0, 0.0, rs);
    formulas = formulas && rs[0] == -6.0;
    {
        Iterate next;
        next.x = v({1});
        next.y = v({2});
        next.z = v({3});
        next.s = v({1});
        ProximalState p{v({0}), v({0}), v({0}), 1.0, 1.0};
        update_estimates(1.0, 1.0, next, p, 1.0, 0.5, 1.0, 0.5, 1e-10, 1e-10);
        formulas = formulas && p.delta == 1.0 && p.rho == 1.0 && p.xi == next.x && p.lambda == next.y && p.nu == next.z;
        ProximalState q{v({0}), v({0}), v({0}), 1.0, 1.0};
        update_estimates(1.0, 0.4, next, q, 1.0, 0.5, 1.0, 1.0, 1e-10, 1e-10);
        formulas = formulas && std::abs(q.delta - 0.4) <= 1e-15 && std::abs(q.rho - 0.8) <= 1e-15 && q.xi == v({0});
        ProximalState f{v({0}), v({0}), v({0}), 1.5e-10, 1.5e-10};
        update_estimates(1.0, 0.0, next, f, 1.0, 0.5, 1.0, 0.5, 1e-10, 1e-10);
        formulas = formulas && f.delta == 1e-10 && f.rho == 1e-10;
    }
    {
        Vec s = v({-1, 2});
        Vec nu = v({0.5, 0.5});
        initial_shift(s, nu);
        formulas = formulas && s == v({1.5, 4.5});
    }
    out.require(formulas, "formula-forced examples");

    // interiority, fraction to boundary and Newton consistency along every suite solve
    Settings settings;
    std::size_t iterations = 0;
    std::size_t interior_violations = 0;
    std::size_t boundary_violations = 0;
    double worst_newton = 0.0;
    for (const auto& rq : suite) {
        Solver solver(rq.problem, settings);
        solver.set_callback([&](const IterationTrace& t) {
            iterations++;
            const Iterate& a = *t.before;
            const Iterate& b = *t.after;
            for (Index i = 0; i < b.s.size(); i++) {
                interior_violations += !(b.s[i] > 0.0 && b.z[i] > 0.0);
                const double slack = 1.0 - 1e-12;
                boundary_violations += !(b.s[i] >= (1.0 - settings.tau) * a.s[i] * slack &&
                                         b.z[i] >= (1.0 - settings.tau) * a.z[i] * slack);
            }
            const DenseMatrix J = dense_newton_matrix(solver.scaled_problem(), a.s, a.z, t.delta_used, t.rho_used);
            for (auto [dir, rsv] : {std::pair{t.predictor, t.rs_predictor}, std::pair{t.corrector, t.rs_corrector}}) {
                const Vec r = stack({t.rx, t.ry, t.rz, rsv});
                const Vec d = stack({&dir->dx, &dir->dy, &dir->dz, &dir->ds});
                const double rn = inf_norm(r);
                if (rn > 0.0) worst_newton = std::max(worst_newton, inf_norm(J * d - r) / rn);
            }
        });
        solver.solve();
        const Iterate& final_it = solver.result().iterate;
        if (final_it.s.size() > 0) {
            interior_violations += !(final_it.s.minCoeff() > 0.0 && final_it.z.minCoeff() > 0.0);
        }
    }
    out.require(interior_violations == 0, "non-interior iterate");
    out.require(boundary_violations == 0, "fraction-to-boundary violated");
    out.require(worst_newton <= 1e-8, "Newton residual above 1e-8 relative");
    const std::string why = out.pass ? "" : "; " + out.detail;
    out.detail = fmt("formula examples %s; %zu iterations over %d problems: s,z>0 violations %zu, fraction-to-boundary "
                     "violations %zu, max ||JΔ-r||/||r|| = %.1e (<=1e-8)%s",
                     formulas ? "ok" : "FAIL", iterations, suite_size, interior_violations, boundary_violations,
                     worst_newton, why.c_str());
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    const std::filesystem::path data = argc > 1 ? std::filesystem::path(argv[1])
                                                : std::filesystem::path(IPQP_TEST_DATA_DIR) / "maros";
    const auto suite = make_suite();

    struct Criterion
    {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"random-qp-suite", [&] { return random_suite(suite); }},
        {"degeneracy-robustness", [&] { return degeneracy(suite); }},
        {"factorization-oracle", [] { return factorization(); }},
        {"ruiz-equilibration", [] { return ruiz(); }},
        {"maros-meszaros-subset", [&] { return maros(data); }},
        {"harness-arithmetic", [] { return harness(); }},
        {"lifecycle-contract", [&] { return lifecycle(suite); }},
        {"algorithmic-properties", [&] { return algorithmic(suite); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %-24s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
