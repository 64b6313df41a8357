#include "ipqp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ipqp
{

namespace
{

std::span<const double> view(const Vec& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<double> view(Vec& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

void copy_values(const SparseMatrixCsc& from, SparseMatrixCsc& to)
{
    std::copy(from.values.begin(), from.values.end(), to.values.begin());
}

void check_matrix(const SparseMatrixCsc* M, const SparseMatrixCsc& ref, const char* name)
{
    if (M == nullptr) return;
    if (!M->same_pattern(ref)) {
        throw StructuralError(std::string("update: sparsity pattern of ") + name + " differs from setup");
    }
    if (!M->all_finite()) {
        throw StructuralError(std::string("update: ") + name + " contains non-finite entries");
    }
}

void check_vector(const Vec* v, Index expected, const char* name)
{
    if (v == nullptr) return;
    if (v->size() != expected) {
        throw StructuralError(std::string("update: ") + name + " has length " + std::to_string(v->size()) +
                              ", expected " + std::to_string(expected));
    }
    if (!v->allFinite()) {
        throw StructuralError(std::string("update: ") + name + " contains non-finite entries");
    }
}

} // namespace

void Direction::resize(Index n, Index p, Index m)
{
    dx.setZero(n);
    dy.setZero(p);
    dz.setZero(m);
    ds.setZero(m);
}

void Solver::setup(const QpProblem& problem, const Settings& settings)
{
    const auto start = clock::now();
    settings.validate();
    problem.validate();
    m_is_setup = false;
    m_settings = settings;

    m_original = problem;
    m_working = convert_box_constraints(problem);
    m_m_orig = problem.m();

    m_box_var.clear();
    m_box_sign.clear();
    for (Index i = 0; i < problem.n(); i++) {
        if (problem.u.size() != 0 && std::isfinite(problem.u[i])) {
            m_box_var.push_back(i);
            m_box_sign.push_back(1.0);
        }
        if (problem.l.size() != 0 && std::isfinite(problem.l[i])) {
            m_box_var.push_back(i);
            m_box_sign.push_back(-1.0);
        }
    }

    // original rows precede the box rows inside every column of the working G
    m_g_orig_pos.assign(static_cast<std::size_t>(problem.G.nnz()), 0);
    for (Index j = 0; j < problem.n(); j++) {
        for (Index k = problem.G.col_ptr[j]; k < problem.G.col_ptr[j + 1]; k++) {
            m_g_orig_pos[k] = m_working.G.col_ptr[j] + (k - problem.G.col_ptr[j]);
        }
    }

    const Index n = m_working.n();
    const Index p = m_working.p();
    const Index m = m_working.m();

    m_scaled = m_working;
    m_ruiz.resize(n, p, m);
    if (m_settings.equilibrate) {
        m_ruiz.scale_in_place(m_scaled.P, m_scaled.c, m_scaled.A, m_scaled.b, m_scaled.G, m_scaled.h,
                              m_settings.ruiz_iters, m_settings.ruiz_tol);
    }
    m_kkt.setup(m_scaled);
    m_kkt.set_refinement(m_settings.refine_max, m_settings.refine_tol);
    m_eval.resize(n, p, m);

    m_it.resize(n, p, m);
    m_prev.resize(n, p, m);
    m_best.resize(n, p, m);
    m_unscaled.resize(n, p, m);
    for (ProximalState* prox : {&m_prox, &m_prox_prev}) {
        prox->xi.setZero(n);
        prox->lambda.setZero(p);
        prox->nu.setZero(m);
    }
    m_pred.resize(n, p, m);
    m_corr.resize(n, p, m);

    m_px.setZero(n);
    m_aty.setZero(n);
    m_gtz.setZero(n);
    m_ax.setZero(p);
    m_gx.setZero(m);
    m_rx.setZero(n);
    m_ry.setZero(p);
    m_rz.setZero(m);
    m_rs_pred.setZero(m);
    m_rs_corr.setZero(m);
    m_w.setZero(m);

    m_result = SolveResult{};
    m_result.iterate.resize(n, p, m);

    m_is_setup = true;
    m_setup_time = std::chrono::duration<double>(clock::now() - start).count();
}

void Solver::update(const QpUpdate& values)
{
    if (!m_is_setup) {
        throw std::logic_error("update called before setup");
    }
    const Index n = m_original.n();

    // validate everything first so a failure leaves the instance untouched
    check_matrix(values.P, m_original.P, "P");
    check_matrix(values.A, m_original.A, "A");
    check_matrix(values.G, m_original.G, "G");
    check_vector(values.c, n, "c");
    check_vector(values.b, m_original.p(), "b");
    check_vector(values.h, m_m_orig, "h");

    auto check_bound = [&](const Vec* v, const Vec& ref, const char* name) {
        if (v == nullptr || (v->size() == 0 && ref.size() == 0)) return;
        if (ref.size() == 0) {
            throw StructuralError(std::string("update: ") + name + " was not given at setup");
        }
        if (v->size() != n) {
            throw StructuralError(std::string("update: ") + name + " has the wrong length");
        }
        for (Index i = 0; i < n; i++) {
            if (std::isnan((*v)[i]) || std::isfinite((*v)[i]) != std::isfinite(ref[i])) {
                throw StructuralError(std::string("update: finite entries of ") + name + " differ from setup");
            }
        }
    };
    check_bound(values.l, m_original.l, "l");
    check_bound(values.u, m_original.u, "u");
    if (values.l != nullptr || values.u != nullptr) {
        const Vec& l = values.l != nullptr ? *values.l : m_original.l;
        const Vec& u = values.u != nullptr ? *values.u : m_original.u;
        if (l.size() != 0 && u.size() != 0) {
            for (Index i = 0; i < n; i++) {
                if (l[i] > u[i]) {
                    throw StructuralError("update: bounds cross at variable " + std::to_string(i));
                }
            }
        }
    }

    const auto start = clock::now();
    if (values.P != nullptr) {
        copy_values(*values.P, m_original.P);
        copy_values(*values.P, m_working.P);
    }
    if (values.A != nullptr) {
        copy_values(*values.A, m_original.A);
        copy_values(*values.A, m_working.A);
    }
    if (values.G != nullptr) {
        copy_values(*values.G, m_original.G);
        for (Index k = 0; k < values.G->nnz(); k++) {
            m_working.G.values[m_g_orig_pos[k]] = values.G->values[k];
        }
    }
    if (values.c != nullptr) {
        m_original.c = *values.c;
        m_working.c = *values.c;
    }
    if (values.b != nullptr) {
        m_original.b = *values.b;
        m_working.b = *values.b;
    }
    if (values.h != nullptr) {
        m_original.h = *values.h;
        m_working.h.head(m_m_orig) = *values.h;
    }
    if (values.l != nullptr) m_original.l = *values.l;
    if (values.u != nullptr) m_original.u = *values.u;
    for (std::size_t r = 0; r < m_box_var.size(); r++) {
        const Index i = m_box_var[r];
        m_working.h[m_m_orig + static_cast<Index>(r)] = m_box_sign[r] > 0.0 ? m_original.u[i] : -m_original.l[i];
    }

    equilibrate_and_refresh();
    m_setup_time = std::chrono::duration<double>(clock::now() - start).count();
}

void Solver::equilibrate_and_refresh()
{
    copy_values(m_working.P, m_scaled.P);
    copy_values(m_working.A, m_scaled.A);
    copy_values(m_working.G, m_scaled.G);
    m_scaled.c = m_working.c;
    m_scaled.b = m_working.b;
    m_scaled.h = m_working.h;
    if (m_settings.equilibrate) {
        m_ruiz.scale_in_place(m_scaled.P, m_scaled.c, m_scaled.A, m_scaled.b, m_scaled.G, m_scaled.h,
                              m_settings.ruiz_iters, m_settings.ruiz_tol);
    } else {
        m_ruiz.reset_identity();
    }
    m_kkt.refresh_data(m_scaled);
}

bool Solver::initialize()
{
    m_w.setOnes();
    const KktFactorOutcome outcome =
        m_kkt.factorize(m_settings.delta0, m_settings.rho0, m_w, m_settings.reg_retry_factor, m_settings.reg_retry_max);
    m_result.factor_retries += outcome.retries;
    if (!outcome.ok()) {
        return false;
    }

    m_rx = -m_scaled.c;
    m_kkt.solve(m_rx, m_scaled.b, m_scaled.h, m_it.x, m_it.y, m_it.z);
    m_it.s = -m_it.z;
    initial_shift(m_it.s, m_it.z);

    m_prox.xi = m_it.x;
    m_prox.lambda = m_it.y;
    m_prox.nu = m_it.z;
    m_prox.delta = m_settings.delta0;
    m_prox.rho = m_settings.rho0;
    return iterate_finite(m_it);
}

void Solver::compute_residuals(const Iterate& it)
{
    multiply_symmetric_upper(m_scaled.P, view(it.x), view(m_px));
    multiply_transpose(m_scaled.A, view(it.y), view(m_aty));
    multiply_transpose(m_scaled.G, view(it.z), view(m_gtz));
    multiply(m_scaled.A, view(it.x), view(m_ax));
    multiply(m_scaled.G, view(it.x), view(m_gx));

    m_rx = -(m_px + m_scaled.c + m_prox.rho * (it.x - m_prox.xi) + m_aty + m_gtz);
    m_ry = -(m_ax + m_prox.delta * (m_prox.lambda - it.y) - m_scaled.b);
    m_rz = -(m_gx + m_prox.delta * (m_prox.nu - it.z) - m_scaled.h + it.s);
}

void Solver::primal_dual_residuals(const Iterate& it, double& p, double& d)
{
    multiply_symmetric_upper(m_scaled.P, view(it.x), view(m_px));
    multiply_transpose(m_scaled.A, view(it.y), view(m_aty));
    multiply_transpose(m_scaled.G, view(it.z), view(m_gtz));
    multiply(m_scaled.A, view(it.x), view(m_ax));
    multiply(m_scaled.G, view(it.x), view(m_gx));

    p = 0.0;
    for (Index i = 0; i < m_ax.size(); i++) {
        p = std::max(p, std::abs(m_ax[i] - m_scaled.b[i]));
    }
    for (Index i = 0; i < m_gx.size(); i++) {
        p = std::max(p, std::abs(m_gx[i] - m_scaled.h[i] + it.s[i]));
    }
    d = 0.0;
    for (Index i = 0; i < m_px.size(); i++) {
        d = std::max(d, std::abs(m_px[i] + m_scaled.c[i] + m_aty[i] + m_gtz[i]));
    }
}

bool Solver::iterate_finite(const Iterate& it) const
{
    return it.x.allFinite() && it.s.allFinite() && it.y.allFinite() && it.z.allFinite();
}

bool Solver::time_exceeded(clock::time_point start) const
{
    if (!m_settings.time_limit) return false;
    const double elapsed = m_setup_time + std::chrono::duration<double>(clock::now() - start).count();
    return elapsed >= *m_settings.time_limit;
}

void Solver::finish(Status status, const Iterate& scaled, clock::time_point start)
{
    m_result.status = status;
    unscale_solution(m_ruiz.equilibration(), scaled, m_result.iterate);
    const TerminationInfo info =
        m_eval.evaluate(m_working, m_result.iterate, m_settings.eps_abs, m_settings.eps_rel);
    m_result.primal_res = info.primal_res;
    m_result.dual_res = info.dual_res;
    m_result.duality_gap = info.gap;
    m_result.objective = info.primal_objective + m_working.objective_constant;
    m_result.setup_time = m_setup_time;
    m_result.solve_time = std::chrono::duration<double>(clock::now() - start).count();
}

const SolveResult& Solver::solve()
{
    if (!m_is_setup) {
        throw std::logic_error("solve called before setup");
    }
    const auto start = clock::now();
    m_kkt.set_refinement(m_settings.refine_max, m_settings.refine_tol);
    const Index m = m_scaled.m();
    const double tau = m_settings.tau;

    m_result.iterations = 0;
    m_result.factor_retries = 0;

    if (!initialize()) {
        finish(Status::numerical_error, m_it, start);
        return m_result;
    }
    m_best = m_it;
    double best_score = infinity;

    if (m_settings.verbose) {
        std::printf("ipqp: n = %td, p = %td, m = %td, kkt nnz = %td, L nnz = %td\n", m_scaled.n(), m_scaled.p(), m,
                    m_kkt.matrix().nnz(), m_kkt.factorization().symbolic().l_nnz());
        std::printf("%4s %12s %10s %10s %10s %9s %9s %9s\n", "iter", "objective", "p res", "d res", "gap", "delta",
                    "rho", "step");
    }

    StepInfo pred_step;
    StepInfo corr_step;
    for (Index k = 0;; k++) {
        if (time_exceeded(start)) {
            finish(Status::time_limit, m_best, start);
            return m_result;
        }

        unscale_solution(m_ruiz.equilibration(), m_it, m_unscaled);
        const TerminationInfo info = m_eval.evaluate(m_working, m_unscaled, m_settings.eps_abs, m_settings.eps_rel);
        if (m_settings.verbose) {
            std::printf("%4td %12.5e %10.3e %10.3e %10.3e %9.2e %9.2e %9.2e\n", k,
                        info.primal_objective + m_working.objective_constant, info.primal_res, info.dual_res,
                        info.gap, m_prox.delta, m_prox.rho, std::min(corr_step.alpha_p, corr_step.alpha_d));
        }
        if (info.converged) {
            finish(Status::solved, m_it, start);
            return m_result;
        }
        const double score = info.score();
        if (score < best_score || k == 0) {
            best_score = score;
            m_best = m_it;
        }
        if (k >= m_settings.max_iter) {
            finish(Status::iteration_limit, m_best, start);
            return m_result;
        }

        if (m_settings.reset_to_estimates) {
            m_it.x = m_prox.xi;
            m_it.y = m_prox.lambda;
            m_it.z = m_prox.nu;
        }
        m_prev = m_it;
        m_prox_prev = m_prox;

        double p_prev = 0.0;
        double d_prev = 0.0;
        primal_dual_residuals(m_it, p_prev, d_prev);
        compute_residuals(m_it);

        m_w.array() = m_it.s.array() / m_it.z.array();
        const KktFactorOutcome outcome = m_kkt.factorize(m_prox.delta, m_prox.rho, m_w, m_settings.reg_retry_factor,
                                                         m_settings.reg_retry_max);
        m_result.factor_retries += outcome.retries;
        if (!outcome.ok()) {
            finish(Status::numerical_error, m_best, start);
            return m_result;
        }

        // predictor
        m_rs_pred.array() = -m_it.s.array() * m_it.z.array();
        m_kkt.newton_step(m_rx, m_ry, m_rz, m_rs_pred, m_it.s, m_it.z, m_pred.dx, m_pred.dy, m_pred.dz, m_pred.ds);
        pred_step.alpha_p = step_size(m_it.s, m_pred.ds, tau);
        pred_step.alpha_d = step_size(m_it.z, m_pred.dz, tau);
        const Centering centering =
            centering_parameter(m_it.s, m_it.z, m_pred.ds, m_pred.dz, pred_step.alpha_p, pred_step.alpha_d);
        pred_step.sigma = 0.0;
        pred_step.mu = 0.0;
        pred_step.eta = centering.eta;

        // corrector, same factorization
        corrector_rhs(m_it.s, m_it.z, m_pred.ds, m_pred.dz, centering.sigma, centering.mu, m_rs_corr);
        m_kkt.newton_step(m_rx, m_ry, m_rz, m_rs_corr, m_it.s, m_it.z, m_corr.dx, m_corr.dy, m_corr.dz, m_corr.ds);
        corr_step.alpha_p = step_size(m_it.s, m_corr.ds, tau);
        corr_step.alpha_d = step_size(m_it.z, m_corr.dz, tau);
        corr_step.sigma = centering.sigma;
        corr_step.mu = centering.mu;
        corr_step.eta = centering.eta;

        m_it.x += corr_step.alpha_p * m_corr.dx;
        m_it.s += corr_step.alpha_p * m_corr.ds;
        m_it.y += corr_step.alpha_d * m_corr.dy;
        m_it.z += corr_step.alpha_d * m_corr.dz;
        m_result.iterations = k + 1;

        if (!iterate_finite(m_it)) {
            finish(Status::numerical_error, m_best, start);
            return m_result;
        }

        double p_next = 0.0;
        double d_next = 0.0;
        primal_dual_residuals(m_it, p_next, d_next);
        const double sz_prev = m > 0 ? m_prev.s.dot(m_prev.z) : 0.0;
        const double sz_next = m > 0 ? m_it.s.dot(m_it.z) : 0.0;
        update_estimates(sz_prev, sz_next, m_it, m_prox, p_prev, p_next, d_prev, d_next, m_settings.delta_min,
                         m_settings.rho_min);

        if (m_callback) {
            IterationTrace trace;
            trace.iteration = k;
            trace.before = &m_prev;
            trace.after = &m_it;
            trace.prox = &m_prox_prev;
            trace.delta_used = outcome.delta_used;
            trace.rho_used = outcome.rho_used;
            trace.retries = outcome.retries;
            trace.rx = &m_rx;
            trace.ry = &m_ry;
            trace.rz = &m_rz;
            trace.rs_predictor = &m_rs_pred;
            trace.rs_corrector = &m_rs_corr;
            trace.predictor = &m_pred;
            trace.corrector = &m_corr;
            trace.predictor_step = pred_step;
            trace.corrector_step = corr_step;
            unscale_solution(m_ruiz.equilibration(), m_it, m_unscaled);
            trace.termination = m_eval.evaluate(m_working, m_unscaled, m_settings.eps_abs, m_settings.eps_rel);
            m_callback(trace);
        }
    }
}

} // namespace ipqp
