#include "ipqp/termination.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

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

double inf_norm(const Vec& v)
{
    return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

} // namespace

double TerminationInfo::score() const
{
    return std::max({primal_res / primal_tol, dual_res / dual_tol, gap / gap_tol});
}

void ResidualEvaluator::resize(Index n, Index p, Index m)
{
    m_px.setZero(n);
    m_aty.setZero(n);
    m_gtz.setZero(n);
    m_ax.setZero(p);
    m_gx.setZero(m);
}

TerminationInfo ResidualEvaluator::evaluate(const QpProblem& problem, const Iterate& it, double eps_abs,
                                            double eps_rel)
{
    multiply_symmetric_upper(problem.P, view(it.x), view(m_px));
    multiply_transpose(problem.A, view(it.y), view(m_aty));
    multiply_transpose(problem.G, view(it.z), view(m_gtz));
    multiply(problem.A, view(it.x), view(m_ax));
    multiply(problem.G, view(it.x), view(m_gx));

    TerminationInfo info;

    double primal = 0.0;
    for (Index i = 0; i < m_ax.size(); i++) {
        primal = std::max(primal, std::abs(m_ax[i] - problem.b[i]));
    }
    for (Index i = 0; i < m_gx.size(); i++) {
        primal = std::max(primal, std::abs(m_gx[i] - problem.h[i] + it.s[i]));
    }
    info.primal_res = primal;
    info.primal_tol = eps_abs + eps_rel * std::max({inf_norm(m_ax), inf_norm(problem.b), inf_norm(m_gx),
                                                    inf_norm(problem.h), inf_norm(it.s)});

    double dual = 0.0;
    for (Index i = 0; i < m_px.size(); i++) {
        dual = std::max(dual, std::abs(m_px[i] + m_aty[i] + m_gtz[i] + problem.c[i]));
    }
    info.dual_res = dual;
    info.dual_tol =
        eps_abs + eps_rel * std::max({inf_norm(m_px), inf_norm(m_aty), inf_norm(m_gtz), inf_norm(problem.c)});

    const double xpx = it.x.dot(m_px);
    const double cx = problem.c.dot(it.x);
    const double by = problem.b.dot(it.y);
    const double hz = problem.h.dot(it.z);
    info.gap = std::abs(xpx + cx + by + hz);
    info.gap_tol = eps_abs + eps_rel * std::max({std::abs(xpx), std::abs(cx), std::abs(by), std::abs(hz)});
    info.primal_objective = 0.5 * xpx + cx;

    info.converged = info.primal_res <= info.primal_tol && info.dual_res <= info.dual_tol && info.gap <= info.gap_tol;
    return info;
}

QpProblem convert_box_constraints(const QpProblem& problem)
{
    QpProblem out = problem;
    out.l.resize(0);
    out.u.resize(0);
    const Index n = problem.n();
    const bool has_l = problem.l.size() != 0;
    const bool has_u = problem.u.size() != 0;
    if (!has_l && !has_u) {
        return out;
    }

    std::vector<Triplet> entries;
    std::vector<double> rhs(problem.h.data(), problem.h.data() + problem.h.size());
    for (Index j = 0; j < problem.G.ncols; j++) {
        for (Index k = problem.G.col_ptr[j]; k < problem.G.col_ptr[j + 1]; k++) {
            entries.push_back({problem.G.row_idx[k], j, problem.G.values[k]});
        }
    }
    Index row = problem.m();
    for (Index i = 0; i < n; i++) {
        if (has_u && std::isfinite(problem.u[i])) {
            entries.push_back({row++, i, 1.0});
            rhs.push_back(problem.u[i]);
        }
        if (has_l && std::isfinite(problem.l[i])) {
            entries.push_back({row++, i, -1.0});
            rhs.push_back(-problem.l[i]);
        }
    }
    out.G = SparseMatrixCsc::from_triplets(row, n, entries);
    out.h = Eigen::Map<const Vec>(rhs.data(), static_cast<Index>(rhs.size()));
    return out;
}

TerminationInfo check_termination(const QpProblem& problem, const Iterate& iterate, const Settings& settings)
{
    const QpProblem data = convert_box_constraints(problem);
    if (iterate.x.size() != data.n() || iterate.y.size() != data.p() || iterate.z.size() != data.m() ||
        iterate.s.size() != data.m()) {
        throw StructuralError("check_termination: iterate dimensions do not match the problem");
    }
    ResidualEvaluator eval(data.n(), data.p(), data.m());
    return eval.evaluate(data, iterate, settings.eps_abs, settings.eps_rel);
}

} // namespace ipqp
