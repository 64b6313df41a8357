#include "ipqp/equilibration.hpp"

#include <algorithm>
#include <cmath>

namespace ipqp
{

namespace
{

void accumulate_norms(const SparseMatrixCsc& P, const SparseMatrixCsc& A, const SparseMatrixCsc& G,
                      StackedNorms& norms)
{
    norms.x.setZero();
    norms.y.setZero();
    norms.z.setZero();
    for (Index j = 0; j < P.ncols; j++) {
        for (Index k = P.col_ptr[j]; k < P.col_ptr[j + 1]; k++) {
            const double a = std::abs(P.values[k]);
            const Index i = P.row_idx[k];
            norms.x[j] = std::max(norms.x[j], a);
            norms.x[i] = std::max(norms.x[i], a);
        }
    }
    for (Index j = 0; j < A.ncols; j++) {
        for (Index k = A.col_ptr[j]; k < A.col_ptr[j + 1]; k++) {
            const double a = std::abs(A.values[k]);
            norms.x[j] = std::max(norms.x[j], a);
            norms.y[A.row_idx[k]] = std::max(norms.y[A.row_idx[k]], a);
        }
    }
    for (Index j = 0; j < G.ncols; j++) {
        for (Index k = G.col_ptr[j]; k < G.col_ptr[j + 1]; k++) {
            const double a = std::abs(G.values[k]);
            norms.x[j] = std::max(norms.x[j], a);
            norms.z[G.row_idx[k]] = std::max(norms.z[G.row_idx[k]], a);
        }
    }
}

bool within(const Vec& norms, double tol)
{
    for (Index i = 0; i < norms.size(); i++) {
        const double v = norms[i];
        if (v != 0.0 && (v < 1.0 - tol || v > 1.0 + tol)) return false;
    }
    return true;
}

// reciprocal square root of each norm, leaving empty rows/columns alone
void to_scaling(Vec& norms)
{
    for (Index i = 0; i < norms.size(); i++) {
        norms[i] = norms[i] > 0.0 ? 1.0 / std::sqrt(norms[i]) : 1.0;
    }
}

void scale_matrix(SparseMatrixCsc& M, const Vec& row_scale, const Vec& col_scale)
{
    for (Index j = 0; j < M.ncols; j++) {
        for (Index k = M.col_ptr[j]; k < M.col_ptr[j + 1]; k++) {
            M.values[k] *= row_scale[M.row_idx[k]] * col_scale[j];
        }
    }
}

} // namespace

Equilibration Equilibration::identity(Index n, Index p, Index m)
{
    Equilibration eq;
    eq.d_x.setOnes(n);
    eq.d_y.setOnes(p);
    eq.d_z.setOnes(m);
    eq.c_scale = 1.0;
    return eq;
}

StackedNorms stacked_norms(const SparseMatrixCsc& P_upper, const SparseMatrixCsc& A, const SparseMatrixCsc& G)
{
    StackedNorms norms;
    norms.x.setZero(P_upper.ncols);
    norms.y.setZero(A.nrows);
    norms.z.setZero(G.nrows);
    accumulate_norms(P_upper, A, G, norms);
    return norms;
}

void RuizEquilibrator::resize(Index n, Index p, Index m)
{
    m_eq = Equilibration::identity(n, p, m);
    m_norms.x.setZero(n);
    m_norms.y.setZero(p);
    m_norms.z.setZero(m);
}

void RuizEquilibrator::reset_identity()
{
    m_eq.d_x.setOnes();
    m_eq.d_y.setOnes();
    m_eq.d_z.setOnes();
    m_eq.c_scale = 1.0;
}

void RuizEquilibrator::compute_norms(const SparseMatrixCsc& P, const SparseMatrixCsc& A, const SparseMatrixCsc& G)
{
    accumulate_norms(P, A, G, m_norms);
}

Index RuizEquilibrator::scale_in_place(SparseMatrixCsc& P, Vec& c, SparseMatrixCsc& A, Vec& b, SparseMatrixCsc& G,
                                       Vec& h, Index max_iters, double tol)
{
    reset_identity();

    Index passes = 0;
    for (; passes < max_iters; passes++) {
        compute_norms(P, A, G);
        if (within(m_norms.x, tol) && within(m_norms.y, tol) && within(m_norms.z, tol)) {
            break;
        }
        to_scaling(m_norms.x);
        to_scaling(m_norms.y);
        to_scaling(m_norms.z);
        scale_matrix(P, m_norms.x, m_norms.x);
        scale_matrix(A, m_norms.y, m_norms.x);
        scale_matrix(G, m_norms.z, m_norms.x);
        m_eq.d_x.array() *= m_norms.x.array();
        m_eq.d_y.array() *= m_norms.y.array();
        m_eq.d_z.array() *= m_norms.z.array();
    }

    c.array() *= m_eq.d_x.array();
    b.array() *= m_eq.d_y.array();
    h.array() *= m_eq.d_z.array();

    // cost scaling from the mean column norm of the scaled P and the scaled linear term
    double cost_norm = c.size() > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
    if (P.ncols > 0) {
        m_norms.x.setZero();
        for (Index j = 0; j < P.ncols; j++) {
            for (Index k = P.col_ptr[j]; k < P.col_ptr[j + 1]; k++) {
                const double a = std::abs(P.values[k]);
                m_norms.x[j] = std::max(m_norms.x[j], a);
                m_norms.x[P.row_idx[k]] = std::max(m_norms.x[P.row_idx[k]], a);
            }
        }
        cost_norm = std::max(cost_norm, m_norms.x.mean());
    }
    m_eq.c_scale = 1.0 / std::max(1.0, cost_norm);
    if (m_eq.c_scale != 1.0) {
        for (double& v : P.values) v *= m_eq.c_scale;
        c *= m_eq.c_scale;
    }
    return passes;
}

std::pair<QpProblem, Equilibration> ruiz_equilibrate(const QpProblem& problem, Index max_iters, double tol)
{
    problem.validate();
    if (max_iters < 1) {
        throw std::invalid_argument("ruiz_equilibrate: max_iters must be at least 1");
    }
    QpProblem scaled = problem;
    RuizEquilibrator ruiz(problem.n(), problem.p(), problem.m());
    ruiz.scale_in_place(scaled.P, scaled.c, scaled.A, scaled.b, scaled.G, scaled.h, max_iters, tol);
    const Equilibration& eq = ruiz.equilibration();
    if (scaled.l.size() != 0) scaled.l.array() /= eq.d_x.array();
    if (scaled.u.size() != 0) scaled.u.array() /= eq.d_x.array();
    return {std::move(scaled), eq};
}

QpProblem unscale_problem(const QpProblem& scaled, const Equilibration& eq)
{
    QpProblem out = scaled;
    const Vec inv_x = eq.d_x.cwiseInverse();
    const Vec inv_y = eq.d_y.cwiseInverse();
    const Vec inv_z = eq.d_z.cwiseInverse();
    scale_matrix(out.P, inv_x, inv_x);
    for (double& v : out.P.values) v /= eq.c_scale;
    scale_matrix(out.A, inv_y, inv_x);
    scale_matrix(out.G, inv_z, inv_x);
    out.c = (out.c.array() * inv_x.array()) / eq.c_scale;
    out.b = out.b.cwiseProduct(inv_y);
    out.h = out.h.cwiseProduct(inv_z);
    if (out.l.size() != 0) out.l.array() *= eq.d_x.array();
    if (out.u.size() != 0) out.u.array() *= eq.d_x.array();
    return out;
}

void unscale_solution(const Equilibration& eq, const Iterate& scaled, Iterate& out)
{
    if (scaled.x.size() != eq.d_x.size() || scaled.y.size() != eq.d_y.size() || scaled.z.size() != eq.d_z.size() ||
        scaled.s.size() != eq.d_z.size()) {
        throw StructuralError("unscale_solution: iterate dimensions do not match the equilibration");
    }
    out.x = scaled.x.cwiseProduct(eq.d_x);
    out.s = scaled.s.cwiseQuotient(eq.d_z);
    out.y = scaled.y.cwiseProduct(eq.d_y) / eq.c_scale;
    out.z = scaled.z.cwiseProduct(eq.d_z) / eq.c_scale;
}

Iterate unscale_solution(const Equilibration& eq, const Iterate& scaled)
{
    Iterate out;
    out.resize(eq.d_x.size(), eq.d_y.size(), eq.d_z.size());
    unscale_solution(eq, scaled, out);
    return out;
}

} // namespace ipqp
