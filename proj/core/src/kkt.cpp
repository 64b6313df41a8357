#include "ipqp/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ipqp/ordering.hpp"

namespace ipqp
{

namespace
{

double inf_norm(const CVecRef& v)
{
    return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

} // namespace

void KktSystem::setup(const QpProblem& data)
{
    m_n = data.n();
    m_p = data.p();
    m_m = data.m();
    const Index dim = m_n + m_p + m_m;

    m_kkt = SparseMatrixCsc(dim, dim);
    m_p_pos.assign(static_cast<std::size_t>(data.P.nnz()), -1);
    m_a_pos.assign(static_cast<std::size_t>(data.A.nnz()), -1);
    m_g_pos.assign(static_cast<std::size_t>(data.G.nnz()), -1);
    m_diag_pos.assign(static_cast<std::size_t>(dim), -1);
    m_p_diag.assign(static_cast<std::size_t>(m_n), 0.0);

    auto push = [&](Index row) {
        m_kkt.row_idx.push_back(row);
        m_kkt.values.push_back(0.0);
        return m_kkt.nnz() - 1;
    };

    for (Index j = 0; j < m_n; j++) {
        bool has_diag = false;
        for (Index k = data.P.col_ptr[j]; k < data.P.col_ptr[j + 1]; k++) {
            const Index pos = push(data.P.row_idx[k]);
            m_p_pos[k] = pos;
            if (data.P.row_idx[k] == j) {
                m_diag_pos[j] = pos;
                has_diag = true;
            }
        }
        if (!has_diag) {
            m_diag_pos[j] = push(j);
        }
        m_kkt.col_ptr[j + 1] = m_kkt.nnz();
    }

    // columns of the constraint blocks are the rows of A and G
    auto append_rows = [&](const SparseMatrixCsc& M, Index offset, std::vector<Index>& positions) {
        std::vector<std::vector<std::pair<Index, Index>>> rows(static_cast<std::size_t>(M.nrows));
        for (Index j = 0; j < M.ncols; j++) {
            for (Index k = M.col_ptr[j]; k < M.col_ptr[j + 1]; k++) {
                rows[M.row_idx[k]].emplace_back(j, k);
            }
        }
        for (Index i = 0; i < M.nrows; i++) {
            for (const auto& [col, k] : rows[i]) {
                positions[k] = push(col);
            }
            m_diag_pos[offset + i] = push(offset + i);
            m_kkt.col_ptr[offset + i + 1] = m_kkt.nnz();
        }
    };
    append_rows(data.A, m_n, m_a_pos);
    append_rows(data.G, m_n + m_p, m_g_pos);

    m_signs.assign(static_cast<std::size_t>(dim), -1);
    std::fill(m_signs.begin(), m_signs.begin() + m_n, std::int8_t{1});

    const std::vector<Index> perm = amd_ordering(m_kkt);
    m_ldl = LdlFactorization(symbolic_factorize(m_kkt, perm));
    m_rhs.assign(static_cast<std::size_t>(dim), 0.0);
    m_work.assign(static_cast<std::size_t>(dim), 0.0);
    m_sol.assign(static_cast<std::size_t>(dim), 0.0);
    m_res.assign(static_cast<std::size_t>(dim), 0.0);
    m_corr.assign(static_cast<std::size_t>(dim), 0.0);
    m_scale.assign(static_cast<std::size_t>(dim), 0.0);
    m_dir.assign(static_cast<std::size_t>(dim), 0.0);
    m_res_s.setZero(m_m);
    m_cs.setZero(m_m);

    refresh_data(data);
}

void KktSystem::refresh_data(const QpProblem& data)
{
    for (Index k = 0; k < data.P.nnz(); k++) {
        m_kkt.values[m_p_pos[k]] = data.P.values[k];
    }
    std::fill(m_p_diag.begin(), m_p_diag.end(), 0.0);
    for (Index j = 0; j < m_n; j++) {
        for (Index k = data.P.col_ptr[j]; k < data.P.col_ptr[j + 1]; k++) {
            if (data.P.row_idx[k] == j) {
                m_p_diag[j] = data.P.values[k];
            }
        }
    }
    for (Index k = 0; k < data.A.nnz(); k++) {
        m_kkt.values[m_a_pos[k]] = data.A.values[k];
    }
    for (Index k = 0; k < data.G.nnz(); k++) {
        m_kkt.values[m_g_pos[k]] = data.G.values[k];
    }
}

void KktSystem::write_diagonal(double delta, double rho, const CVecRef& w)
{
    for (Index j = 0; j < m_n; j++) {
        m_kkt.values[m_diag_pos[j]] = m_p_diag[j] + rho;
    }
    for (Index i = 0; i < m_p; i++) {
        m_kkt.values[m_diag_pos[m_n + i]] = -delta;
    }
    for (Index i = 0; i < m_m; i++) {
        m_kkt.values[m_diag_pos[m_n + m_p + i]] = -(w[i] + delta);
    }
    m_delta = delta;
}

KktFactorOutcome KktSystem::factorize(double delta, double rho, const CVecRef& w, double retry_factor,
                                      Index max_retries)
{
    KktFactorOutcome out;
    out.delta_used = delta;
    out.rho_used = rho;
    for (;;) {
        write_diagonal(out.delta_used, out.rho_used, w);
        out.result = m_ldl.factorize(m_kkt, m_signs);
        if (out.result.status != FactorStatus::quasi_definite_failure || out.retries >= max_retries) {
            return out;
        }
        out.retries++;
        out.delta_used *= retry_factor;
        out.rho_used *= retry_factor;
    }
}

void KktSystem::set_refinement(Index max_steps, double tol)
{
    m_refine_steps = std::max<Index>(0, max_steps);
    m_refine_tol = tol;
}

double KktSystem::residual()
{
    std::copy(m_rhs.begin(), m_rhs.end(), m_res.begin());
    multiply_symmetric_upper(m_kkt, m_sol, m_res, -1.0, 1.0);

    // componentwise backward error max_i |r_i| / (|K||x| + |b|)_i
    for (Index i = 0; i < dim(); i++) m_scale[i] = std::abs(m_rhs[i]);
    for (Index j = 0; j < m_kkt.ncols; j++) {
        for (Index k = m_kkt.col_ptr[j]; k < m_kkt.col_ptr[j + 1]; k++) {
            const Index i = m_kkt.row_idx[k];
            const double a = std::abs(m_kkt.values[k]);
            m_scale[i] += a * std::abs(m_sol[j]);
            if (i != j) m_scale[j] += a * std::abs(m_sol[i]);
        }
    }
    double err = 0.0;
    for (Index i = 0; i < dim(); i++) {
        if (m_scale[i] > 0.0) {
            err = std::max(err, std::abs(m_res[i]) / m_scale[i]);
        } else if (m_res[i] != 0.0) {
            return infinity;
        }
    }
    return err;
}

void KktSystem::solve(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, VecRef dx, VecRef dy, VecRef dz)
{
    Eigen::Map<Vec> rhs(m_rhs.data(), dim());
    Eigen::Map<Vec> sol(m_sol.data(), dim());
    Eigen::Map<Vec> corr(m_corr.data(), dim());
    rhs.head(m_n) = rx;
    rhs.segment(m_n, m_p) = ry;
    rhs.tail(m_m) = rz;
    sol = rhs;
    m_ldl.solve_in_place(m_sol, m_work);

    if (m_refine_steps > 0) {
        double res_norm = residual();
        for (Index k = 0; k < m_refine_steps && res_norm > m_refine_tol; k++) {
            std::copy(m_res.begin(), m_res.end(), m_corr.begin());
            m_ldl.solve_in_place(m_corr, m_work);
            sol += corr;
            const double next = residual();
            if (!(next < res_norm)) {
                sol -= corr; // stalled
                break;
            }
            res_norm = next;
        }
    }
    dx = sol.head(m_n);
    dy = sol.segment(m_n, m_p);
    dz = sol.tail(m_m);
}

double KktSystem::newton_residual(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, const CVecRef& rs,
                                  const CVecRef& s, const CVecRef& z, const CVecRef& dx, const CVecRef& dy,
                                  const CVecRef& dz, const CVecRef& ds)
{
    // reduced rows give P̃dx + Aᵀdy + Gᵀdz, Adx - δdy and Gdx - (W + δ)dz
    Eigen::Map<Vec> dir(m_dir.data(), dim());
    Eigen::Map<Vec> res(m_res.data(), dim());
    dir.head(m_n) = dx;
    dir.segment(m_n, m_p) = dy;
    dir.tail(m_m) = dz;
    res.head(m_n) = rx;
    res.segment(m_n, m_p) = ry;
    res.tail(m_m) = rz;
    // K with -δ instead of -(W + δ) on the z diagonal; going through W and
    // adding it back cancels catastrophically once W is large
    const Index z0 = m_n + m_p;
    for (Index j = 0; j < m_kkt.ncols; j++) {
        for (Index k = m_kkt.col_ptr[j]; k < m_kkt.col_ptr[j + 1]; k++) {
            const Index i = m_kkt.row_idx[k];
            if (i == j) {
                m_res[j] -= (j >= z0 ? -m_delta : m_kkt.values[k]) * m_dir[j];
            } else {
                m_res[i] -= m_kkt.values[k] * m_dir[j];
                m_res[j] -= m_kkt.values[k] * m_dir[i];
            }
        }
    }
    res.tail(m_m) -= ds;
    m_res_s.array() = rs.array() - s.array() * dz.array() - z.array() * ds.array();
    double err = dim() > 0 ? res.lpNorm<Eigen::Infinity>() : 0.0;
    if (m_m > 0) err = std::max(err, m_res_s.lpNorm<Eigen::Infinity>());
    return err;
}

void KktSystem::newton_step(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, const CVecRef& rs,
                            const CVecRef& s, const CVecRef& z, VecRef dx, VecRef dy, VecRef dz, VecRef ds)
{
    Eigen::Map<Vec> rhs(m_rhs.data(), dim());
    Eigen::Map<Vec> sol(m_sol.data(), dim());
    Eigen::Map<const Vec> res(m_res.data(), dim());

    rhs.head(m_n) = rx;
    rhs.segment(m_n, m_p) = ry;
    rhs.tail(m_m) = rz.array() - rs.array() / z.array();
    sol = rhs;
    m_ldl.solve_in_place(m_sol, m_work);
    dx = sol.head(m_n);
    dy = sol.segment(m_n, m_p);
    dz = sol.tail(m_m);
    ds.array() = (rs.array() - s.array() * dz.array()) / z.array();
    if (m_refine_steps == 0) {
        return;
    }

    // Refine against the full (unreduced) system. The reduced right-hand side
    // carries rs/z, which is huge next to r once W spreads over many decades,
    // so a small reduced residual alone says little about the full one.
    double r_norm = dim() > 0 ? std::max({inf_norm(rx), inf_norm(ry), inf_norm(rz)}) : 0.0;
    r_norm = std::max(r_norm, inf_norm(rs));
    double err = newton_residual(rx, ry, rz, rs, s, z, dx, dy, dz, ds);
    for (Index k = 0; k < m_refine_steps && err > m_refine_tol * r_norm; k++) {
        rhs = res;
        rhs.tail(m_m).array() -= m_res_s.array() / z.array();
        sol = rhs;
        m_ldl.solve_in_place(m_sol, m_work);
        m_cs.array() = (m_res_s.array() - s.array() * sol.tail(m_m).array()) / z.array();
        dx += sol.head(m_n);
        dy += sol.segment(m_n, m_p);
        dz += sol.tail(m_m);
        ds += m_cs;
        const double next = newton_residual(rx, ry, rz, rs, s, z, dx, dy, dz, ds);
        if (!(next < err)) {
            // stalled: keep the previous direction
            dx -= sol.head(m_n);
            dy -= sol.segment(m_n, m_p);
            dz -= sol.tail(m_m);
            ds -= m_cs;
            break;
        }
        err = next;
    }
}

} // namespace ipqp
