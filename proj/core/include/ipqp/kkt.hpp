#ifndef IPQP_KKT_HPP
#define IPQP_KKT_HPP

#include <cstdint>
#include <vector>

#include "ipqp/ipm.hpp"
#include "ipqp/ldl.hpp"
#include "ipqp/problem.hpp"

namespace ipqp
{

struct KktFactorOutcome
{
    FactorResult result;
    Index retries = 0;
    double delta_used = 0.0; // regularization actually present in the factored matrix
    double rho_used = 0.0;

    bool ok() const { return result.ok(); }
};

/// Reduced (slack-eliminated) Newton system
///
///   [ P + ρI   Aᵀ     Gᵀ        ]
///   [ A       -δI     0         ]
///   [ G        0    -(W + δI)   ]
///
/// stored as an upper triangle whose pattern, ordering and symbolic
/// factorization are fixed at setup.
class KktSystem
{
public:
    KktSystem() = default;

    /// Builds the pattern and the symbolic factorization; `data` has no box bounds.
    void setup(const QpProblem& data);

    /// Rewrites the P, A and G values (same patterns as at setup).
    void refresh_data(const QpProblem& data);

    /// Writes the diagonal blocks and factorizes. On a quasi-definite failure
    /// the δ and ρ of the matrix (not of the caller) are multiplied by
    /// `retry_factor`, at most `max_retries` times.
    KktFactorOutcome factorize(double delta, double rho, const CVecRef& w, double retry_factor, Index max_retries);

    /// Iterative refinement of every solve against the factored matrix: at
    /// most `max_steps` corrections, stopping once the componentwise backward
    /// error max_i |r - KΔ|_i / (|K||Δ| + |r|)_i drops to `tol` or stalls.
    void set_refinement(Index max_steps, double tol);

    /// Solves the reduced system for (Δx, Δy, Δz).
    void solve(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, VecRef dx, VecRef dy, VecRef dz);

    /// Full Newton step: with r̄z = rz - Z⁻¹rs solves the reduced system and
    /// recovers Δs = Z⁻¹(rs - SΔz), then refines against the unreduced system
    ///
    ///   (P + ρI)Δx + AᵀΔy + GᵀΔz = rx,   AΔx - δΔy = ry,
    ///   GΔx - δΔz + Δs = rz,             SΔz + ZΔs = rs.
    void newton_step(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, const CVecRef& rs, const CVecRef& s,
                     const CVecRef& z, VecRef dx, VecRef dy, VecRef dz, VecRef ds);

    const SparseMatrixCsc& matrix() const { return m_kkt; }
    const LdlFactorization& factorization() const { return m_ldl; }
    Index dim() const { return m_n + m_p + m_m; }

private:
    double residual(); // m_res = m_rhs - K m_sol, returns the componentwise backward error
    // unreduced residual into (m_res, m_res_s), returns its max-norm
    double newton_residual(const CVecRef& rx, const CVecRef& ry, const CVecRef& rz, const CVecRef& rs,
                           const CVecRef& s, const CVecRef& z, const CVecRef& dx, const CVecRef& dy,
                           const CVecRef& dz, const CVecRef& ds);
    void write_diagonal(double delta, double rho, const CVecRef& w);

    Index m_n = 0;
    Index m_p = 0;
    Index m_m = 0;

    SparseMatrixCsc m_kkt;
    std::vector<Index> m_p_pos;   // KKT position of each P entry
    std::vector<Index> m_a_pos;   // KKT position of each A entry
    std::vector<Index> m_g_pos;   // KKT position of each G entry
    std::vector<Index> m_diag_pos;
    std::vector<double> m_p_diag; // diagonal of P, zero where not stored
    std::vector<std::int8_t> m_signs;

    LdlFactorization m_ldl;
    std::vector<double> m_rhs;
    std::vector<double> m_work;
    std::vector<double> m_sol;
    std::vector<double> m_res;
    std::vector<double> m_corr;
    std::vector<double> m_scale;
    std::vector<double> m_dir;
    double m_delta = 0.0; // δ of the last factorization
    Vec m_res_s;
    Vec m_cs;
    Index m_refine_steps = 30;
    double m_refine_tol = 1e-12;
};

} // namespace ipqp

#endif // IPQP_KKT_HPP
