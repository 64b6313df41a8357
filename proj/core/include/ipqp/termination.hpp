#ifndef IPQP_TERMINATION_HPP
#define IPQP_TERMINATION_HPP

#include "ipqp/problem.hpp"

namespace ipqp
{

struct TerminationInfo
{
    bool converged = false;
    double primal_res = 0.0; // ‖[Ax - b; Gx - h + s]‖∞
    double dual_res = 0.0;   // ‖Px + Aᵀy + Gᵀz + c‖∞
    double gap = 0.0;        // |xᵀPx + cᵀx + bᵀy + hᵀz|
    double primal_tol = 0.0;
    double dual_tol = 0.0;
    double gap_tol = 0.0;
    double primal_objective = 0.0; // ½xᵀPx + cᵀx, without the constant

    /// max of residual/tolerance over the three criteria; ≤ 1 means converged.
    double score() const;
};

/// Evaluates the primal, dual and gap criteria with preallocated workspace.
class ResidualEvaluator
{
public:
    ResidualEvaluator() = default;
    ResidualEvaluator(Index n, Index p, Index m) { resize(n, p, m); }

    void resize(Index n, Index p, Index m);

    /// `problem` must not carry box bounds (they are expected as rows of G).
    TerminationInfo evaluate(const QpProblem& problem, const Iterate& iterate, double eps_abs, double eps_rel);

private:
    Vec m_px;
    Vec m_aty;
    Vec m_gtz;
    Vec m_ax;
    Vec m_gx;
};

/// Appends box bounds to (G, h): per variable, x_i ≤ u_i then -x_i ≤ -l_i,
/// skipping infinite bounds. The result has empty l and u.
QpProblem convert_box_constraints(const QpProblem& problem);

/// Stand-alone check on the original data; box bounds are converted first, so
/// s and z must cover the appended rows.
TerminationInfo check_termination(const QpProblem& problem, const Iterate& iterate, const Settings& settings);

} // namespace ipqp

#endif // IPQP_TERMINATION_HPP
