#ifndef IPQP_IPM_HPP
#define IPQP_IPM_HPP

#include <Eigen/Core>

#include "ipqp/problem.hpp"

namespace ipqp
{

using CVecRef = Eigen::Ref<const Vec>;
using VecRef = Eigen::Ref<Vec>;

/// Largest α in [0, 1] with v + α dv ≥ (1 - τ) v, i.e. min(1, τ min_{dv_i<0} v_i / -dv_i).
double step_size(const CVecRef& v, const CVecRef& dv, double tau);

struct Centering
{
    double sigma = 0.0;
    double mu = 0.0;
    double eta = 0.0;
};

/// μ = sᵀz / m and Mehrotra's σ = clamp(η, 0, 1)³ where η is the ratio of the
/// mean complementarity after the affine step to μ. Empty vectors give all zeros.
Centering centering_parameter(const CVecRef& s, const CVecRef& z, const CVecRef& ds_aff, const CVecRef& dz_aff,
                              double alpha_p, double alpha_d);

/// rs = -s∘z - Δsᵃ∘Δzᵃ + σμ.
void corrector_rhs(const CVecRef& s, const CVecRef& z, const CVecRef& ds_aff, const CVecRef& dz_aff, double sigma,
                   double mu, VecRef rs);

/// r = |s_kᵀz_k - s_{k+1}ᵀz_{k+1}| / s_kᵀz_k clamped to [0, 0.9]; 0 when s_kᵀz_k ≤ 0.
double complementarity_reduction(double sz_prev, double sz_next);

struct EstimateUpdate
{
    double r = 0.0;
    bool primal_improved = false;
    bool dual_improved = false;
};

/// Penalty and estimate update. `next` is the freshly stepped iterate;
/// `p_*`/`d_*` are the primal/dual residual norms before and after the step.
EstimateUpdate update_estimates(double sz_prev, double sz_next, const Iterate& next, ProximalState& prox,
                                double p_prev, double p_next, double d_prev, double d_next, double delta_min,
                                double rho_min);

/// Moves (s̃, ν̃) of the initial linear solve into the positive orthant with
/// the 1.5·min shift followed by the normalized complementarity shift.
void initial_shift(VecRef s, VecRef nu);

} // namespace ipqp

#endif // IPQP_IPM_HPP
