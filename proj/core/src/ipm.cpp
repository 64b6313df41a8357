#include "ipqp/ipm.hpp"

#include <algorithm>
#include <cmath>

namespace ipqp
{

double step_size(const CVecRef& v, const CVecRef& dv, double tau)
{
    double ratio = infinity;
    for (Index i = 0; i < v.size(); i++) {
        if (dv[i] < 0.0) {
            ratio = std::min(ratio, v[i] / -dv[i]);
        }
    }
    if (ratio == infinity) {
        return 1.0;
    }
    return std::min(1.0, tau * ratio);
}

Centering centering_parameter(const CVecRef& s, const CVecRef& z, const CVecRef& ds_aff, const CVecRef& dz_aff,
                              double alpha_p, double alpha_d)
{
    Centering out;
    const Index m = s.size();
    if (m == 0) {
        return out;
    }
    out.mu = s.dot(z) / static_cast<double>(m);
    double affine = 0.0;
    for (Index i = 0; i < m; i++) {
        affine += (s[i] + alpha_p * ds_aff[i]) * (z[i] + alpha_d * dz_aff[i]);
    }
    affine /= static_cast<double>(m);
    out.eta = out.mu > 0.0 ? affine / out.mu : 0.0;
    const double clamped = std::max(0.0, std::min(1.0, out.eta));
    out.sigma = clamped * clamped * clamped;
    return out;
}

void corrector_rhs(const CVecRef& s, const CVecRef& z, const CVecRef& ds_aff, const CVecRef& dz_aff, double sigma,
                   double mu, VecRef rs)
{
    rs.array() = -s.array() * z.array() - ds_aff.array() * dz_aff.array() + sigma * mu;
}

double complementarity_reduction(double sz_prev, double sz_next)
{
    if (!(sz_prev > 0.0)) {
        return 0.0;
    }
    const double r = std::abs(sz_prev - sz_next) / sz_prev;
    return std::clamp(r, 0.0, 0.9);
}

EstimateUpdate update_estimates(double sz_prev, double sz_next, const Iterate& next, ProximalState& prox,
                                double p_prev, double p_next, double d_prev, double d_next, double delta_min,
                                double rho_min)
{
    EstimateUpdate info;
    info.r = complementarity_reduction(sz_prev, sz_next);

    info.primal_improved = p_next <= 0.95 * p_prev;
    if (info.primal_improved) {
        prox.lambda = next.y;
        prox.nu = next.z;
        prox.delta *= 1.0 - info.r;
    } else {
        prox.delta *= 1.0 - info.r / 3.0;
    }

    info.dual_improved = d_next <= 0.95 * d_prev;
    if (info.dual_improved) {
        prox.xi = next.x;
        prox.rho *= 1.0 - info.r;
    } else {
        prox.rho *= 1.0 - info.r / 3.0;
    }

    prox.delta = std::max(prox.delta, delta_min);
    prox.rho = std::max(prox.rho, rho_min);
    return info;
}

void initial_shift(VecRef s, VecRef nu)
{
    if (s.size() == 0) {
        return;
    }
    const double ds_tilde = std::max(0.0, -1.5 * s.minCoeff());
    const double dnu_tilde = std::max(0.0, -1.5 * nu.minCoeff());

    double complementarity = 0.0;
    double s_sum = 0.0;
    double nu_sum = 0.0;
    for (Index i = 0; i < s.size(); i++) {
        const double si = s[i] + ds_tilde;
        const double ni = nu[i] + dnu_tilde;
        complementarity += si * ni;
        s_sum += si;
        nu_sum += ni;
    }

    if (!(complementarity > 0.0) || !(s_sum > 0.0) || !(nu_sum > 0.0)) {
        // s̃ = ν̃ = 0: nothing to normalize against
        s.array() += ds_tilde + 1.0;
        nu.array() += dnu_tilde + 1.0;
        return;
    }
    s.array() += ds_tilde + 0.5 * complementarity / nu_sum;
    nu.array() += dnu_tilde + 0.5 * complementarity / s_sum;
}

} // namespace ipqp
