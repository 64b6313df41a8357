#ifndef IPQP_PROBLEM_HPP
#define IPQP_PROBLEM_HPP

#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "ipqp/sparse.hpp"

namespace ipqp
{

using Vec = Eigen::VectorXd;

constexpr double infinity = std::numeric_limits<double>::infinity();

/// min ½ xᵀPx + cᵀx  s.t.  Ax = b,  Gx ≤ h,  l ≤ x ≤ u.
///
/// P holds the upper triangle. Empty `l`/`u` mean no bound of that kind;
/// individual entries may be ±infinity.
struct QpProblem
{
    SparseMatrixCsc P;
    Vec c;
    SparseMatrixCsc A;
    Vec b;
    SparseMatrixCsc G;
    Vec h;
    Vec l;
    Vec u;
    double objective_constant = 0.0; // reported with the objective, never part of the gap

    Index n() const { return P.ncols; }
    Index p() const { return A.nrows; }
    Index m() const { return G.nrows; }

    /// Throws StructuralError on inconsistent dimensions, malformed matrices,
    /// non-finite data or l > u.
    void validate() const;

    double objective(const Vec& x) const;
};

/// Builds an empty (0 x n) constraint block, handy for unconstrained problems.
SparseMatrixCsc empty_rows(Index n);

struct Settings
{
    double eps_abs = 1e-8;
    double eps_rel = 1e-9;
    Index max_iter = 250;
    double tau = 0.995;
    double delta0 = 1e-4;
    double rho0 = 1e-6;
    double delta_min = 1e-10;
    double rho_min = 1e-10;
    double reg_retry_factor = 100.0;
    Index reg_retry_max = 10;
    Index refine_max = 30;   // iterative refinement steps per KKT solve
    double refine_tol = 1e-12; // relative residual target of the refinement
    // start every iteration from the proximal estimates, (x, y, z) = (ξ, λ, ν)
    bool reset_to_estimates = true;
    bool equilibrate = true;
    Index ruiz_iters = 10;
    double ruiz_tol = 1e-3;
    std::optional<double> time_limit; // seconds, covering setup and solve
    bool verbose = false;

    static Settings low_accuracy();
    void validate() const;
};

struct Iterate
{
    Vec x;
    Vec s;
    Vec y;
    Vec z;

    void resize(Index n, Index p, Index m);
};

struct ProximalState
{
    Vec xi;
    Vec lambda;
    Vec nu;
    double delta = 0.0;
    double rho = 0.0;
};

struct StepInfo
{
    double alpha_p = 0.0;
    double alpha_d = 0.0;
    double sigma = 0.0;
    double mu = 0.0;
    double eta = 0.0;
};

enum class Status
{
    solved,
    iteration_limit,
    time_limit,
    numerical_error,
};

const char* to_string(Status status);
std::optional<Status> status_from_string(const std::string& name);

struct SolveResult
{
    Status status = Status::numerical_error;
    Iterate iterate;
    double primal_res = 0.0;
    double dual_res = 0.0;
    double duality_gap = 0.0;
    double objective = 0.0;
    Index iterations = 0;
    Index factor_retries = 0;
    double setup_time = 0.0;
    double solve_time = 0.0;
};

} // namespace ipqp

#endif // IPQP_PROBLEM_HPP
