#ifndef IPQP_EQUILIBRATION_HPP
#define IPQP_EQUILIBRATION_HPP

#include <utility>

#include "ipqp/problem.hpp"

namespace ipqp
{

/// Diagonal scaling of the problem data.
///
///   P -> c_scale * Dx P Dx,  c -> c_scale * Dx c
///   A -> Dy A Dx,            b -> Dy b
///   G -> Dz G Dx,            h -> Dz h
struct Equilibration
{
    Vec d_x;
    Vec d_y;
    Vec d_z;
    double c_scale = 1.0;

    static Equilibration identity(Index n, Index p, Index m);
};

/// Infinity norms of the rows/columns of the stacked matrix [P Aᵀ Gᵀ; A 0 0; G 0 0].
struct StackedNorms
{
    Vec x;
    Vec y;
    Vec z;
};

StackedNorms stacked_norms(const SparseMatrixCsc& P_upper, const SparseMatrixCsc& A, const SparseMatrixCsc& G);

/// Ruiz equilibration that runs in place on preallocated data; reusable
/// across updates without further allocation.
class RuizEquilibrator
{
public:
    RuizEquilibrator() = default;
    RuizEquilibrator(Index n, Index p, Index m) { resize(n, p, m); }

    void resize(Index n, Index p, Index m);

    /// Scales (P, c, A, b, G, h) in place and returns the number of passes run.
    /// Stops early once every nonzero stacked norm lies in [1 - tol, 1 + tol].
    Index scale_in_place(SparseMatrixCsc& P, Vec& c, SparseMatrixCsc& A, Vec& b, SparseMatrixCsc& G, Vec& h,
                         Index max_iters, double tol);

    /// Resets the scaling to identity without touching any data.
    void reset_identity();

    const Equilibration& equilibration() const { return m_eq; }

private:
    void compute_norms(const SparseMatrixCsc& P, const SparseMatrixCsc& A, const SparseMatrixCsc& G);

    Equilibration m_eq;
    StackedNorms m_norms;
};

/// Returns the scaled problem and the scaling. Box bounds, when present,
/// become Dx⁻¹ l and Dx⁻¹ u.
std::pair<QpProblem, Equilibration> ruiz_equilibrate(const QpProblem& problem, Index max_iters = 10,
                                                     double tol = 1e-3);

/// Inverse transform of the data.
QpProblem unscale_problem(const QpProblem& scaled, const Equilibration& eq);

/// x = Dx x̃, s = Dz⁻¹ s̃, y = Dy ỹ / c_scale, z = Dz z̃ / c_scale.
Iterate unscale_solution(const Equilibration& eq, const Iterate& scaled);
void unscale_solution(const Equilibration& eq, const Iterate& scaled, Iterate& out);

} // namespace ipqp

#endif // IPQP_EQUILIBRATION_HPP
