#include "ipqp/problem.hpp"

#include <cmath>
#include <vector>

namespace ipqp
{

namespace
{

void require_finite(const Vec& v, const char* name)
{
    if (!v.allFinite()) {
        throw StructuralError(std::string(name) + " contains non-finite entries");
    }
}

void require_size(const Vec& v, Index expected, const char* name)
{
    if (v.size() != expected) {
        throw StructuralError(std::string(name) + " has length " + std::to_string(v.size()) + ", expected " +
                              std::to_string(expected));
    }
}

} // namespace

void QpProblem::validate() const
{
    P.validate("P");
    A.validate("A");
    G.validate("G");
    const Index nv = P.ncols;
    if (P.nrows != nv) {
        throw StructuralError("P must be square");
    }
    for (Index j = 0; j < nv; j++) {
        for (Index k = P.col_ptr[j]; k < P.col_ptr[j + 1]; k++) {
            if (P.row_idx[k] > j) {
                throw StructuralError("P must hold the upper triangle only");
            }
        }
    }
    if (A.ncols != nv) {
        throw StructuralError("A has " + std::to_string(A.ncols) + " columns, expected " + std::to_string(nv));
    }
    if (G.ncols != nv) {
        throw StructuralError("G has " + std::to_string(G.ncols) + " columns, expected " + std::to_string(nv));
    }
    require_size(c, nv, "c");
    require_size(b, A.nrows, "b");
    require_size(h, G.nrows, "h");
    if (l.size() != 0) require_size(l, nv, "l");
    if (u.size() != 0) require_size(u, nv, "u");

    if (!P.all_finite()) throw StructuralError("P contains non-finite entries");
    if (!A.all_finite()) throw StructuralError("A contains non-finite entries");
    if (!G.all_finite()) throw StructuralError("G contains non-finite entries");
    require_finite(c, "c");
    require_finite(b, "b");
    require_finite(h, "h");
    for (Index i = 0; i < l.size(); i++) {
        if (std::isnan(l[i]) || l[i] == infinity) throw StructuralError("l has an invalid entry at " + std::to_string(i));
    }
    for (Index i = 0; i < u.size(); i++) {
        if (std::isnan(u[i]) || u[i] == -infinity) throw StructuralError("u has an invalid entry at " + std::to_string(i));
    }
    if (l.size() != 0 && u.size() != 0) {
        for (Index i = 0; i < nv; i++) {
            if (l[i] > u[i]) {
                throw StructuralError("bounds cross at variable " + std::to_string(i));
            }
        }
    }
}

double QpProblem::objective(const Vec& x) const
{
    std::vector<double> px(static_cast<std::size_t>(n()));
    multiply_symmetric_upper(P, {x.data(), static_cast<std::size_t>(x.size())}, px);
    double quad = 0.0;
    for (Index i = 0; i < n(); i++) quad += x[i] * px[static_cast<std::size_t>(i)];
    return 0.5 * quad + c.dot(x) + objective_constant;
}

SparseMatrixCsc empty_rows(Index n)
{
    return SparseMatrixCsc(0, n);
}

Settings Settings::low_accuracy()
{
    Settings s;
    s.eps_abs = 1e-3;
    s.eps_rel = 1e-4;
    return s;
}

void Settings::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid settings: " + what); };
    if (!(eps_abs > 0)) fail("eps_abs must be positive");
    if (!(eps_rel >= 0)) fail("eps_rel must be non-negative");
    if (max_iter < 0) fail("max_iter must be non-negative");
    if (!(tau > 0 && tau < 1)) fail("tau must lie in (0, 1)");
    if (!(delta0 > 0 && rho0 > 0)) fail("delta0 and rho0 must be positive");
    if (!(delta_min > 0 && rho_min > 0)) fail("delta_min and rho_min must be positive");
    if (delta_min > delta0 || rho_min > rho0) fail("regularization floors exceed the initial values");
    if (!(reg_retry_factor > 1)) fail("reg_retry_factor must exceed 1");
    if (reg_retry_max < 0) fail("reg_retry_max must be non-negative");
    if (refine_max < 0) fail("refine_max must be non-negative");
    if (!(refine_tol >= 0.0)) fail("refine_tol must be non-negative");
    if (equilibrate && ruiz_iters < 1) fail("ruiz_iters must be at least 1");
    if (!(ruiz_tol >= 0)) fail("ruiz_tol must be non-negative");
    if (time_limit && !(*time_limit >= 0)) fail("time_limit must be non-negative");
}

void Iterate::resize(Index n, Index p, Index m)
{
    x.setZero(n);
    s.setZero(m);
    y.setZero(p);
    z.setZero(m);
}

const char* to_string(Status status)
{
    switch (status) {
        case Status::solved: return "solved";
        case Status::iteration_limit: return "iteration_limit";
        case Status::time_limit: return "time_limit";
        case Status::numerical_error: return "numerical_error";
    }
    return "unknown";
}

std::optional<Status> status_from_string(const std::string& name)
{
    for (Status s : {Status::solved, Status::iteration_limit, Status::time_limit, Status::numerical_error}) {
        if (name == to_string(s)) return s;
    }
    return std::nullopt;
}

} // namespace ipqp
