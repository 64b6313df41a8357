#ifndef IPQP_LDL_HPP
#define IPQP_LDL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ipqp/sparse.hpp"

namespace ipqp
{

/// Elimination tree and fixed pattern of L for the permuted matrix Γ K Γᵀ.
///
/// Also keeps the upper triangle of Γ K Γᵀ and the map scattering each
/// entry of K into it, so numeric factorizations never touch the pattern.
struct SymbolicFactorization
{
    Index n = 0;
    std::vector<Index> perm;     // perm[k] = original index at position k
    std::vector<Index> perm_inv; // perm_inv[perm[k]] = k
    std::vector<Index> etree;    // parent of each column, -1 for roots
    std::vector<Index> l_col_counts;
    std::vector<Index> l_col_ptr;
    std::vector<Index> l_row_idx;

    std::vector<Index> permuted_col_ptr;
    std::vector<Index> permuted_row_idx;
    std::vector<Index> scatter; // entry p of K lands at permuted entry scatter[p]

    Index l_nnz() const { return static_cast<Index>(l_row_idx.size()); }
    Index k_nnz() const { return static_cast<Index>(scatter.size()); }
};

/// Computes the elimination tree and fill pattern of Γ K Γᵀ. `upper_pattern`
/// holds the upper triangle of K; `perm` is a permutation of 0..n-1.
SymbolicFactorization symbolic_factorize(const SparseMatrixCsc& upper_pattern, std::span<const Index> perm);

enum class FactorStatus
{
    success,
    quasi_definite_failure, // zero pivot or pivot of the wrong sign
    non_finite_input,
    pattern_mismatch,
};

struct FactorResult
{
    FactorStatus status = FactorStatus::success;
    Index column = -1; // permuted column of the first failed pivot

    bool ok() const { return status == FactorStatus::success; }
};

const char* to_string(FactorStatus status);

/// Pivot-free LDLᵀ of a quasi-definite matrix, Γ K Γᵀ = L D Lᵀ.
///
/// All storage is sized by the constructor; `factorize` and the solves do
/// not allocate.
class LdlFactorization
{
public:
    LdlFactorization() = default;
    explicit LdlFactorization(SymbolicFactorization symbolic);

    /// `expected_signs[i]` is +1 or -1 for row i of K (unpermuted). A pivot d_j
    /// fails if d_j * sign_j <= 1e-14 * (largest magnitude in row j of Γ K Γᵀ).
    FactorResult factorize(const SparseMatrixCsc& upper, std::span<const std::int8_t> expected_signs);

    /// Overwrites `x` (the right-hand side) with the solution. `work` has length n.
    void solve_in_place(std::span<double> x, std::span<double> work) const;
    std::vector<double> solve(std::span<const double> rhs) const;

    const SymbolicFactorization& symbolic() const { return m_symbolic; }
    Index dim() const { return m_symbolic.n; }
    std::span<const double> l_values() const { return m_l_values; }
    std::span<const double> d() const { return m_d; }

private:
    static constexpr double pivot_tolerance = 1e-14;

    SymbolicFactorization m_symbolic;
    std::vector<double> m_l_values;
    std::vector<double> m_d;

    std::vector<double> m_permuted_values;
    std::vector<double> m_row_scale;
    std::vector<double> m_y;
    std::vector<Index> m_flag;
    std::vector<Index> m_pattern;
    std::vector<Index> m_fill;
};

} // namespace ipqp

#endif // IPQP_LDL_HPP
