#include "ipqp/ldl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "ipqp/ordering.hpp"

namespace ipqp
{

const char* to_string(FactorStatus status)
{
    switch (status) {
        case FactorStatus::success: return "success";
        case FactorStatus::quasi_definite_failure: return "quasi-definite failure";
        case FactorStatus::non_finite_input: return "non-finite input";
        case FactorStatus::pattern_mismatch: return "pattern mismatch";
    }
    return "unknown";
}

SymbolicFactorization symbolic_factorize(const SparseMatrixCsc& upper_pattern, std::span<const Index> perm)
{
    upper_pattern.validate("KKT pattern");
    if (upper_pattern.nrows != upper_pattern.ncols) {
        throw StructuralError("symbolic factorization needs a square matrix");
    }
    const Index n = upper_pattern.ncols;
    if (static_cast<Index>(perm.size()) != n || !is_permutation(perm)) {
        throw StructuralError("symbolic factorization: invalid permutation");
    }
    for (Index j = 0; j < n; j++) {
        for (Index p = upper_pattern.col_ptr[j]; p < upper_pattern.col_ptr[j + 1]; p++) {
            if (upper_pattern.row_idx[p] > j) {
                throw StructuralError("symbolic factorization expects the upper triangle only");
            }
        }
    }

    SymbolicFactorization s;
    s.n = n;
    s.perm.assign(perm.begin(), perm.end());
    s.perm_inv = invert_permutation(perm);

    // upper triangle of the permuted matrix, columns sorted, with a scatter map
    const Index nnz = upper_pattern.nnz();
    s.permuted_col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index j = 0; j < n; j++) {
        for (Index p = upper_pattern.col_ptr[j]; p < upper_pattern.col_ptr[j + 1]; p++) {
            const Index pi = s.perm_inv[upper_pattern.row_idx[p]];
            const Index pj = s.perm_inv[j];
            s.permuted_col_ptr[std::max(pi, pj) + 1]++;
        }
    }
    std::partial_sum(s.permuted_col_ptr.begin(), s.permuted_col_ptr.end(), s.permuted_col_ptr.begin());
    s.permuted_row_idx.resize(static_cast<std::size_t>(nnz));
    s.scatter.resize(static_cast<std::size_t>(nnz));
    std::vector<Index> source(static_cast<std::size_t>(nnz));
    {
        std::vector<Index> next(s.permuted_col_ptr.begin(), s.permuted_col_ptr.end() - 1);
        for (Index j = 0; j < n; j++) {
            for (Index p = upper_pattern.col_ptr[j]; p < upper_pattern.col_ptr[j + 1]; p++) {
                const Index pi = s.perm_inv[upper_pattern.row_idx[p]];
                const Index pj = s.perm_inv[j];
                const Index q = next[std::max(pi, pj)]++;
                s.permuted_row_idx[q] = std::min(pi, pj);
                source[q] = p;
            }
        }
    }
    std::vector<std::pair<Index, Index>> column;
    for (Index j = 0; j < n; j++) {
        const Index begin = s.permuted_col_ptr[j];
        const Index end = s.permuted_col_ptr[j + 1];
        column.clear();
        for (Index q = begin; q < end; q++) {
            column.emplace_back(s.permuted_row_idx[q], source[q]);
        }
        std::sort(column.begin(), column.end());
        for (Index q = begin; q < end; q++) {
            s.permuted_row_idx[q] = column[q - begin].first;
            s.scatter[column[q - begin].second] = q;
        }
    }

    // elimination tree and column counts
    s.etree.assign(static_cast<std::size_t>(n), -1);
    s.l_col_counts.assign(static_cast<std::size_t>(n), 0);
    std::vector<Index> flag(static_cast<std::size_t>(n), -1);
    for (Index k = 0; k < n; k++) {
        flag[k] = k;
        for (Index p = s.permuted_col_ptr[k]; p < s.permuted_col_ptr[k + 1]; p++) {
            for (Index i = s.permuted_row_idx[p]; flag[i] != k; i = s.etree[i]) {
                if (s.etree[i] == -1) {
                    s.etree[i] = k;
                }
                s.l_col_counts[i]++;
                flag[i] = k;
            }
        }
    }

    s.l_col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    std::partial_sum(s.l_col_counts.begin(), s.l_col_counts.end(), s.l_col_ptr.begin() + 1);

    // row k of L is the reach of column k in the elimination tree; appending k to
    // every column in that reach gives sorted columns, in the order the numeric
    // phase fills them
    s.l_row_idx.resize(static_cast<std::size_t>(s.l_col_ptr[n]));
    std::vector<Index> fill(static_cast<std::size_t>(n), 0);
    std::fill(flag.begin(), flag.end(), -1);
    for (Index k = 0; k < n; k++) {
        flag[k] = k;
        for (Index p = s.permuted_col_ptr[k]; p < s.permuted_col_ptr[k + 1]; p++) {
            for (Index i = s.permuted_row_idx[p]; flag[i] != k; i = s.etree[i]) {
                s.l_row_idx[s.l_col_ptr[i] + fill[i]++] = k;
                flag[i] = k;
            }
        }
    }
    return s;
}

LdlFactorization::LdlFactorization(SymbolicFactorization symbolic)
    : m_symbolic(std::move(symbolic)),
      m_l_values(static_cast<std::size_t>(m_symbolic.l_nnz()), 0.0),
      m_d(static_cast<std::size_t>(m_symbolic.n), 0.0),
      m_permuted_values(static_cast<std::size_t>(m_symbolic.k_nnz()), 0.0),
      m_row_scale(static_cast<std::size_t>(m_symbolic.n), 0.0),
      m_y(static_cast<std::size_t>(m_symbolic.n), 0.0),
      m_flag(static_cast<std::size_t>(m_symbolic.n), -1),
      m_pattern(static_cast<std::size_t>(m_symbolic.n), 0),
      m_fill(static_cast<std::size_t>(m_symbolic.n), 0)
{
}

FactorResult LdlFactorization::factorize(const SparseMatrixCsc& upper, std::span<const std::int8_t> expected_signs)
{
    const SymbolicFactorization& s = m_symbolic;
    const Index n = s.n;
    if (upper.ncols != n || upper.nrows != n || upper.nnz() != s.k_nnz() ||
        static_cast<Index>(expected_signs.size()) != n) {
        return {FactorStatus::pattern_mismatch, -1};
    }

    std::fill(m_row_scale.begin(), m_row_scale.end(), 0.0);
    for (Index p = 0; p < s.k_nnz(); p++) {
        const double v = upper.values[p];
        if (!std::isfinite(v)) {
            return {FactorStatus::non_finite_input, -1};
        }
        const Index q = s.scatter[p];
        m_permuted_values[q] = v;
    }
    for (Index j = 0; j < n; j++) {
        for (Index q = s.permuted_col_ptr[j]; q < s.permuted_col_ptr[j + 1]; q++) {
            const double a = std::abs(m_permuted_values[q]);
            const Index i = s.permuted_row_idx[q];
            m_row_scale[i] = std::max(m_row_scale[i], a);
            m_row_scale[j] = std::max(m_row_scale[j], a);
        }
    }

    for (Index k = 0; k < n; k++) {
        m_y[k] = 0.0;
        Index top = n;
        m_flag[k] = k;
        m_fill[k] = 0;
        for (Index q = s.permuted_col_ptr[k]; q < s.permuted_col_ptr[k + 1]; q++) {
            Index i = s.permuted_row_idx[q];
            m_y[i] += m_permuted_values[q];
            Index len = 0;
            for (; m_flag[i] != k; i = s.etree[i]) {
                m_pattern[len++] = i;
                m_flag[i] = k;
            }
            while (len > 0) {
                m_pattern[--top] = m_pattern[--len];
            }
        }

        double dk = m_y[k];
        m_y[k] = 0.0;
        for (; top < n; top++) {
            const Index i = m_pattern[top];
            const double yi = m_y[i];
            m_y[i] = 0.0;
            const Index p2 = s.l_col_ptr[i] + m_fill[i];
            for (Index p = s.l_col_ptr[i]; p < p2; p++) {
                m_y[s.l_row_idx[p]] -= m_l_values[p] * yi;
            }
            const double lki = yi / m_d[i];
            dk -= lki * yi;
            m_l_values[p2] = lki;
            m_fill[i]++;
        }
        m_d[k] = dk;

        const double sign = expected_signs[s.perm[k]] >= 0 ? 1.0 : -1.0;
        if (!(dk * sign > pivot_tolerance * m_row_scale[k])) {
            // leave the workspace clean for the next attempt
            std::fill(m_y.begin(), m_y.end(), 0.0);
            return {FactorStatus::quasi_definite_failure, k};
        }
    }
    return {};
}

void LdlFactorization::solve_in_place(std::span<double> x, std::span<double> work) const
{
    const SymbolicFactorization& s = m_symbolic;
    const Index n = s.n;
    for (Index k = 0; k < n; k++) {
        work[k] = x[s.perm[k]];
    }
    for (Index j = 0; j < n; j++) {
        const double wj = work[j];
        for (Index p = s.l_col_ptr[j]; p < s.l_col_ptr[j + 1]; p++) {
            work[s.l_row_idx[p]] -= m_l_values[p] * wj;
        }
    }
    for (Index j = 0; j < n; j++) {
        work[j] /= m_d[j];
    }
    for (Index j = n - 1; j >= 0; j--) {
        double wj = work[j];
        for (Index p = s.l_col_ptr[j]; p < s.l_col_ptr[j + 1]; p++) {
            wj -= m_l_values[p] * work[s.l_row_idx[p]];
        }
        work[j] = wj;
    }
    for (Index k = 0; k < n; k++) {
        x[s.perm[k]] = work[k];
    }
}

std::vector<double> LdlFactorization::solve(std::span<const double> rhs) const
{
    if (static_cast<Index>(rhs.size()) != m_symbolic.n) {
        throw StructuralError("ldl solve: right-hand side has length " + std::to_string(rhs.size()) +
                              ", expected " + std::to_string(m_symbolic.n));
    }
    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<double> work(rhs.size());
    solve_in_place(x, work);
    return x;
}

} // namespace ipqp
