#include "ipqp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ipqp
{

SparseMatrixCsc::SparseMatrixCsc(Index rows, Index cols)
    : nrows(rows), ncols(cols), col_ptr(static_cast<std::size_t>(cols) + 1, 0)
{
    if (rows < 0 || cols < 0) {
        throw StructuralError("negative matrix dimension");
    }
}

SparseMatrixCsc SparseMatrixCsc::from_triplets(Index rows, Index cols, std::span<const Triplet> entries)
{
    SparseMatrixCsc m(rows, cols);
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw StructuralError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entries[a].col != entries[b].col) return entries[a].col < entries[b].col;
        return entries[a].row < entries[b].row;
    });

    m.row_idx.reserve(entries.size());
    m.values.reserve(entries.size());
    Index last_row = -1;
    Index last_col = -1;
    for (std::size_t k : order) {
        const Triplet& t = entries[k];
        if (t.col == last_col && t.row == last_row) {
            m.values.back() += t.value;
            continue;
        }
        m.row_idx.push_back(t.row);
        m.values.push_back(t.value);
        m.col_ptr[static_cast<std::size_t>(t.col) + 1]++;
        last_row = t.row;
        last_col = t.col;
    }
    std::partial_sum(m.col_ptr.begin(), m.col_ptr.end(), m.col_ptr.begin());
    return m;
}

SparseMatrixCsc SparseMatrixCsc::identity(Index n)
{
    SparseMatrixCsc m(n, n);
    m.row_idx.resize(static_cast<std::size_t>(n));
    m.values.assign(static_cast<std::size_t>(n), 1.0);
    for (Index j = 0; j < n; j++) {
        m.col_ptr[j + 1] = j + 1;
        m.row_idx[j] = j;
    }
    return m;
}

void SparseMatrixCsc::validate(const std::string& what) const
{
    if (nrows < 0 || ncols < 0) {
        throw StructuralError(what + ": negative dimension");
    }
    if (col_ptr.size() != static_cast<std::size_t>(ncols) + 1) {
        throw StructuralError(what + ": col_ptr must have ncols+1 entries");
    }
    if (col_ptr.front() != 0) {
        throw StructuralError(what + ": col_ptr[0] must be 0");
    }
    if (row_idx.size() != values.size()) {
        throw StructuralError(what + ": row_idx and values lengths differ");
    }
    if (col_ptr.back() != nnz()) {
        throw StructuralError(what + ": col_ptr[ncols] != nnz");
    }
    for (Index j = 0; j < ncols; j++) {
        if (col_ptr[j + 1] < col_ptr[j]) {
            throw StructuralError(what + ": col_ptr decreases at column " + std::to_string(j));
        }
        Index prev = -1;
        for (Index p = col_ptr[j]; p < col_ptr[j + 1]; p++) {
            Index i = row_idx[p];
            if (i < 0 || i >= nrows) {
                throw StructuralError(what + ": row index out of range in column " + std::to_string(j));
            }
            if (i <= prev) {
                throw StructuralError(what + ": unsorted or duplicate row index in column " + std::to_string(j));
            }
            prev = i;
        }
    }
}

bool SparseMatrixCsc::same_pattern(const SparseMatrixCsc& other) const
{
    return nrows == other.nrows && ncols == other.ncols && col_ptr == other.col_ptr && row_idx == other.row_idx;
}

bool SparseMatrixCsc::all_finite() const
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double SparseMatrixCsc::coeff(Index row, Index col) const
{
    auto first = row_idx.begin() + col_ptr[col];
    auto last = row_idx.begin() + col_ptr[col + 1];
    auto it = std::lower_bound(first, last, row);
    if (it == last || *it != row) {
        return 0.0;
    }
    return values[static_cast<std::size_t>(it - row_idx.begin())];
}

SparseMatrixCsc upper_triangle(const SparseMatrixCsc& m)
{
    SparseMatrixCsc u(m.nrows, m.ncols);
    for (Index j = 0; j < m.ncols; j++) {
        for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; p++) {
            if (m.row_idx[p] <= j) {
                u.row_idx.push_back(m.row_idx[p]);
                u.values.push_back(m.values[p]);
            }
        }
        u.col_ptr[j + 1] = u.nnz();
    }
    return u;
}

SparseMatrixCsc transpose(const SparseMatrixCsc& m)
{
    SparseMatrixCsc t(m.ncols, m.nrows);
    t.row_idx.resize(m.row_idx.size());
    t.values.resize(m.values.size());
    for (Index i : m.row_idx) {
        t.col_ptr[i + 1]++;
    }
    std::partial_sum(t.col_ptr.begin(), t.col_ptr.end(), t.col_ptr.begin());
    std::vector<Index> next(t.col_ptr.begin(), t.col_ptr.end() - 1);
    for (Index j = 0; j < m.ncols; j++) {
        for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; p++) {
            Index q = next[m.row_idx[p]]++;
            t.row_idx[q] = j;
            t.values[q] = m.values[p];
        }
    }
    return t;
}

void multiply(const SparseMatrixCsc& m, std::span<const double> x, std::span<double> y, double alpha, double beta)
{
    if (beta == 0.0) {
        std::fill(y.begin(), y.end(), 0.0);
    } else if (beta != 1.0) {
        for (double& v : y) v *= beta;
    }
    for (Index j = 0; j < m.ncols; j++) {
        const double xj = alpha * x[j];
        if (xj == 0.0) continue;
        for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; p++) {
            y[m.row_idx[p]] += m.values[p] * xj;
        }
    }
}

void multiply_transpose(const SparseMatrixCsc& m, std::span<const double> x, std::span<double> y, double alpha,
                        double beta)
{
    for (Index j = 0; j < m.ncols; j++) {
        double acc = 0.0;
        for (Index p = m.col_ptr[j]; p < m.col_ptr[j + 1]; p++) {
            acc += m.values[p] * x[m.row_idx[p]];
        }
        y[j] = (beta == 0.0 ? 0.0 : beta * y[j]) + alpha * acc;
    }
}

void multiply_symmetric_upper(const SparseMatrixCsc& upper, std::span<const double> x, std::span<double> y,
                              double alpha, double beta)
{
    if (beta == 0.0) {
        std::fill(y.begin(), y.end(), 0.0);
    } else if (beta != 1.0) {
        for (double& v : y) v *= beta;
    }
    for (Index j = 0; j < upper.ncols; j++) {
        double acc = 0.0;
        const double xj = x[j];
        for (Index p = upper.col_ptr[j]; p < upper.col_ptr[j + 1]; p++) {
            const Index i = upper.row_idx[p];
            const double v = upper.values[p];
            if (i == j) {
                acc += v * xj;
            } else {
                acc += v * x[i];
                y[i] += alpha * v * xj;
            }
        }
        y[j] += alpha * acc;
    }
}

double max_abs(const SparseMatrixCsc& m)
{
    double r = 0.0;
    for (double v : m.values) r = std::max(r, std::abs(v));
    return r;
}

} // namespace ipqp
