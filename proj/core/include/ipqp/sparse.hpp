#ifndef IPQP_SPARSE_HPP
#define IPQP_SPARSE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipqp
{

using Index = std::ptrdiff_t;

/// Raised for malformed sparse structure, dimension mismatches and non-finite input data.
class StructuralError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

struct Triplet
{
    Index row;
    Index col;
    double value;
};

/// Compressed sparse column storage.
///
/// Row indices are strictly increasing inside each column. Symmetric
/// matrices (P, the KKT matrix) keep the upper triangle only, diagonal included.
struct SparseMatrixCsc
{
    Index nrows = 0;
    Index ncols = 0;
    std::vector<Index> col_ptr{0};
    std::vector<Index> row_idx;
    std::vector<double> values;

    SparseMatrixCsc() = default;
    SparseMatrixCsc(Index rows, Index cols);

    Index nnz() const { return static_cast<Index>(row_idx.size()); }

    /// Sums duplicate entries; drops nothing (explicit zeros are kept as structural nonzeros).
    static SparseMatrixCsc from_triplets(Index rows, Index cols, std::span<const Triplet> entries);
    static SparseMatrixCsc identity(Index n);

    /// Throws StructuralError naming `what` if the invariants do not hold.
    void validate(const std::string& what = "matrix") const;
    bool same_pattern(const SparseMatrixCsc& other) const;
    bool all_finite() const;

    double coeff(Index row, Index col) const;
};

/// Keeps entries with row <= col.
SparseMatrixCsc upper_triangle(const SparseMatrixCsc& m);
SparseMatrixCsc transpose(const SparseMatrixCsc& m);

// y = alpha * M x + beta * y
void multiply(const SparseMatrixCsc& m, std::span<const double> x, std::span<double> y,
              double alpha = 1.0, double beta = 0.0);
// y = alpha * M^T x + beta * y
void multiply_transpose(const SparseMatrixCsc& m, std::span<const double> x, std::span<double> y,
                        double alpha = 1.0, double beta = 0.0);
// y = alpha * S x + beta * y, S symmetric with upper triangle stored in `upper`
void multiply_symmetric_upper(const SparseMatrixCsc& upper, std::span<const double> x, std::span<double> y,
                              double alpha = 1.0, double beta = 0.0);

/// Max-norm of a symmetric matrix given by its upper triangle.
double max_abs(const SparseMatrixCsc& m);

} // namespace ipqp

#endif // IPQP_SPARSE_HPP
