#ifndef IPQP_ORDERING_HPP
#define IPQP_ORDERING_HPP

#include <span>
#include <vector>

#include "ipqp/sparse.hpp"

namespace ipqp
{

/// Fill-reducing approximate minimum degree ordering of a symmetric pattern.
///
/// `pattern` must be square; only its structure is read and the upper
/// triangle is enough. Returns `perm` with `perm[k]` the original index
/// eliminated at step k. Deterministic for a given pattern.
std::vector<Index> amd_ordering(const SparseMatrixCsc& pattern);

std::vector<Index> natural_ordering(Index n);

std::vector<Index> invert_permutation(std::span<const Index> perm);
bool is_permutation(std::span<const Index> perm);

} // namespace ipqp

#endif // IPQP_ORDERING_HPP
