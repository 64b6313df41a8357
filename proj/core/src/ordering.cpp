#include "ipqp/ordering.hpp"

#include <amd.h>

#include <numeric>
#include <string>

namespace ipqp
{

std::vector<Index> amd_ordering(const SparseMatrixCsc& pattern)
{
    pattern.validate("ordering pattern");
    if (pattern.nrows != pattern.ncols) {
        throw StructuralError("ordering pattern must be square");
    }
    const Index n = pattern.ncols;
    if (n == 0) {
        return {};
    }

    std::vector<SuiteSparse_long> ap(pattern.col_ptr.begin(), pattern.col_ptr.end());
    std::vector<SuiteSparse_long> ai(pattern.row_idx.begin(), pattern.row_idx.end());
    std::vector<SuiteSparse_long> p(static_cast<std::size_t>(n));

    double control[AMD_CONTROL];
    double info[AMD_INFO];
    amd_l_defaults(control);
    control[AMD_DENSE] = -1.0; // never postpone dense rows
    control[AMD_AGGRESSIVE] = 1.0;

    const SuiteSparse_long status =
        amd_l_order(static_cast<SuiteSparse_long>(n), ap.data(), ai.data(), p.data(), control, info);
    if (status != AMD_OK) {
        throw StructuralError("AMD ordering failed with status " + std::to_string(status));
    }
    return {p.begin(), p.end()};
}

std::vector<Index> natural_ordering(Index n)
{
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    return perm;
}

std::vector<Index> invert_permutation(std::span<const Index> perm)
{
    std::vector<Index> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); k++) {
        inv[static_cast<std::size_t>(perm[k])] = static_cast<Index>(k);
    }
    return inv;
}

bool is_permutation(std::span<const Index> perm)
{
    std::vector<char> seen(perm.size(), 0);
    for (Index i : perm) {
        if (i < 0 || static_cast<std::size_t>(i) >= perm.size() || seen[static_cast<std::size_t>(i)]) {
            return false;
        }
        seen[static_cast<std::size_t>(i)] = 1;
    }
    return true;
}

} // namespace ipqp
