#include <gtest/gtest.h>

#include <numeric>

#include "ipqp/ldl.hpp"
#include "ipqp/ordering.hpp"
#include "oracles.hpp"

using namespace ipqp;
using namespace ipqp::testing;

namespace
{

SparseMatrixCsc arrow(Index n)
{
    // dense first row/column plus the diagonal
    std::vector<Triplet> t;
    for (Index j = 0; j < n; j++) {
        t.push_back({j, j, 4.0 + static_cast<double>(j)});
        if (j > 0) t.push_back({0, j, 1.0});
    }
    return SparseMatrixCsc::from_triplets(n, n, t);
}

SparseMatrixCsc tridiagonal(Index n)
{
    std::vector<Triplet> t;
    for (Index j = 0; j < n; j++) {
        t.push_back({j, j, 4.0});
        if (j > 0) t.push_back({j - 1, j, -1.0});
    }
    return SparseMatrixCsc::from_triplets(n, n, t);
}

SparseMatrixCsc dense_upper(std::initializer_list<std::initializer_list<double>> rows)
{
    const Index n = static_cast<Index>(rows.size());
    DenseMatrix M(n, n);
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) M(i, j++) = v;
        i++;
    }
    return to_csc(M, true);
}

} // namespace

// ---------------------------------------------------------------- CSC basics

TEST(SparseMatrix, FromTripletsSumsDuplicatesAndSortsRows)
{
    const std::vector<Triplet> t = {{2, 0, 1.0}, {0, 0, 2.0}, {2, 0, 3.0}, {1, 1, -1.0}};
    const auto M = SparseMatrixCsc::from_triplets(3, 2, t);
    EXPECT_EQ(M.col_ptr, (std::vector<Index>{0, 2, 3}));
    EXPECT_EQ(M.row_idx, (std::vector<Index>{0, 2, 1}));
    EXPECT_EQ(M.values, (std::vector<double>{2.0, 4.0, -1.0}));
    EXPECT_NO_THROW(M.validate());
}

TEST(SparseMatrix, ValidateRejectsMalformedStorage)
{
    SparseMatrixCsc M(2, 2);
    M.col_ptr = {0, 2, 2};
    M.row_idx = {1, 0}; // not increasing
    M.values = {1.0, 1.0};
    EXPECT_THROW(M.validate(), StructuralError);
    M.row_idx = {0, 2}; // out of range
    EXPECT_THROW(M.validate(), StructuralError);
    M.row_idx = {0, 1};
    M.col_ptr = {1, 2, 2}; // col_ptr[0] != 0
    EXPECT_THROW(M.validate(), StructuralError);
}

TEST(SparseMatrix, MatvecsMatchDense)
{
    RandomQpGenerator gen(7);
    const DenseMatrix D = gen.sparse_dense(7, 5, 0.4);
    const SparseMatrixCsc M = to_csc(D);
    Vec x = Vec::Random(5);
    Vec y = Vec::Random(7);
    Vec out = Vec::Ones(7);
    multiply(M, {x.data(), 5}, {out.data(), 7}, 2.0, 0.5);
    EXPECT_LT((out - (2.0 * D * x + 0.5 * Vec::Ones(7))).cwiseAbs().maxCoeff(), 1e-14);
    Vec outt(5);
    multiply_transpose(M, {y.data(), 7}, {outt.data(), 5});
    EXPECT_LT((outt - D.transpose() * y).cwiseAbs().maxCoeff(), 1e-14);

    const DenseMatrix S = gen.psd_matrix(5, 10.0, 0, 0);
    Vec outs(5);
    multiply_symmetric_upper(to_csc(S, true), {x.data(), 5}, {outs.data(), 5});
    EXPECT_LT((outs - S * x).cwiseAbs().maxCoeff(), 1e-13);
}

// ------------------------------------------------------------------ ordering

TEST(AmdOrdering, TrivialCases)
{
    EXPECT_TRUE(amd_ordering(SparseMatrixCsc(0, 0)).empty());
    EXPECT_EQ(amd_ordering(SparseMatrixCsc::identity(1)), (std::vector<Index>{0}));

    const auto perm = amd_ordering(SparseMatrixCsc::identity(4));
    EXPECT_TRUE(is_permutation(perm));
    const auto sym = symbolic_factorize(SparseMatrixCsc::identity(4), perm);
    EXPECT_EQ(sym.l_nnz(), 0);
}

TEST(AmdOrdering, ArrowFillAgainstDenseElimination)
{
    const auto A = arrow(6);
    const DenseFill natural = dense_symbolic_fill(A, natural_ordering(6));
    EXPECT_EQ(natural.total, 15);

    const auto perm = amd_ordering(A);
    ASSERT_TRUE(is_permutation(perm));
    const DenseFill ordered = dense_symbolic_fill(A, perm);
    EXPECT_EQ(ordered.total, 5);
    EXPECT_EQ(perm.back(), 0); // the spike goes last
    EXPECT_EQ(symbolic_factorize(A, perm).l_nnz(), ordered.total);
    EXPECT_EQ(symbolic_factorize(A, natural_ordering(6)).l_nnz(), natural.total);
}

TEST(AmdOrdering, DeterministicBijection)
{
    RandomQpGenerator gen(3);
    for (int trial = 0; trial < 20; trial++) {
        const auto K = random_quasi_definite(gen, gen.index(1, 40), gen.index(0, 30), 0.1);
        const auto a = amd_ordering(K);
        const auto b = amd_ordering(K);
        EXPECT_TRUE(is_permutation(a));
        EXPECT_EQ(a, b);
    }
}

TEST(AmdOrdering, RejectsMalformedPattern)
{
    SparseMatrixCsc M(3, 3);
    M.col_ptr = {0, 1, 2, 3};
    M.row_idx = {0, 5, 2};
    M.values = {1, 1, 1};
    EXPECT_THROW(amd_ordering(M), StructuralError);
    EXPECT_THROW(amd_ordering(SparseMatrixCsc(2, 3)), StructuralError);
}

TEST(Permutation, InverseRoundTrip)
{
    const std::vector<Index> perm = {2, 0, 3, 1};
    const auto inv = invert_permutation(perm);
    for (Index k = 0; k < 4; k++) EXPECT_EQ(inv[perm[k]], k);
    EXPECT_FALSE(is_permutation(std::vector<Index>{0, 0, 1}));
}

// ------------------------------------------------------------------ symbolic

TEST(SymbolicFactorize, IdentityHasNoFill)
{
    const auto s = symbolic_factorize(SparseMatrixCsc::identity(5), natural_ordering(5));
    for (Index j = 0; j < 5; j++) {
        EXPECT_EQ(s.etree[j], -1);
        EXPECT_EQ(s.l_col_counts[j], 0);
    }
}

TEST(SymbolicFactorize, TridiagonalEtreeIsAPath)
{
    const auto T = tridiagonal(4);
    const auto s = symbolic_factorize(T, natural_ordering(4));
    EXPECT_EQ(s.etree, (std::vector<Index>{1, 2, 3, -1}));
    EXPECT_EQ(s.l_col_counts, (std::vector<Index>{1, 1, 1, 0}));
    const DenseFill oracle = dense_symbolic_fill(T, natural_ordering(4));
    EXPECT_EQ(s.etree, oracle.etree);
}

TEST(SymbolicFactorize, ArrowNaturalOrderFillsCompletely)
{
    const auto A = arrow(6);
    const auto s = symbolic_factorize(A, natural_ordering(6));
    const DenseFill oracle = dense_symbolic_fill(A, natural_ordering(6));
    EXPECT_EQ(s.l_col_counts, oracle.col_counts);
    EXPECT_EQ(s.etree, oracle.etree);
    EXPECT_EQ(s.l_nnz(), 15);
}

TEST(SymbolicFactorize, MatchesDenseEliminationOnRandomPatterns)
{
    RandomQpGenerator gen(11);
    for (int trial = 0; trial < 30; trial++) {
        const auto K = random_quasi_definite(gen, gen.index(1, 25), gen.index(0, 15), 0.15);
        for (const auto& perm : {natural_ordering(K.ncols), amd_ordering(K)}) {
            const auto s = symbolic_factorize(K, perm);
            const DenseFill oracle = dense_symbolic_fill(K, perm);
            EXPECT_EQ(s.l_col_counts, oracle.col_counts);
            EXPECT_EQ(s.etree, oracle.etree);
            EXPECT_EQ(invert_permutation(s.perm), s.perm_inv);
            for (Index j = 0; j < s.n; j++) {
                EXPECT_TRUE(s.etree[j] == -1 || s.etree[j] > j);
            }
        }
    }
}

TEST(SymbolicFactorize, RejectsLowerEntriesAndBadPermutations)
{
    DenseMatrix M(2, 2);
    M << 1, 0, 1, 1;
    EXPECT_THROW(symbolic_factorize(to_csc(M), natural_ordering(2)), StructuralError);
    EXPECT_THROW(symbolic_factorize(SparseMatrixCsc::identity(2), std::vector<Index>{0, 0}), StructuralError);
}

// ------------------------------------------------------------------- numeric

TEST(LdlFactorization, IdentityGivesUnitFactors)
{
    const auto I = SparseMatrixCsc::identity(3);
    LdlFactorization f(symbolic_factorize(I, natural_ordering(3)));
    const std::vector<std::int8_t> signs = {1, 1, 1};
    ASSERT_TRUE(f.factorize(I, signs).ok());
    EXPECT_EQ(dense_d(f), Vec::Ones(3));
    EXPECT_EQ(f.symbolic().l_nnz(), 0);
    EXPECT_EQ(f.solve(std::vector<double>{1, 2, 3}), (std::vector<double>{1, 2, 3}));
}

TEST(LdlFactorization, TwoByTwoQuasiDefinite)
{
    const auto K = dense_upper({{2, 1}, {1, -2}});
    LdlFactorization f(symbolic_factorize(K, natural_ordering(2)));
    ASSERT_TRUE(f.factorize(K, std::vector<std::int8_t>{1, -1}).ok());
    ASSERT_EQ(f.l_values().size(), 1u);
    // hand elimination: l21 = 1/2, d2 = -2 - 1/2
    EXPECT_DOUBLE_EQ(f.l_values()[0], 0.5);
    EXPECT_DOUBLE_EQ(f.d()[0], 2.0);
    EXPECT_DOUBLE_EQ(f.d()[1], -2.5);

    const auto x = f.solve(std::vector<double>{1, 0});
    const Vec oracle = symmetric_from_upper(K).lu().solve(Vec::Unit(2, 0));
    EXPECT_NEAR(x[0], 0.4, 1e-15);
    EXPECT_NEAR(x[1], 0.2, 1e-15);
    EXPECT_NEAR(x[0], oracle[0], 1e-15);
    EXPECT_NEAR(x[1], oracle[1], 1e-15);
}

TEST(LdlFactorization, ZeroPivotIsReportedNotPivoted)
{
    const auto K = dense_upper({{0, 1}, {1, 0}});
    LdlFactorization f(symbolic_factorize(K, natural_ordering(2)));
    const auto res = f.factorize(K, std::vector<std::int8_t>{1, -1});
    EXPECT_EQ(res.status, FactorStatus::quasi_definite_failure);
    EXPECT_EQ(res.column, 0);
}

TEST(LdlFactorization, WrongSignIsReported)
{
    const auto K = dense_upper({{1, 0}, {0, 1}});
    LdlFactorization f(symbolic_factorize(K, natural_ordering(2)));
    const auto res = f.factorize(K, std::vector<std::int8_t>{1, -1});
    EXPECT_EQ(res.status, FactorStatus::quasi_definite_failure);
    EXPECT_EQ(res.column, 1);
}

TEST(LdlFactorization, NonFiniteAndPatternMismatch)
{
    auto K = dense_upper({{2, 1}, {1, -2}});
    LdlFactorization f(symbolic_factorize(K, natural_ordering(2)));
    K.values[0] = std::nan("");
    EXPECT_EQ(f.factorize(K, std::vector<std::int8_t>{1, -1}).status, FactorStatus::non_finite_input);
    EXPECT_EQ(f.factorize(SparseMatrixCsc::identity(2), std::vector<std::int8_t>{1, -1}).status,
              FactorStatus::pattern_mismatch);
}

TEST(LdlFactorization, RandomQuasiDefiniteMatchesDenseOracle)
{
    RandomQpGenerator gen(21);
    for (int trial = 0; trial < 25; trial++) {
        const Index n1 = gen.index(1, 35);
        const Index n2 = gen.index(0, 15);
        const auto K = random_quasi_definite(gen, n1, n2, 0.1);
        LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
        ASSERT_TRUE(f.factorize(K, block_signs(n1, n2)).ok());

        const double scale = max_abs(symmetric_from_upper(K));
        EXPECT_LE(reconstruction_error(K, f), 1e-10 * scale);

        // sign pattern: n1 positive, n2 negative pivots
        const Vec d = dense_d(f);
        EXPECT_EQ((d.array() > 0).count(), n1);
        EXPECT_EQ((d.array() < 0).count(), n2);

        Vec rhs = Vec::Random(n1 + n2);
        const auto x = f.solve({rhs.data(), static_cast<std::size_t>(rhs.size())});
        const Vec oracle = symmetric_from_upper(K).partialPivLu().solve(rhs);
        const Vec xv = Eigen::Map<const Vec>(x.data(), n1 + n2);
        EXPECT_LE((xv - oracle).norm(), 1e-9 * oracle.norm());
    }
}

TEST(LdlFactorization, FiftyByFiftySolveAgainstDenseFactorization)
{
    RandomQpGenerator gen(50);
    const auto K = random_quasi_definite(gen, 30, 20, 0.1);
    LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
    ASSERT_TRUE(f.factorize(K, block_signs(30, 20)).ok());
    Vec rhs = Vec::Random(50);
    const auto x = f.solve({rhs.data(), 50});
    // Eigen's pivoted dense LDLᵀ needs definiteness, so use a full-pivot LU
    const Vec oracle = symmetric_from_upper(K).fullPivLu().solve(rhs);
    EXPECT_LE((Eigen::Map<const Vec>(x.data(), 50) - oracle).norm(), 1e-9 * oracle.norm());
}

TEST(LdlFactorization, RefactorizationReusesThePattern)
{
    RandomQpGenerator gen(5);
    auto K = random_quasi_definite(gen, 20, 10, 0.15);
    LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
    ASSERT_TRUE(f.factorize(K, block_signs(20, 10)).ok());
    const auto pattern = f.symbolic().l_row_idx;
    const auto* storage = f.l_values().data();

    for (double& v : K.values) v *= 1.5;
    ASSERT_TRUE(f.factorize(K, block_signs(20, 10)).ok());
    EXPECT_EQ(f.symbolic().l_row_idx, pattern);
    EXPECT_EQ(f.l_values().data(), storage);
    EXPECT_LE(reconstruction_error(K, f), 1e-10 * max_abs(symmetric_from_upper(K)));
}

TEST(LdlFactorization, InPlaceSolveWithCallerWorkspace)
{
    const auto K = dense_upper({{4, 1, 0}, {1, -3, 1}, {0, 1, -2}});
    LdlFactorization f(symbolic_factorize(K, amd_ordering(K)));
    ASSERT_TRUE(f.factorize(K, std::vector<std::int8_t>{1, -1, -1}).ok());
    std::vector<double> x = {1, 2, 3};
    std::vector<double> work(3);
    f.solve_in_place(x, work);
    const Vec r = symmetric_from_upper(K) * Eigen::Map<Vec>(x.data(), 3) - Vec(Eigen::Vector3d(1, 2, 3));
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-14);
}
