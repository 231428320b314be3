// SPDX-License-Identifier: Apache-2.0
#include "coupled/datagen.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace coupled;

namespace {

/// Number of oracle singular values above rel * sigma_1.
Index oracle_rank(const Matrix& x, double rel = 1e-10) {
    const Vector s = oracle::singular_values(x);
    if (s.size() == 0 || s[0] == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i) r += s[i] > rel * s[0];
    return r;
}

/// Sine of the largest principal angle between span(A) and span(B)
/// (both with orthonormal columns, B no wider than A).
double max_principal_sine(const Matrix& a, const Matrix& b) {
    const Matrix residual = b - oracle::multiply(a, oracle::multiply(oracle::transpose(a), b));
    return oracle::spectral_norm(residual);
}

/// Left singular vectors of x belonging to its `count` largest singular
/// values, from the Jacobi eigenvectors of X X^T.
Matrix top_left_vectors(const Matrix& x, Index count) {
    const oracle::EigenPairs e = oracle::jacobi_eigen(oracle::multiply(x, oracle::transpose(x)));
    return e.vectors.leftCols(count);
}

SyntheticSpec small_spec() {
    SyntheticSpec s;
    s.dims = Dims{{8, 7, 6}};
    s.tucker_rank = {3, 2, 2};
    s.matrix_cols = 5;
    s.matrix_rank = 3;
    s.shared = 2;
    s.seed = 99;
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Specs

TEST(SyntheticSpecTest, DefaultsAreValid) { EXPECT_NO_THROW(SyntheticSpec{}.validate()); }

TEST(SyntheticSpecTest, RejectsRankBeyondDimension) {
    SyntheticSpec s = small_spec();
    s.tucker_rank = {9, 2, 2};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = small_spec();
    s.matrix_rank = 6;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = small_spec();
    s.shared = 4;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = small_spec();
    s.noise_std = -1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    EXPECT_THROW((void)gen_tensor(SyntheticSpec{Dims{{2, 2, 2}}, {3, 1, 1}, 2, 1, 1, 0, 1, 0}),
                 std::invalid_argument);
}

TEST(MaskSpecTest, FractionRules) {
    EXPECT_NO_THROW((MaskSpec{0.3, 0.1, 0}.validate()));
    EXPECT_NO_THROW((MaskSpec{0.3, 0.0, 0}.validate()));
    EXPECT_THROW((MaskSpec{0.0, 0.1, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((MaskSpec{1.0, 0.0, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((MaskSpec{0.5, -0.1, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((MaskSpec{0.6, 0.4, 0}.validate()), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Primitives

TEST(RandomPermutation, IsAPermutationAndDeterministic) {
    const auto p = random_permutation(1000, 5);
    std::set<Index> seen(p.begin(), p.end());
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(*seen.begin(), 0);
    EXPECT_EQ(*seen.rbegin(), 999);
    EXPECT_EQ(p, random_permutation(1000, 5));
    EXPECT_NE(p, random_permutation(1000, 6));
}

TEST(RandomPermutation, PositionsAreRoughlyUniform) {
    // Element 0 lands in each of 4 buckets about equally often.
    std::array<int, 4> hits{};
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        const auto p = random_permutation(8, seed);
        const auto at = std::find(p.begin(), p.end(), 0) - p.begin();
        ++hits[static_cast<std::size_t>(at / 2)];
    }
    for (int h : hits) EXPECT_NEAR(h, 1000, 120);
}

TEST(RandomOrthonormal, ColumnsAreOrthonormal) {
    Rng rng(3);
    const Matrix q = random_orthonormal(9, 4, rng);
    EXPECT_LT((oracle::multiply(oracle::transpose(q), q) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(),
              1e-13);
    EXPECT_THROW((void)random_orthonormal(3, 4, rng), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Tensor

TEST(GenTensor, RankOneHasRankOneUnfoldings) {
    SyntheticSpec s = small_spec();
    s.tucker_rank = {1, 1, 1};
    s.shared = 0;
    const DenseTensor3 t = gen_tensor(s);
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, k)), 1) << k;
}

TEST(GenTensor, FullRankHasFullRankUnfoldings) {
    SyntheticSpec s = small_spec();
    s.tucker_rank = {8, 7, 6};
    const DenseTensor3 t = gen_tensor(s);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 1)), 8);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 2)), 7);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 3)), 6);
}

TEST(GenTensor, DefaultSpecHasMultilinearRankFive) {
    SyntheticSpec s;
    s.seed = 4;
    const DenseTensor3 t = gen_tensor(s);
    for (int k = 1; k <= 3; ++k) {
        const Vector sv = oracle::singular_values(oracle::brute_unfold(t, k));
        EXPECT_GT(sv[4], 1e-10 * sv[0]) << k;
        for (Index i = 5; i < sv.size(); ++i) EXPECT_LT(sv[i], 1e-10 * sv[0]) << k;
    }
}

TEST(GenTensor, MixedRank) {
    SyntheticSpec s;
    s.tucker_rank = {5, 15, 5};
    s.seed = 12;
    const DenseTensor3 t = gen_tensor(s);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 1)), 5);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 2)), 15);
    EXPECT_EQ(oracle_rank(oracle::brute_unfold(t, 3)), 5);
}

TEST(GenTensor, SeedDeterminesOutput) {
    const SyntheticSpec s = small_spec();
    EXPECT_EQ(gen_tensor(s), gen_tensor(s));
    SyntheticSpec other = s;
    other.seed = 100;
    EXPECT_NE(gen_tensor(s), gen_tensor(other));
}

// ---------------------------------------------------------------------------
// Coupled matrix

TEST(GenCoupledMatrix, NoSharingKeepsRandomFactors) {
    SyntheticSpec s = small_spec();
    s.shared = 0;
    Rng rng(1);
    const DenseTensor3 t = gen_tensor(s, rng);
    const CoupledMatrixFactors f = gen_coupled_matrix_factors(t, s, rng);
    EXPECT_EQ(f.U.cols(), 3);
    EXPECT_EQ(oracle_rank(f.value()), 3);
    for (Index i = 0; i < 3; ++i) EXPECT_GE(f.S[i], 0.5);
    EXPECT_TRUE(std::is_sorted(f.S.data(), f.S.data() + 3, std::greater<>()));
}

TEST(GenCoupledMatrix, FullSharingCopiesLeftSingularVectors) {
    SyntheticSpec s = small_spec();
    s.tucker_rank = {3, 3, 3};
    s.matrix_rank = 3;
    s.shared = 3;
    Rng rng(2);
    const DenseTensor3 t = gen_tensor(s, rng);
    const CoupledMatrixFactors f = gen_coupled_matrix_factors(t, s, rng);
    const Matrix ut = top_left_vectors(oracle::brute_unfold(t, 1), 3);
    EXPECT_LT(max_principal_sine(ut, f.U), 1e-10);
    EXPECT_LT(max_principal_sine(ut, top_left_vectors(f.value(), 3)), 1e-10);
    const Vector st = oracle::singular_values(oracle::brute_unfold(t, 1));
    const Vector sx = oracle::singular_values(f.value());
    for (Index i = 0; i < 3; ++i) EXPECT_NEAR(sx[i], st[i], 1e-10 * st[0]);
}

TEST(GenCoupledMatrix, SharedDirectionsAreSingularPairsOfTheMatrix) {
    SyntheticSpec s = small_spec();
    Rng rng(3);
    const DenseTensor3 t = gen_tensor(s, rng);
    const CoupledMatrixFactors f = gen_coupled_matrix_factors(t, s, rng);
    const Matrix x = f.value();
    const Matrix t1 = oracle::brute_unfold(t, 1);
    const oracle::EigenPairs e = oracle::jacobi_eigen(oracle::multiply(t1, oracle::transpose(t1)));
    for (Index k = 0; k < s.shared; ++k) {
        const Vector u = e.vectors.col(k);
        const double sigma2 = e.values[k];
        const Vector xxu = oracle::multiply(x, oracle::multiply(oracle::transpose(x), Matrix(u)));
        EXPECT_LT((xxu - sigma2 * u).norm(), 1e-9 * sigma2) << k;
    }
    EXPECT_LT(max_principal_sine(f.U, e.vectors.leftCols(s.shared)), 1e-8);
    EXPECT_LT((oracle::multiply(oracle::transpose(f.U), f.U) - Matrix::Identity(3, 3))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_EQ(oracle_rank(x), s.matrix_rank);
}

TEST(GenCoupledMatrix, FullCouplingCollapsesConcatenatedRank) {
    SyntheticSpec s;
    s.seed = 21;
    const SyntheticInstance inst = gen_instance(s);
    const Matrix t1 = oracle::brute_unfold(inst.clean_tensor, 1);
    Matrix cat(t1.rows(), t1.cols() + inst.clean_matrix.cols());
    cat << t1, inst.clean_matrix;
    EXPECT_EQ(oracle_rank(cat), 5);
}

TEST(GenCoupledMatrix, RejectsTooFewTriplets) {
    SyntheticSpec s = small_spec();
    Rng rng(4);
    DenseTensor3 t(s.dims);
    t(0, 0, 0) = 1.0;
    EXPECT_THROW((void)gen_coupled_matrix(t, s, rng), std::invalid_argument);
    DenseTensor3 wrong(Dims{{5, 7, 6}});
    EXPECT_THROW((void)gen_coupled_matrix(wrong, s, rng), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Noise

TEST(AddNoise, ZeroStdAddsMean) {
    const Matrix x = oracle::random_matrix(3, 4);
    EXPECT_EQ(add_noise(x, 0.25, 0.0, 1), (x.array() + 0.25).matrix());
}

TEST(AddNoise, MomentsMatch) {
    const Matrix noise = add_noise(Matrix::Zero(1000, 1000), 0.0, 1.0, 17);
    double mean = 0.0;
    for (Index p = 0; p < noise.size(); ++p) mean += noise.data()[p];
    mean /= static_cast<double>(noise.size());
    double var = 0.0;
    for (Index p = 0; p < noise.size(); ++p) var += (noise.data()[p] - mean) * (noise.data()[p] - mean);
    var /= static_cast<double>(noise.size() - 1);
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(AddNoise, SeedDeterminesOutput) {
    const DenseTensor3 t = oracle::random_tensor(Dims{{3, 3, 3}});
    EXPECT_EQ(add_noise(t, 0.01, 1.0, 8), add_noise(t, 0.01, 1.0, 8));
    EXPECT_NE(add_noise(t, 0.01, 1.0, 8), add_noise(t, 0.01, 1.0, 9));
    EXPECT_THROW((void)add_noise(t, 0.0, -1.0, 8), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Masks

TEST(GenMasks, StandardSplitCardinalities) {
    const MaskSplit m = gen_masks(Dims{{20, 20, 20}}, MaskSpec{0.3, 0.1, 3});
    EXPECT_EQ(m.train.count(), 2400u);
    EXPECT_EQ(m.validation.count(), 800u);
    EXPECT_EQ(m.test.count(), 4800u);
    EXPECT_FALSE(m.test_empty);
}

TEST(GenMasks, DisjointAndCovering) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MaskSplit m = gen_masks(7, 9, MaskSpec{oracle::uniform(0.05, 0.6), 0.2, seed});
        std::set<Index> all;
        for (const ObservationMask* mask : {&m.train, &m.validation, &m.test})
            for (Index q : mask->indices()) EXPECT_TRUE(all.insert(q).second) << q;
        EXPECT_EQ(all.size(), 63u);
    }
}

TEST(GenMasks, RoundsToNearest) {
    const MaskSplit m = gen_masks(3, 3, MaskSpec{0.5, 0.1, 1});
    EXPECT_EQ(m.train.count(), 5u);
    EXPECT_EQ(m.validation.count(), 1u);
    EXPECT_EQ(m.test.count(), 3u);
}

TEST(GenMasks, TinyShapeFlagsEmptyTest) {
    const MaskSplit m = gen_masks(2, 2, MaskSpec{0.9, 0.0, 1});
    EXPECT_EQ(m.train.count(), 4u);
    EXPECT_TRUE(m.test_empty);
    EXPECT_EQ(m.test.count(), 0u);
}

TEST(GenMasks, RejectsBadFractions) {
    EXPECT_THROW((void)gen_masks(4, 4, MaskSpec{0.7, 0.3, 1}), std::invalid_argument);
    EXPECT_THROW((void)gen_masks(Dims{{2, 2, 2}}, MaskSpec{0.0, 0.3, 1}), std::invalid_argument);
}

TEST(GenMasks, SeedDeterminesSplit) {
    const MaskSplit a = gen_masks(Dims{{5, 5, 5}}, MaskSpec{0.3, 0.1, 4});
    const MaskSplit b = gen_masks(Dims{{5, 5, 5}}, MaskSpec{0.3, 0.1, 4});
    EXPECT_EQ(a.train.indices(), b.train.indices());
    EXPECT_EQ(a.test.indices(), b.test.indices());
}

// ---------------------------------------------------------------------------
// Instances

TEST(GenInstance, IsPureFunctionOfSpec) {
    const SyntheticSpec s = small_spec();
    const SyntheticInstance a = gen_instance(s);
    const SyntheticInstance b = gen_instance(s);
    EXPECT_EQ(a.tensor, b.tensor);
    EXPECT_EQ(a.matrix, b.matrix);
    EXPECT_EQ(a.clean_tensor, b.clean_tensor);
}

TEST(GenInstance, NoiseIsAppliedOnTopOfCleanData) {
    SyntheticSpec s = small_spec();
    s.noise_mean = 0.5;
    s.noise_std = 0.0;
    const SyntheticInstance inst = gen_instance(s);
    EXPECT_LT((inst.tensor.data().array() - inst.clean_tensor.data().array() - 0.5).abs().maxCoeff(),
              1e-15);
    EXPECT_LT((inst.matrix.array() - inst.clean_matrix.array() - 0.5).abs().maxCoeff(), 1e-15);
    EXPECT_EQ(inst.clean_matrix.rows(), 8);
    EXPECT_EQ(inst.clean_matrix.cols(), 5);
}
