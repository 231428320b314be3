// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/tensor.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace coupled {

/// Synthetic coupled instance: a Tucker tensor and a matrix on mode 1
/// sharing `shared` leading left singular directions with its unfolding.
struct SyntheticSpec {
    Dims dims{{20, 20, 20}};
    std::array<Index, 3> tucker_rank{5, 5, 5};
    Index matrix_cols = 30;
    Index matrix_rank = 5;
    Index shared = 5;
    double noise_mean = 0.01;
    double noise_std = 1.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the violated bound.
    void validate() const;
};

/// Fractions of observed-for-training and validation entries; the rest is test.
struct MaskSpec {
    double train = 0.3;
    double validation = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

using Rng = std::mt19937_64;

/// Uniformly random permutation of 0..n-1, identical across platforms.
[[nodiscard]] std::vector<Index> random_permutation(Index n, std::uint64_t seed);

/// n x c matrix with orthonormal columns (Q factor of a Gaussian matrix).
[[nodiscard]] Matrix random_orthonormal(Index n, Index c, Rng& rng);
[[nodiscard]] Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// Tucker tensor with standard normal core and orthonormal factors.
[[nodiscard]] DenseTensor3 gen_tensor(const SyntheticSpec& spec);
[[nodiscard]] DenseTensor3 gen_tensor(const SyntheticSpec& spec, Rng& rng);

struct CoupledMatrixFactors {
    Matrix U;  ///< n1 x r, orthonormal
    Vector S;  ///< r; the shared values first, then the rest descending
    Matrix V;  ///< m x r, orthonormal
    [[nodiscard]] Matrix value() const { return U * S.asDiagonal() * V.transpose(); }
};

/// Rank-r matrix U S V^T whose first `shared` singular values and left
/// vectors are replaced by those of unfold(t, 1). Non-shared singular
/// values are |N(0,1)| + 0.5.
[[nodiscard]] CoupledMatrixFactors gen_coupled_matrix_factors(const DenseTensor3& t,
                                                              const SyntheticSpec& spec, Rng& rng);
[[nodiscard]] Matrix gen_coupled_matrix(const DenseTensor3& t, const SyntheticSpec& spec,
                                        Rng& rng);
[[nodiscard]] Matrix gen_coupled_matrix(const DenseTensor3& t, const SyntheticSpec& spec);

/// x + N(mean, std^2) elementwise. Throws if std < 0.
[[nodiscard]] Matrix add_noise(const Matrix& x, double mean, double std, std::uint64_t seed);
[[nodiscard]] DenseTensor3 add_noise(const DenseTensor3& x, double mean, double std,
                                     std::uint64_t seed);

struct MaskSplit {
    ObservationMask train;
    ObservationMask validation;
    ObservationMask test;
    /// True when rounding left no test entries.
    bool test_empty = false;
};

/// Uniformly random disjoint train / validation / test split of all
/// positions, cardinalities rounded to nearest.
[[nodiscard]] MaskSplit gen_masks(const Dims& dims, const MaskSpec& spec);
[[nodiscard]] MaskSplit gen_masks(Index rows, Index cols, const MaskSpec& spec);

/// A complete noisy instance with its clean ground truth.
struct SyntheticInstance {
    DenseTensor3 clean_tensor;
    Matrix clean_matrix;
    DenseTensor3 tensor;
    Matrix matrix;
};

/// Tensor, coupled matrix and noise, all drawn from spec.seed.
[[nodiscard]] SyntheticInstance gen_instance(const SyntheticSpec& spec);

}  // namespace coupled
