// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/datagen.hpp"

#include <array>
#include <string>
#include <string_view>

namespace coupled {

/// Norms with an excess-risk bound: the coupled OOO, SSS, LLL and SOO norms
/// (matrix on mode 1), and the uncoupled matrix (MTN) and tensor (OTN, LTN,
/// SLTN) norms.
enum class BoundNorm { OOO, SSS, LLL, SOO, MTN, OTN, LTN, SLTN };

[[nodiscard]] BoundNorm parse_bound_norm(std::string_view id);
[[nodiscard]] std::string to_string(BoundNorm n);
inline constexpr std::array<BoundNorm, 8> kAllBoundNorms{
    BoundNorm::OOO, BoundNorm::SSS, BoundNorm::LLL, BoundNorm::SOO,
    BoundNorm::MTN, BoundNorm::OTN, BoundNorm::LTN, BoundNorm::SLTN};

struct BoundParams {
    std::array<double, 3> n{20, 20, 20};  ///< tensor dims
    double m = 30;                        ///< matrix columns
    std::array<double, 3> rank{5, 5, 5};  ///< multilinear rank (r1, r2, r3)
    double coupled_rank = 5;              ///< rank of [T_(1); M]
    double matrix_rank = 5;               ///< rank of M, used by MTN
    double B_T = 1.0;
    double B_M = 1.0;
    double Lambda = 1.0;
    /// Training sample count of the coupled problem.
    double samples = 1.0;
    /// Sample counts for the uncoupled bounds; <= 0 falls back to `samples`.
    double tensor_samples = 0.0;
    double matrix_samples = 0.0;
    double C1 = 1.0, C2 = 1.0;
    double c = 1.0, c1 = 1.0, c2 = 1.0, c3 = 1.0;

    /// Throws std::invalid_argument on non-positive dims/samples/Lambda,
    /// negative caps, or ranks exceeding their dimensions.
    void validate() const;
};

/// Closed-form excess-risk bound R(W) for `norm` at params p.
[[nodiscard]] double bound(BoundNorm norm, const BoundParams& p);

/// Ranks and Frobenius caps measured on a concrete (tensor, matrix) pair.
/// Numerical ranks use singular values above rel_tol * sigma_1.
[[nodiscard]] BoundParams rank_geometry(const DenseTensor3& t, const Matrix& m,
                                        BoundParams base = {}, double rel_tol = 1e-10);

/// rank_geometry on the clean instance generated from spec.
[[nodiscard]] BoundParams rank_geometry(const SyntheticSpec& spec, BoundParams base = {},
                                        double rel_tol = 1e-10);

}  // namespace coupled
