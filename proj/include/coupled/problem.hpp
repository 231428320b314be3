// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/tensor.hpp"

#include <vector>

namespace coupled {

/// A partially observed matrix attached to one tensor mode.
struct MatrixBlock {
    int mode = 1;
    Matrix observed;
    ObservationMask mask;
};

/// Observed tensor plus zero or more coupled matrices.
struct CoupledProblem {
    DenseTensor3 tensor;
    ObservationMask tensor_mask;
    std::vector<MatrixBlock> matrices;

    /// Tensor coupled with one matrix on `mode`.
    static CoupledProblem coupled(DenseTensor3 tensor, ObservationMask tensor_mask,
                                  Matrix matrix, ObservationMask matrix_mask, int mode = 1);
    static CoupledProblem tensor_only(DenseTensor3 tensor, ObservationMask tensor_mask);

    /// Throws std::invalid_argument on shape mismatches.
    void validate() const;

    [[nodiscard]] const Dims& dims() const { return tensor.dims(); }
    /// Frobenius norm of all observed values.
    [[nodiscard]] double observed_norm() const;
};

}  // namespace coupled
