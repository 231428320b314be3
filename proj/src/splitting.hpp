// SPDX-License-Identifier: Apache-2.0
#pragma once

// Proximal step shared by the norm evaluator and the completion solver.

#include "coupled/linalg.hpp"
#include "coupled/norms.hpp"

namespace coupled::detail {

struct ProxOutput {
    DenseTensor3 aux;
    Matrix aux_matrix;  // empty unless the slot is coupled
    double trace_norm = 0.0;
};

/// prox_{threshold * ||.||_tr} of unfold(primal + dual / beta, slot.mode),
/// with [.; matrix + matrix_dual / beta] appended when the slot is coupled.
inline ProxOutput prox_slot(const ConstraintSlot& slot, const DenseTensor3& primal,
                            const DenseTensor3& dual, const Matrix* matrix,
                            const Matrix* matrix_dual, double beta, double threshold) {
    DenseTensor3 shifted = primal;
    shifted.data() += dual.data() / beta;
    Matrix arg = unfold(shifted, slot.mode);
    const Index tensor_cols = arg.cols();
    if (slot.coupling >= 0) arg = concat_mode1(arg, *matrix + *matrix_dual / beta);

    SvtResult z = svt_with_norm(arg, threshold);
    ProxOutput out;
    out.aux = fold(z.value.leftCols(tensor_cols), slot.mode, primal.dims());
    if (slot.coupling >= 0) out.aux_matrix = z.value.rightCols(arg.cols() - tensor_cols);
    out.trace_norm = z.trace_norm;
    return out;
}

}  // namespace coupled::detail
