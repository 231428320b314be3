// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/admm.hpp"

#include <cstdint>
#include <vector>

namespace coupled {

struct MatrixCompletionResult {
    Matrix value;
    std::vector<double> objective_trace;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// min 1/2 ||Omega(M - M_hat)||_F^2 + lambda ||M||_tr by ADMM on M = X.
/// Uses opts.beta, opts.max_iters and the tolerances; opts.lambda is ignored.
[[nodiscard]] MatrixCompletionResult complete_matrix_mtn(const Matrix& observed,
                                                         const ObservationMask& mask,
                                                         double lambda,
                                                         const SolverOptions& opts = {});

enum class TensorNorm { Overlapped, ScaledLatent };

/// Tensor-only completion with the overlapped or scaled latent trace norm.
[[nodiscard]] CompletionResult complete_tensor(const DenseTensor3& observed,
                                               const ObservationMask& mask, TensorNorm norm,
                                               double lambda, SolverOptions opts = {});

/// Shared-factor CP model: tensor ~ sum_r A_r o B_r o C_r, matrix ~ A V^T.
struct CpFactors {
    Matrix A, B, C, V;

    [[nodiscard]] Index rank() const { return A.cols(); }
    [[nodiscard]] DenseTensor3 tensor() const;
    [[nodiscard]] Matrix matrix() const { return A * V.transpose(); }
};

struct CpOptions {
    Index rank = 5;
    int iters = 200;
    std::uint64_t seed = 0;
    /// Stop once a sweep lowers the objective by less than tol * previous value.
    double tol = 0.0;
};

struct CpResult {
    CpFactors factors;
    /// Objective at the initial point, then after every sweep.
    std::vector<double> objective_trace;
    /// Row systems that needed the 1e-8 ridge.
    int ridge_events = 0;
    int sweeps = 0;
};

/// ||Omega_T(T_hat - [[A,B,C]])||_F^2 + ||Omega_M(M_hat - A V^T)||_F^2.
[[nodiscard]] double cp_objective(const CpFactors& f, const DenseTensor3& tensor,
                                  const ObservationMask& tensor_mask, const Matrix& matrix,
                                  const ObservationMask& matrix_mask);

/// Masked alternating least squares over A, B, C, V; each row of each
/// factor is an exact least-squares solve. Init is Gaussian / sqrt(R).
[[nodiscard]] CpResult coupled_cp_als(const DenseTensor3& tensor,
                                      const ObservationMask& tensor_mask, const Matrix& matrix,
                                      const ObservationMask& matrix_mask, const CpOptions& opts);

}  // namespace coupled
