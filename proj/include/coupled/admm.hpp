// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/norms.hpp"
#include "coupled/problem.hpp"

#include <cstdint>
#include <vector>

namespace coupled {

struct SolverOptions {
    double lambda = 1.0;  ///< regularization weight, >= 0
    double beta = 1.0;    ///< proximity parameter, > 0
    int max_iters = 2000;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    /// Kept for reproducible runs; the solver itself starts from zero.
    std::uint64_t seed = 0;

    void validate() const;
};

/// Iterate of the splitting. aux/duals are indexed by constraint_slots()
/// order; aux_matrices/matrix_duals by coupling.
struct SolverState {
    std::vector<DenseTensor3> components;
    std::vector<Matrix> matrices;
    std::vector<DenseTensor3> aux;
    std::vector<Matrix> aux_matrices;
    std::vector<DenseTensor3> duals;
    std::vector<Matrix> matrix_duals;
    int iteration = 0;

    /// All-zero state for the given problem and layout.
    static SolverState zeros(const CoupledProblem& problem, const ComponentLayout& layout);
    [[nodiscard]] DenseTensor3 tensor() const;
};

struct CompletionResult {
    DenseTensor3 tensor;
    std::vector<DenseTensor3> components;
    std::vector<Matrix> matrices;
    /// Per iteration: loss + lambda * regularizer at the auxiliary iterates.
    std::vector<double> objective_trace;
    std::vector<double> primal_trace;
    std::vector<double> dual_trace;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;

    [[nodiscard]] const Matrix& matrix() const { return matrices.at(0); }
};

/// M <- (Omega(M_hat) - W^M + beta X) / (omega + beta), elementwise.
void update_matrix(SolverState& state, const CoupledProblem& problem, const SolverOptions& opts);

/// Per entry, solves (omega 1 1^T + beta diag(g)) t = r with
/// r_c = omega T_hat + sum_{s on c} (beta Y_s - W_s).
void update_tensors(SolverState& state, const CoupledProblem& problem,
                    const ComponentLayout& layout, const SolverOptions& opts);

/// Prox step on every slot; returns sum_s scale_s * ||[Y_s; X]||_tr.
double update_auxiliaries(SolverState& state, const ComponentLayout& layout,
                          const SolverOptions& opts);

/// W <- W + beta (primal - auxiliary) for every constraint.
void update_duals(SolverState& state, const ComponentLayout& layout, const SolverOptions& opts);

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
};

/// Max over constraints of ||primal - aux||_F, and of beta * ||aux - previous aux||_F.
[[nodiscard]] Residuals residuals(const SolverState& state, const SolverState& previous,
                                  const ComponentLayout& layout, const SolverOptions& opts);

/// Minimizes the completion objective for d by ADMM. Stops when both
/// residuals fall below tol * max(1, ||observed data||_F); at the iteration
/// cap returns the iterate with the smallest residuals, converged = false.
[[nodiscard]] CompletionResult solve(const CoupledProblem& problem, const NormDescriptor& d,
                                     const SolverOptions& opts);

/// 1/2 ||Omega_T(T - T_hat)||^2 + 1/2 sum_j ||Omega_j(M_j - M_hat_j)||^2.
[[nodiscard]] double completion_loss(const CoupledProblem& problem, const DenseTensor3& t,
                                     std::span<const Matrix> matrices);

/// completion_loss + lambda * evaluate(t, matrices, d).
[[nodiscard]] double objective(const CoupledProblem& problem, const NormDescriptor& d,
                               double lambda, const DenseTensor3& t,
                               std::span<const Matrix> matrices, const EvalOptions& eval = {});

}  // namespace coupled
