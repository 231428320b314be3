// SPDX-License-Identifier: Apache-2.0
#include "coupled/admm.hpp"

#include "coupled/linalg.hpp"
#include "splitting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace coupled {

// ---------------------------------------------------------------------------
// CoupledProblem

CoupledProblem CoupledProblem::coupled(DenseTensor3 tensor, ObservationMask tensor_mask,
                                       Matrix matrix, ObservationMask matrix_mask, int mode) {
    CoupledProblem p{std::move(tensor), std::move(tensor_mask), {}};
    p.matrices.push_back({mode, std::move(matrix), std::move(matrix_mask)});
    p.validate();
    return p;
}

CoupledProblem CoupledProblem::tensor_only(DenseTensor3 tensor, ObservationMask tensor_mask) {
    CoupledProblem p{std::move(tensor), std::move(tensor_mask), {}};
    p.validate();
    return p;
}

void CoupledProblem::validate() const {
    tensor_mask.require_shape(tensor.dims());
    for (std::size_t j = 0; j < matrices.size(); ++j) {
        const MatrixBlock& b = matrices[j];
        if (b.observed.rows() != tensor.dims().mode(b.mode))
            throw std::invalid_argument("matrix " + std::to_string(j + 1) + " has " +
                                        std::to_string(b.observed.rows()) +
                                        " rows but tensor mode " + std::to_string(b.mode) +
                                        " has size " + std::to_string(tensor.dims().mode(b.mode)));
        b.mask.require_shape(b.observed.rows(), b.observed.cols());
        for (std::size_t i = 0; i < j; ++i)
            if (matrices[i].mode == b.mode)
                throw std::invalid_argument("two matrices coupled on mode " +
                                            std::to_string(b.mode));
    }
}

double CoupledProblem::observed_norm() const {
    double sq = mask_apply(tensor, tensor_mask).data().squaredNorm();
    for (const MatrixBlock& b : matrices) sq += mask_apply(b.observed, b.mask).squaredNorm();
    return std::sqrt(sq);
}

// ---------------------------------------------------------------------------

void SolverOptions::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0))
        throw std::invalid_argument("tolerances must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

SolverState SolverState::zeros(const CoupledProblem& problem, const ComponentLayout& layout) {
    SolverState s;
    const Dims& dims = problem.dims();
    s.components.assign(layout.size(), DenseTensor3(dims));
    const std::size_t n_slots = constraint_slots(layout).size();
    s.aux.assign(n_slots, DenseTensor3(dims));
    s.duals.assign(n_slots, DenseTensor3(dims));
    for (const MatrixBlock& b : problem.matrices) {
        const Matrix zero = Matrix::Zero(b.observed.rows(), b.observed.cols());
        s.matrices.push_back(zero);
        s.aux_matrices.push_back(zero);
        s.matrix_duals.push_back(zero);
    }
    return s;
}

DenseTensor3 SolverState::tensor() const {
    DenseTensor3 t(components.at(0).dims());
    for (const DenseTensor3& c : components) t += c;
    return t;
}

void update_matrix(SolverState& state, const CoupledProblem& problem, const SolverOptions& opts) {
    for (std::size_t j = 0; j < problem.matrices.size(); ++j) {
        const MatrixBlock& b = problem.matrices[j];
        const Matrix omega = Eigen::Map<const Matrix>(b.mask.indicator().data(),
                                                      b.observed.rows(), b.observed.cols());
        const Matrix rhs = mask_apply(b.observed, b.mask) - state.matrix_duals[j] +
                           opts.beta * state.aux_matrices[j];
        state.matrices[j] = rhs.array() / (omega.array() + opts.beta);
    }
}

void update_tensors(SolverState& state, const CoupledProblem& problem,
                    const ComponentLayout& layout, const SolverOptions& opts) {
    const std::vector<ConstraintSlot> slots = constraint_slots(layout);
    const std::size_t n_comp = layout.size();
    const double beta = opts.beta;
    const Vector omega = problem.tensor_mask.indicator();
    const Vector observed = mask_apply(problem.tensor, problem.tensor_mask).data();

    // Sherman-Morrison on beta diag(g) + omega 1 1^T, entry by entry.
    std::vector<Vector> base(n_comp);
    Vector base_sum = Vector::Zero(observed.size());
    double h = 0.0;
    for (std::size_t c = 0; c < n_comp; ++c) {
        Vector rhs = observed;
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (static_cast<std::size_t>(slots[s].component) == c)
                rhs += beta * state.aux[s].data() - state.duals[s].data();
        const double bg = beta * layout.attached(c);
        base[c] = rhs / bg;
        base_sum += base[c];
        h += 1.0 / bg;
    }
    const Vector correction = (omega.array() * base_sum.array() / (1.0 + omega.array() * h)).matrix();
    for (std::size_t c = 0; c < n_comp; ++c) {
        const double bg = beta * layout.attached(c);
        state.components[c].data() = base[c] - correction / bg;
    }
}

double update_auxiliaries(SolverState& state, const ComponentLayout& layout,
                          const SolverOptions& opts) {
    const std::vector<ConstraintSlot> slots = constraint_slots(layout);
    double regularizer = 0.0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const ConstraintSlot& slot = slots[s];
        const auto j = static_cast<std::size_t>(slot.coupling);
        const bool coupled = slot.coupling >= 0;
        detail::ProxOutput p = detail::prox_slot(
            slot, state.components[static_cast<std::size_t>(slot.component)], state.duals[s],
            coupled ? &state.matrices[j] : nullptr, coupled ? &state.matrix_duals[j] : nullptr,
            opts.beta, opts.lambda * slot.scale / opts.beta);
        state.aux[s] = std::move(p.aux);
        if (coupled) state.aux_matrices[j] = std::move(p.aux_matrix);
        regularizer += slot.scale * p.trace_norm;
    }
    return regularizer;
}

void update_duals(SolverState& state, const ComponentLayout& layout, const SolverOptions& opts) {
    const std::vector<ConstraintSlot> slots = constraint_slots(layout);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const DenseTensor3& part = state.components[static_cast<std::size_t>(slots[s].component)];
        state.duals[s].data() += opts.beta * (part.data() - state.aux[s].data());
    }
    for (std::size_t j = 0; j < state.matrices.size(); ++j)
        state.matrix_duals[j] += opts.beta * (state.matrices[j] - state.aux_matrices[j]);
}

Residuals residuals(const SolverState& state, const SolverState& previous,
                    const ComponentLayout& layout, const SolverOptions& opts) {
    const std::vector<ConstraintSlot> slots = constraint_slots(layout);
    Residuals r;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const DenseTensor3& part = state.components[static_cast<std::size_t>(slots[s].component)];
        r.primal = std::max(r.primal, (part.data() - state.aux[s].data()).norm());
        r.dual = std::max(r.dual, opts.beta * (state.aux[s].data() - previous.aux[s].data()).norm());
    }
    for (std::size_t j = 0; j < state.matrices.size(); ++j) {
        r.primal = std::max(r.primal, (state.matrices[j] - state.aux_matrices[j]).norm());
        r.dual = std::max(r.dual,
                          opts.beta * (state.aux_matrices[j] - previous.aux_matrices[j]).norm());
    }
    return r;
}

double completion_loss(const CoupledProblem& problem, const DenseTensor3& t,
                       std::span<const Matrix> matrices) {
    if (matrices.size() != problem.matrices.size())
        throw std::invalid_argument("completion_loss: wrong number of matrices");
    double loss = 0.0;
    for (Index p : problem.tensor_mask.indices()) {
        const double r = t.data()[p] - problem.tensor.data()[p];
        loss += r * r;
    }
    for (std::size_t j = 0; j < matrices.size(); ++j) {
        const MatrixBlock& b = problem.matrices[j];
        if (matrices[j].rows() != b.observed.rows() || matrices[j].cols() != b.observed.cols())
            throw std::invalid_argument("completion_loss: matrix shape mismatch");
        for (Index p : b.mask.indices()) {
            const double r = matrices[j].data()[p] - b.observed.data()[p];
            loss += r * r;
        }
    }
    return 0.5 * loss;
}

double objective(const CoupledProblem& problem, const NormDescriptor& d, double lambda,
                 const DenseTensor3& t, std::span<const Matrix> matrices,
                 const EvalOptions& eval) {
    const double loss = completion_loss(problem, t, matrices);
    return lambda == 0.0 ? loss : loss + lambda * evaluate(t, matrices, d, eval);
}

namespace {

void require_match(const CoupledProblem& problem, const NormDescriptor& d) {
    if (!is_solver_supported(d))
        throw std::invalid_argument(to_string(d) + ": not supported by the completion solver");
    if (d.coupled_modes.size() != problem.matrices.size())
        throw std::invalid_argument(to_string(d) + ": descriptor couples " +
                                    std::to_string(d.coupled_modes.size()) +
                                    " matrices, problem has " +
                                    std::to_string(problem.matrices.size()));
    for (std::size_t j = 0; j < problem.matrices.size(); ++j)
        if (problem.matrices[j].mode != d.coupled_modes[j])
            throw std::invalid_argument(to_string(d) + ": coupled mode order differs from problem");
}

}  // namespace

CompletionResult solve(const CoupledProblem& problem, const NormDescriptor& d,
                       const SolverOptions& opts) {
    opts.validate();
    problem.validate();
    require_match(problem, d);

    const ComponentLayout lay = layout(d, problem.dims());
    const double scale = std::max(1.0, problem.observed_norm());
    const double tol_p = opts.tol_primal * scale;
    const double tol_d = opts.tol_dual * scale;

    SolverState state = SolverState::zeros(problem, lay);
    SolverState best = state;
    double best_score = std::numeric_limits<double>::infinity();
    Residuals best_res{std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};

    CompletionResult result;
    result.objective_trace.reserve(static_cast<std::size_t>(opts.max_iters));
    for (int it = 1; it <= opts.max_iters; ++it) {
        std::vector<DenseTensor3> prev_aux = state.aux;
        std::vector<Matrix> prev_aux_m = state.aux_matrices;

        update_matrix(state, problem, opts);
        update_tensors(state, problem, lay, opts);
        const double reg = update_auxiliaries(state, lay, opts);
        update_duals(state, lay, opts);
        state.iteration = it;

        SolverState prev_view;
        prev_view.aux = std::move(prev_aux);
        prev_view.aux_matrices = std::move(prev_aux_m);
        const Residuals r = residuals(state, prev_view, lay, opts);

        result.objective_trace.push_back(
            completion_loss(problem, state.tensor(), state.matrices) + opts.lambda * reg);
        result.primal_trace.push_back(r.primal);
        result.dual_trace.push_back(r.dual);

        const bool done = r.primal <= tol_p && r.dual <= tol_d;
        const double score = std::max(r.primal / tol_p, r.dual / tol_d);
        if (done || score < best_score) {
            best_score = score;
            best_res = r;
            best.components = state.components;
            best.matrices = state.matrices;
            best.iteration = it;
        }
        if (done) {
            result.converged = true;
            break;
        }
    }

    result.iterations = static_cast<int>(result.objective_trace.size());
    result.components = std::move(best.components);
    result.matrices = std::move(best.matrices);
    result.tensor = DenseTensor3(problem.dims());
    for (const DenseTensor3& c : result.components) result.tensor += c;
    result.primal_residual = best_res.primal;
    result.dual_residual = best_res.dual;
    return result;
}

}  // namespace coupled
