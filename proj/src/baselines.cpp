// SPDX-License-Identifier: Apache-2.0
#include "coupled/baselines.hpp"

#include "coupled/datagen.hpp"
#include "coupled/linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace coupled {

MatrixCompletionResult complete_matrix_mtn(const Matrix& observed, const ObservationMask& mask,
                                           double lambda, const SolverOptions& opts) {
    SolverOptions o = opts;
    o.lambda = lambda;
    o.validate();
    mask.require_shape(observed.rows(), observed.cols());

    const Matrix target = mask_apply(observed, mask);
    const Matrix omega =
        Eigen::Map<const Matrix>(mask.indicator().data(), observed.rows(), observed.cols());
    const double scale = std::max(1.0, target.norm());
    const double beta = o.beta;

    Matrix m = Matrix::Zero(observed.rows(), observed.cols());
    Matrix x = m, w = m;
    MatrixCompletionResult best;
    double best_score = std::numeric_limits<double>::infinity();
    MatrixCompletionResult r;
    for (int it = 1; it <= o.max_iters; ++it) {
        m = (target - w + beta * x).array() / (omega.array() + beta);
        const Matrix x_prev = x;
        SvtResult z = svt_with_norm(m + w / beta, lambda / beta);
        x = std::move(z.value);
        w += beta * (m - x);

        const double primal = (m - x).norm();
        const double dual = beta * (x - x_prev).norm();
        const Matrix resid = (omega.array() * (m - observed).array()).matrix();
        r.objective_trace.push_back(0.5 * resid.squaredNorm() + lambda * z.trace_norm);
        const double score = std::max(primal / o.tol_primal, dual / o.tol_dual) / scale;
        const bool done = score <= 1.0;
        if (done || score < best_score) {
            best_score = score;
            best.value = m;
            best.primal_residual = primal;
            best.dual_residual = dual;
        }
        if (done) {
            r.converged = true;
            break;
        }
    }
    r.value = std::move(best.value);
    r.primal_residual = best.primal_residual;
    r.dual_residual = best.dual_residual;
    r.iterations = static_cast<int>(r.objective_trace.size());
    return r;
}

CompletionResult complete_tensor(const DenseTensor3& observed, const ObservationMask& mask,
                                 TensorNorm norm, double lambda, SolverOptions opts) {
    opts.lambda = lambda;
    const CoupledProblem p = CoupledProblem::tensor_only(observed, mask);
    const Tag tag = norm == TensorNorm::Overlapped ? Tag::Overlapped : Tag::ScaledLatent;
    NormDescriptor d;
    d.tags = {tag, tag, tag};
    return solve(p, d, opts);
}

// ---------------------------------------------------------------------------
// Coupled CP

DenseTensor3 CpFactors::tensor() const {
    const Dims dims{{A.rows(), B.rows(), C.rows()}};
    // unfold_1 = A (C kr B)^T with the Khatri-Rao product in mode-1 column order.
    Matrix kr(B.rows() * C.rows(), rank());
    for (Index l = 0; l < C.rows(); ++l)
        for (Index j = 0; j < B.rows(); ++j)
            kr.row(j + B.rows() * l) = B.row(j).cwiseProduct(C.row(l));
    return fold(A * kr.transpose(), 1, dims);
}

namespace {

struct Entry {
    std::array<Index, 3> idx;
    double value;
};

std::vector<Entry> tensor_entries(const DenseTensor3& t, const ObservationMask& mask) {
    const Index n1 = t.dims()[0], n2 = t.dims()[1];
    std::vector<Entry> out;
    out.reserve(mask.count());
    for (Index p : mask.indices())
        out.push_back({{p % n1, (p / n1) % n2, p / (n1 * n2)}, t.data()[p]});
    return out;
}

/// Accumulates per-row normal equations and solves them.
class RowSystems {
public:
    RowSystems(Index rows, Index rank)
        : gram_(static_cast<std::size_t>(rows), Matrix::Zero(rank, rank)),
          rhs_(static_cast<std::size_t>(rows), Vector::Zero(rank)) {}

    void add(Index row, const Eigen::RowVectorXd& z, double y) {
        gram_[static_cast<std::size_t>(row)].noalias() += z.transpose() * z;
        rhs_[static_cast<std::size_t>(row)].noalias() += y * z.transpose();
    }

    /// Writes solutions into `factor`; returns the number of ridged rows.
    int solve_into(Matrix& factor) const {
        constexpr double kRidge = 1e-8;
        int ridged = 0;
        for (std::size_t i = 0; i < gram_.size(); ++i) {
            const Matrix& g = gram_[i];
            Eigen::LLT<Matrix> llt(g);
            bool ok = llt.info() == Eigen::Success;
            if (ok) ok = llt.rcond() >= 1e-12;
            if (ok) {
                factor.row(static_cast<Index>(i)) = llt.solve(rhs_[i]).transpose();
            } else {
                ++ridged;
                const Matrix reg = g + kRidge * Matrix::Identity(g.rows(), g.cols());
                factor.row(static_cast<Index>(i)) = reg.llt().solve(rhs_[i]).transpose();
            }
        }
        return ridged;
    }

private:
    std::vector<Matrix> gram_;
    std::vector<Vector> rhs_;
};

}  // namespace

double cp_objective(const CpFactors& f, const DenseTensor3& tensor,
                    const ObservationMask& tensor_mask, const Matrix& matrix,
                    const ObservationMask& matrix_mask) {
    double obj = 0.0;
    for (const Entry& e : tensor_entries(tensor, tensor_mask)) {
        const double fit = (f.A.row(e.idx[0]).cwiseProduct(f.B.row(e.idx[1])))
                               .cwiseProduct(f.C.row(e.idx[2]))
                               .sum();
        obj += (e.value - fit) * (e.value - fit);
    }
    const Index rows = matrix.rows();
    for (Index p : matrix_mask.indices()) {
        const Index i = p % rows, q = p / rows;
        const double r = matrix.data()[p] - f.A.row(i).dot(f.V.row(q));
        obj += r * r;
    }
    return obj;
}

CpResult coupled_cp_als(const DenseTensor3& tensor, const ObservationMask& tensor_mask,
                        const Matrix& matrix, const ObservationMask& matrix_mask,
                        const CpOptions& opts) {
    if (opts.rank < 1) throw std::invalid_argument("CP rank must be >= 1");
    if (opts.iters < 0) throw std::invalid_argument("CP iterations must be >= 0");
    tensor_mask.require_shape(tensor.dims());
    matrix_mask.require_shape(matrix.rows(), matrix.cols());
    const Dims& dims = tensor.dims();
    if (matrix.rows() != dims[0])
        throw std::invalid_argument("matrix rows must equal tensor mode-1 size");

    const Index R = opts.rank;
    Rng rng(opts.seed);
    const double init_scale = 1.0 / std::sqrt(static_cast<double>(R));
    CpResult res;
    CpFactors& f = res.factors;
    f.A = gaussian_matrix(dims[0], R, rng) * init_scale;
    f.B = gaussian_matrix(dims[1], R, rng) * init_scale;
    f.C = gaussian_matrix(dims[2], R, rng) * init_scale;
    f.V = gaussian_matrix(matrix.cols(), R, rng) * init_scale;

    const std::vector<Entry> entries = tensor_entries(tensor, tensor_mask);
    const Index rows = matrix.rows();
    auto objective = [&] { return cp_objective(f, tensor, tensor_mask, matrix, matrix_mask); };
    res.objective_trace.push_back(objective());

    for (int sweep = 0; sweep < opts.iters; ++sweep) {
        {
            RowSystems sys(dims[0], R);
            for (const Entry& e : entries)
                sys.add(e.idx[0], f.B.row(e.idx[1]).cwiseProduct(f.C.row(e.idx[2])), e.value);
            for (Index p : matrix_mask.indices())
                sys.add(p % rows, f.V.row(p / rows), matrix.data()[p]);
            res.ridge_events += sys.solve_into(f.A);
        }
        {
            RowSystems sys(dims[1], R);
            for (const Entry& e : entries)
                sys.add(e.idx[1], f.A.row(e.idx[0]).cwiseProduct(f.C.row(e.idx[2])), e.value);
            res.ridge_events += sys.solve_into(f.B);
        }
        {
            RowSystems sys(dims[2], R);
            for (const Entry& e : entries)
                sys.add(e.idx[2], f.A.row(e.idx[0]).cwiseProduct(f.B.row(e.idx[1])), e.value);
            res.ridge_events += sys.solve_into(f.C);
        }
        {
            RowSystems sys(matrix.cols(), R);
            for (Index p : matrix_mask.indices())
                sys.add(p / rows, f.A.row(p % rows), matrix.data()[p]);
            res.ridge_events += sys.solve_into(f.V);
        }
        const double obj = objective();
        const double prev = res.objective_trace.back();
        res.objective_trace.push_back(obj);
        res.sweeps = sweep + 1;
        if (opts.tol > 0.0 && prev - obj < opts.tol * prev) break;
    }
    return res;
}

}  // namespace coupled
