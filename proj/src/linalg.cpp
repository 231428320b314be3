// SPDX-License-Identifier: Apache-2.0
#include "coupled/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace coupled {

namespace {

void require_finite(const Matrix& x, const char* what) {
    if (!x.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace

SvdFactors svd(const Matrix& x) {
    require_finite(x, "svd");
    const Index r = std::min(x.rows(), x.cols());
    if (r == 0)
        return {Matrix::Zero(x.rows(), 0), Vector::Zero(0), Matrix::Zero(x.cols(), 0)};
    Eigen::BDCSVD<Matrix> dec(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) throw ConvergenceError("svd: decomposition failed");
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Vector singular_values(const Matrix& x) {
    require_finite(x, "singular_values");
    if (x.size() == 0) return Vector::Zero(0);
    Eigen::BDCSVD<Matrix> dec(x);
    if (dec.info() != Eigen::Success) throw ConvergenceError("svd: decomposition failed");
    return dec.singularValues();
}

double trace_norm(const Matrix& x) { return singular_values(x).sum(); }

double spectral_norm(const Matrix& x) {
    Vector s = singular_values(x);
    return s.size() == 0 ? 0.0 : s[0];
}

Index numerical_rank(const Matrix& x, double rel_tol) {
    Vector s = singular_values(x);
    if (s.size() == 0 || s[0] == 0.0) return 0;
    return (s.array() > rel_tol * s[0]).count();
}

Matrix svt(const Matrix& x, double tau) { return svt_with_norm(x, tau).value; }

// Works on the Gram matrix of the short side: for A with rows <= cols,
// A A^T = U diag(sigma^2) U^T and the prox is U diag((sigma - tau)_+ / sigma) U^T A.
// Only U and sigma are needed, so the long side is never factored.
SvtResult svt_with_norm(const Matrix& x, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("svt: threshold must be non-negative");
    require_finite(x, "svt");
    if (x.size() == 0) return {x, 0.0};

    const bool wide = x.rows() <= x.cols();
    const Matrix gram = wide ? Matrix(x * x.transpose()) : Matrix(x.transpose() * x);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.info() != Eigen::Success) throw ConvergenceError("svt: eigensolver failed");

    const Vector& ev = eig.eigenvalues();  // ascending
    const Index n = ev.size();
    Index first_kept = n;
    double norm = 0.0;
    Vector shrink(n);
    for (Index i = n - 1; i >= 0; --i) {
        const double sigma = std::sqrt(std::max(ev[i], 0.0));
        if (sigma > tau) {
            shrink[i] = (sigma - tau) / sigma;
            norm += sigma - tau;
            first_kept = i;
        } else {
            break;
        }
    }
    if (tau == 0.0) return {x, norm};

    const Index kept = n - first_kept;
    if (kept == 0) return {Matrix::Zero(x.rows(), x.cols()), 0.0};
    const auto basis = eig.eigenvectors().rightCols(kept);
    const auto f = shrink.tail(kept).asDiagonal();
    Matrix value = wide ? Matrix(basis * (f * (basis.transpose() * x)))
                        : Matrix((x * basis) * f * basis.transpose());
    return {std::move(value), norm};
}

}  // namespace coupled
