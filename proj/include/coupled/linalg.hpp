// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/tensor.hpp"

#include <stdexcept>

namespace coupled {

/// Raised when an iterative numerical routine fails to converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thin SVD X = U diag(S) V^T with S sorted descending.
struct SvdFactors {
    Matrix U;
    Vector S;
    Matrix V;
};

/// Thin SVD. Throws on non-finite input or if the decomposition fails.
[[nodiscard]] SvdFactors svd(const Matrix& x);

/// Singular values only, descending.
[[nodiscard]] Vector singular_values(const Matrix& x);

[[nodiscard]] double trace_norm(const Matrix& x);
[[nodiscard]] double spectral_norm(const Matrix& x);

/// Number of singular values above rel_tol * sigma_1.
[[nodiscard]] Index numerical_rank(const Matrix& x, double rel_tol = 1e-12);

/// Singular value thresholding U (S - tau)_+ V^T: the proximal operator of
/// tau * ||.||_tr.
[[nodiscard]] Matrix svt(const Matrix& x, double tau);

struct SvtResult {
    Matrix value;
    /// Trace norm of value.
    double trace_norm = 0.0;
};

/// svt() that also reports the trace norm of its output.
[[nodiscard]] SvtResult svt_with_norm(const Matrix& x, double tau);

}  // namespace coupled
