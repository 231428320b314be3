// SPDX-License-Identifier: Apache-2.0
#include "coupled/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace coupled {

namespace {

std::string dims_str(const Dims& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

void require_same_dims(const DenseTensor3& a, const DenseTensor3& b, const char* what) {
    if (a.dims() != b.dims())
        throw std::invalid_argument(std::string(what) + ": dims " + dims_str(a.dims()) +
                                    " vs " + dims_str(b.dims()));
}

}  // namespace

void require_mode(int k) {
    if (k < 1 || k > 3)
        throw std::invalid_argument("mode index must be 1, 2 or 3, got " + std::to_string(k));
}

Index Dims::mode(int k) const {
    require_mode(k);
    return n[static_cast<std::size_t>(k - 1)];
}

DenseTensor3::DenseTensor3(Dims dims) : dims_(dims), data_(Vector::Zero(dims.total())) {
    for (Index v : dims.n)
        if (v <= 0) throw std::invalid_argument("tensor dims must be positive");
}

DenseTensor3::DenseTensor3(Dims dims, Vector data) : dims_(dims), data_(std::move(data)) {
    for (Index v : dims.n)
        if (v <= 0) throw std::invalid_argument("tensor dims must be positive");
    if (data_.size() != dims.total())
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match dims " + dims_str(dims));
}

DenseTensor3 DenseTensor3::constant(Dims dims, double value) {
    return DenseTensor3(dims, Vector::Constant(dims.total(), value));
}

DenseTensor3& DenseTensor3::operator+=(const DenseTensor3& other) {
    require_same_dims(*this, other, "tensor +=");
    data_ += other.data_;
    return *this;
}

DenseTensor3& DenseTensor3::operator-=(const DenseTensor3& other) {
    require_same_dims(*this, other, "tensor -=");
    data_ -= other.data_;
    return *this;
}

DenseTensor3& DenseTensor3::operator*=(double alpha) {
    data_ *= alpha;
    return *this;
}

// ---------------------------------------------------------------------------

ObservationMask::ObservationMask(std::vector<Index> shape, std::vector<Index> linear)
    : shape_(std::move(shape)), indices_(std::move(linear)) {
    Index n = total();
    std::sort(indices_.begin(), indices_.end());
    for (std::size_t p = 0; p < indices_.size(); ++p) {
        if (indices_[p] < 0 || indices_[p] >= n)
            throw std::out_of_range("mask index " + std::to_string(indices_[p]) +
                                    " outside shape of " + std::to_string(n) + " entries");
        if (p > 0 && indices_[p] == indices_[p - 1])
            throw std::invalid_argument("duplicate mask index " + std::to_string(indices_[p]));
    }
}

ObservationMask ObservationMask::for_tensor(const Dims& dims, std::vector<Index> linear) {
    return ObservationMask({dims[0], dims[1], dims[2]}, std::move(linear));
}

ObservationMask ObservationMask::for_matrix(Index rows, Index cols, std::vector<Index> linear) {
    return ObservationMask({rows, cols}, std::move(linear));
}

ObservationMask ObservationMask::full_tensor(const Dims& dims) {
    std::vector<Index> all(static_cast<std::size_t>(dims.total()));
    for (Index p = 0; p < dims.total(); ++p) all[static_cast<std::size_t>(p)] = p;
    return for_tensor(dims, std::move(all));
}

ObservationMask ObservationMask::full_matrix(Index rows, Index cols) {
    std::vector<Index> all(static_cast<std::size_t>(rows * cols));
    for (Index p = 0; p < rows * cols; ++p) all[static_cast<std::size_t>(p)] = p;
    return for_matrix(rows, cols, std::move(all));
}

Index ObservationMask::total() const {
    Index n = 1;
    for (Index s : shape_) n *= s;
    return shape_.empty() ? 0 : n;
}

bool ObservationMask::contains(Index linear) const {
    return std::binary_search(indices_.begin(), indices_.end(), linear);
}

Vector ObservationMask::indicator() const {
    Vector w = Vector::Zero(total());
    for (Index p : indices_) w[p] = 1.0;
    return w;
}

void ObservationMask::require_shape(const Dims& dims) const {
    if (shape_ != std::vector<Index>{dims[0], dims[1], dims[2]})
        throw std::invalid_argument("mask shape does not match tensor dims " + dims_str(dims));
}

void ObservationMask::require_shape(Index rows, Index cols) const {
    if (shape_ != std::vector<Index>{rows, cols})
        throw std::invalid_argument("mask shape does not match matrix " + std::to_string(rows) +
                                    "x" + std::to_string(cols));
}

// ---------------------------------------------------------------------------

Matrix unfold(const DenseTensor3& t, int k) {
    require_mode(k);
    const Index n1 = t.dims()[0], n2 = t.dims()[1], n3 = t.dims()[2];
    const Vector& d = t.data();
    switch (k) {
        case 1:
            return Eigen::Map<const Matrix>(d.data(), n1, n2 * n3);
        case 2: {
            Matrix out(n2, n1 * n3);
            for (Index l = 0; l < n3; ++l)
                for (Index j = 0; j < n2; ++j)
                    for (Index i = 0; i < n1; ++i) out(j, i + n1 * l) = d[i + n1 * (j + n2 * l)];
            return out;
        }
        default:
            return Eigen::Map<const Matrix>(d.data(), n1 * n2, n3).transpose();
    }
}

DenseTensor3 fold(const Matrix& mk, int k, const Dims& dims) {
    require_mode(k);
    const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
    const Index rows = dims.mode(k);
    if (mk.rows() != rows || mk.cols() != dims.total() / rows)
        throw std::invalid_argument("fold: matrix " + std::to_string(mk.rows()) + "x" +
                                    std::to_string(mk.cols()) + " does not match mode-" +
                                    std::to_string(k) + " unfolding of " + dims_str(dims));
    DenseTensor3 t(dims);
    Vector& d = t.data();
    switch (k) {
        case 1:
            Eigen::Map<Matrix>(d.data(), n1, n2 * n3) = mk;
            break;
        case 2:
            for (Index l = 0; l < n3; ++l)
                for (Index j = 0; j < n2; ++j)
                    for (Index i = 0; i < n1; ++i) d[i + n1 * (j + n2 * l)] = mk(j, i + n1 * l);
            break;
        default:
            Eigen::Map<Matrix>(d.data(), n1 * n2, n3) = mk.transpose();
            break;
    }
    return t;
}

Matrix concat_mode1(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("concat_mode1: row counts " + std::to_string(a.rows()) +
                                    " and " + std::to_string(b.rows()) + " differ");
    Matrix out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

DenseTensor3 mode_product(const DenseTensor3& t, const Matrix& u, int k) {
    require_mode(k);
    if (u.cols() != t.dims().mode(k))
        throw std::invalid_argument("mode_product: factor has " + std::to_string(u.cols()) +
                                    " columns, mode " + std::to_string(k) + " has size " +
                                    std::to_string(t.dims().mode(k)));
    Dims out = t.dims();
    out.n[static_cast<std::size_t>(k - 1)] = u.rows();
    return fold(u * unfold(t, k), k, out);
}

DenseTensor3 tucker_synthesize(const DenseTensor3& core, const std::array<Matrix, 3>& factors) {
    for (int k = 1; k <= 3; ++k) {
        const Matrix& u = factors[static_cast<std::size_t>(k - 1)];
        if (u.cols() != core.dims().mode(k))
            throw std::invalid_argument("tucker_synthesize: factor " + std::to_string(k) +
                                        " must have " + std::to_string(core.dims().mode(k)) +
                                        " columns");
        if (u.rows() < u.cols())
            throw std::invalid_argument("tucker_synthesize: factor " + std::to_string(k) +
                                        " has fewer rows than columns");
        const double defect =
            (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
        if (defect > 1e-10)
            throw std::invalid_argument("tucker_synthesize: factor " + std::to_string(k) +
                                        " is not orthonormal (defect " + std::to_string(defect) +
                                        ")");
    }
    DenseTensor3 t = mode_product(core, factors[0], 1);
    t = mode_product(t, factors[1], 2);
    return mode_product(t, factors[2], 3);
}

DenseTensor3 mask_apply(const DenseTensor3& x, const ObservationMask& mask) {
    mask.require_shape(x.dims());
    DenseTensor3 out(x.dims());
    for (Index p : mask.indices()) out.data()[p] = x.data()[p];
    return out;
}

Matrix mask_apply(const Matrix& x, const ObservationMask& mask) {
    mask.require_shape(x.rows(), x.cols());
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (Index p : mask.indices()) out.data()[p] = x.data()[p];
    return out;
}

double inner(const DenseTensor3& a, const DenseTensor3& b) {
    require_same_dims(a, b, "inner");
    return a.data().dot(b.data());
}

double frobenius_norm(const DenseTensor3& t) { return t.data().norm(); }

}  // namespace coupled
