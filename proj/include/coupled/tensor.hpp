// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace coupled {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dimensions (n1, n2, n3) of a 3-way tensor.
struct Dims {
    std::array<Index, 3> n{};

    Index operator[](int k) const { return n[static_cast<std::size_t>(k)]; }
    [[nodiscard]] Index total() const { return n[0] * n[1] * n[2]; }
    /// Size of mode k (1-based).
    [[nodiscard]] Index mode(int k) const;
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Dense 3-way array.
///
/// Entries are stored column-major: the first index varies fastest, so
/// entry (i, j, l) lives at i + n1 * (j + n2 * l). The mode-k unfolding
/// orders its columns the same way with index k removed:
///   mode 1: column j + n2 * l
///   mode 2: column i + n1 * l
///   mode 3: column i + n1 * j
/// fold() is the exact inverse of unfold() under this layout.
class DenseTensor3 {
public:
    DenseTensor3() = default;
    explicit DenseTensor3(Dims dims);
    DenseTensor3(Dims dims, Vector data);

    static DenseTensor3 constant(Dims dims, double value);

    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] Index size() const { return data_.size(); }

    double& operator()(Index i, Index j, Index l) {
        return data_[i + dims_[0] * (j + dims_[1] * l)];
    }
    double operator()(Index i, Index j, Index l) const {
        return data_[i + dims_[0] * (j + dims_[1] * l)];
    }

    [[nodiscard]] Vector& data() { return data_; }
    [[nodiscard]] const Vector& data() const { return data_; }

    DenseTensor3& operator+=(const DenseTensor3& other);
    DenseTensor3& operator-=(const DenseTensor3& other);
    DenseTensor3& operator*=(double alpha);

    friend DenseTensor3 operator+(DenseTensor3 a, const DenseTensor3& b) { return a += b; }
    friend DenseTensor3 operator-(DenseTensor3 a, const DenseTensor3& b) { return a -= b; }
    friend DenseTensor3 operator*(double alpha, DenseTensor3 a) { return a *= alpha; }
    friend bool operator==(const DenseTensor3& a, const DenseTensor3& b) {
        return a.dims_ == b.dims_ && a.data_ == b.data_;
    }

private:
    Dims dims_{};
    Vector data_;
};

/// Positions observed in a tensor or a matrix, as sorted linear indices
/// (column-major, same layout as DenseTensor3 / Eigen matrices).
class ObservationMask {
public:
    ObservationMask() = default;

    /// Throws on out-of-range or duplicate positions. Input order is free.
    static ObservationMask for_tensor(const Dims& dims, std::vector<Index> linear);
    static ObservationMask for_matrix(Index rows, Index cols, std::vector<Index> linear);
    static ObservationMask full_tensor(const Dims& dims);
    static ObservationMask full_matrix(Index rows, Index cols);

    [[nodiscard]] const std::vector<Index>& indices() const { return indices_; }
    /// (n1, n2, n3) for a tensor mask, (rows, cols) for a matrix mask.
    [[nodiscard]] const std::vector<Index>& shape() const { return shape_; }
    [[nodiscard]] bool is_tensor() const { return shape_.size() == 3; }
    [[nodiscard]] std::size_t count() const { return indices_.size(); }
    [[nodiscard]] Index total() const;
    [[nodiscard]] bool contains(Index linear) const;
    /// Dense 0/1 vector over all positions.
    [[nodiscard]] Vector indicator() const;

    void require_shape(const Dims& dims) const;
    void require_shape(Index rows, Index cols) const;

private:
    ObservationMask(std::vector<Index> shape, std::vector<Index> linear);

    std::vector<Index> shape_;
    std::vector<Index> indices_;
};

/// Mode-k unfolding (k in {1,2,3}): n_k x (N / n_k).
[[nodiscard]] Matrix unfold(const DenseTensor3& t, int k);

/// Inverse of unfold for the given target dims.
[[nodiscard]] DenseTensor3 fold(const Matrix& mk, int k, const Dims& dims);

/// [A; B]: columns of A followed by columns of B.
[[nodiscard]] Matrix concat_mode1(const Matrix& a, const Matrix& b);

/// T x_k U: replaces mode k of size U.cols() by size U.rows().
[[nodiscard]] DenseTensor3 mode_product(const DenseTensor3& t, const Matrix& u, int k);

/// core x1 U1 x2 U2 x3 U3. Factors are n_k x c_k with orthonormal columns.
[[nodiscard]] DenseTensor3 tucker_synthesize(const DenseTensor3& core,
                                             const std::array<Matrix, 3>& factors);

[[nodiscard]] DenseTensor3 mask_apply(const DenseTensor3& x, const ObservationMask& mask);
[[nodiscard]] Matrix mask_apply(const Matrix& x, const ObservationMask& mask);

[[nodiscard]] double inner(const DenseTensor3& a, const DenseTensor3& b);
[[nodiscard]] double frobenius_norm(const DenseTensor3& t);

/// Throws std::invalid_argument unless k is 1, 2 or 3.
void require_mode(int k);

}  // namespace coupled
