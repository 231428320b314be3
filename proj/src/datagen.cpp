// SPDX-License-Identifier: Apache-2.0
#include "coupled/datagen.hpp"

#include "coupled/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace coupled {

namespace {

std::string str(Index v) { return std::to_string(v); }

struct SplitCounts {
    std::size_t train;
    std::size_t validation;
};

SplitCounts split_counts(Index total, const MaskSpec& spec) {
    const auto n = static_cast<double>(total);
    const auto train = static_cast<std::size_t>(std::llround(spec.train * n));
    const auto val = static_cast<std::size_t>(std::llround(spec.validation * n));
    if (train + val > static_cast<std::size_t>(total))
        throw std::invalid_argument("mask fractions round to more entries than available");
    return {train, val};
}

}  // namespace

std::vector<Index> random_permutation(Index n, std::uint64_t seed) {
    std::vector<Index> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), Index{0});
    Rng rng(seed);
    // Explicit Fisher-Yates: std::shuffle's output is implementation-defined.
    for (std::size_t i = pos.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(pos[i - 1], pos[j]);
    }
    return pos;
}

void SyntheticSpec::validate() const {
    for (int k = 0; k < 3; ++k) {
        if (dims[k] < 1) throw std::invalid_argument("tensor dims must be positive");
        if (tucker_rank[static_cast<std::size_t>(k)] < 0 ||
            tucker_rank[static_cast<std::size_t>(k)] > dims[k])
            throw std::invalid_argument("tucker rank " + str(tucker_rank[static_cast<std::size_t>(k)]) +
                                        " exceeds mode " + std::to_string(k + 1) + " size " +
                                        str(dims[k]));
    }
    if (matrix_cols < 1) throw std::invalid_argument("matrix_cols must be positive");
    if (matrix_rank < 0 || matrix_rank > std::min(dims[0], matrix_cols))
        throw std::invalid_argument("matrix rank " + str(matrix_rank) + " exceeds min(n1, m)");
    if (shared < 0 || shared > std::min(matrix_rank, tucker_rank[0]))
        throw std::invalid_argument("shared components " + str(shared) +
                                    " exceed min(matrix rank, c1)");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("noise std must be >= 0");
}

void MaskSpec::validate() const {
    if (!(train > 0.0 && train < 1.0)) throw std::invalid_argument("train fraction must be in (0,1)");
    if (!(validation >= 0.0 && validation < 1.0))
        throw std::invalid_argument("validation fraction must be in [0,1)");
    if (!(train + validation < 1.0))
        throw std::invalid_argument("train + validation fractions must be < 1");
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index p = 0; p < g.size(); ++p) g.data()[p] = normal(rng);
    return g;
}

Matrix random_orthonormal(Index n, Index c, Rng& rng) {
    if (c > n) throw std::invalid_argument("random_orthonormal: more columns than rows");
    const Matrix g = gaussian_matrix(n, c, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, c);
}

DenseTensor3 gen_tensor(const SyntheticSpec& spec, Rng& rng) {
    spec.validate();
    const auto& c = spec.tucker_rank;
    const Dims core_dims{{c[0], c[1], c[2]}};
    const Matrix core_values = gaussian_matrix(core_dims.total(), 1, rng);
    const DenseTensor3 core(core_dims, core_values.col(0));
    std::array<Matrix, 3> factors;
    for (int k = 0; k < 3; ++k)
        factors[static_cast<std::size_t>(k)] =
            random_orthonormal(spec.dims[k], c[static_cast<std::size_t>(k)], rng);
    return tucker_synthesize(core, factors);
}

DenseTensor3 gen_tensor(const SyntheticSpec& spec) {
    Rng rng(spec.seed);
    return gen_tensor(spec, rng);
}

CoupledMatrixFactors gen_coupled_matrix_factors(const DenseTensor3& t, const SyntheticSpec& spec,
                                                Rng& rng) {
    spec.validate();
    if (t.dims()[0] != spec.dims[0])
        throw std::invalid_argument("tensor mode 1 does not match spec dims");
    const Index n1 = spec.dims[0];
    const Index r = spec.matrix_rank;
    const Index s = spec.shared;

    CoupledMatrixFactors f;
    f.U = random_orthonormal(n1, r, rng);
    f.V = random_orthonormal(spec.matrix_cols, r, rng);
    f.S.resize(r);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < r; ++i) f.S[i] = std::abs(normal(rng)) + 0.5;
    std::sort(f.S.data(), f.S.data() + r, std::greater<>());

    if (s > 0) {
        const SvdFactors tf = svd(unfold(t, 1));
        if (numerical_rank(unfold(t, 1), 1e-10) < s)
            throw std::invalid_argument("tensor unfolding has fewer than " + str(s) +
                                        " singular triplets");
        const Matrix shared_u = tf.U.leftCols(s);
        f.U.leftCols(s) = shared_u;
        f.S.head(s) = tf.S.head(s);
        if (r > s) {
            Matrix rest = f.U.rightCols(r - s);
            rest -= shared_u * (shared_u.transpose() * rest);
            Eigen::HouseholderQR<Matrix> qr(rest);
            f.U.rightCols(r - s) = qr.householderQ() * Matrix::Identity(n1, r - s);
        }
    }
    return f;
}

Matrix gen_coupled_matrix(const DenseTensor3& t, const SyntheticSpec& spec, Rng& rng) {
    return gen_coupled_matrix_factors(t, spec, rng).value();
}

Matrix gen_coupled_matrix(const DenseTensor3& t, const SyntheticSpec& spec) {
    Rng rng(spec.seed);
    return gen_coupled_matrix(t, spec, rng);
}

Matrix add_noise(const Matrix& x, double mean, double std, std::uint64_t seed) {
    if (!(std >= 0.0)) throw std::invalid_argument("noise std must be >= 0");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out = x;
    for (Index p = 0; p < out.size(); ++p) out.data()[p] += mean + std * normal(rng);
    return out;
}

DenseTensor3 add_noise(const DenseTensor3& x, double mean, double std, std::uint64_t seed) {
    const Eigen::Map<const Matrix> flat(x.data().data(), x.size(), 1);
    const Matrix noisy = add_noise(Matrix(flat), mean, std, seed);
    return DenseTensor3(x.dims(), noisy.col(0));
}

namespace {

MaskSplit split(const std::vector<Index>& shape, const MaskSpec& spec) {
    spec.validate();
    Index total = 1;
    for (Index n : shape) total *= n;
    const SplitCounts counts = split_counts(total, spec);
    const std::vector<Index> pos = random_permutation(total, spec.seed);
    const auto b1 = pos.begin() + static_cast<std::ptrdiff_t>(counts.train);
    const auto b2 = b1 + static_cast<std::ptrdiff_t>(counts.validation);
    std::vector<Index> train(pos.begin(), b1), val(b1, b2), test(b2, pos.end());

    MaskSplit out;
    out.test_empty = test.empty();
    if (shape.size() == 3) {
        const Dims dims{{shape[0], shape[1], shape[2]}};
        out.train = ObservationMask::for_tensor(dims, std::move(train));
        out.validation = ObservationMask::for_tensor(dims, std::move(val));
        out.test = ObservationMask::for_tensor(dims, std::move(test));
    } else {
        out.train = ObservationMask::for_matrix(shape[0], shape[1], std::move(train));
        out.validation = ObservationMask::for_matrix(shape[0], shape[1], std::move(val));
        out.test = ObservationMask::for_matrix(shape[0], shape[1], std::move(test));
    }
    return out;
}

}  // namespace

MaskSplit gen_masks(const Dims& dims, const MaskSpec& spec) {
    return split({dims[0], dims[1], dims[2]}, spec);
}

MaskSplit gen_masks(Index rows, Index cols, const MaskSpec& spec) {
    return split({rows, cols}, spec);
}

SyntheticInstance gen_instance(const SyntheticSpec& spec) {
    spec.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)};
    std::array<std::uint64_t, 3> seeds{};
    std::array<std::uint32_t, 6> words{};
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < 3; ++i)
        seeds[i] = (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];

    Rng rng(seeds[0]);
    SyntheticInstance inst;
    inst.clean_tensor = gen_tensor(spec, rng);
    inst.clean_matrix = gen_coupled_matrix(inst.clean_tensor, spec, rng);
    inst.tensor = add_noise(inst.clean_tensor, spec.noise_mean, spec.noise_std, seeds[1]);
    inst.matrix = add_noise(inst.clean_matrix, spec.noise_mean, spec.noise_std, seeds[2]);
    return inst;
}

}  // namespace coupled
