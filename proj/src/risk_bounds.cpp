// SPDX-License-Identifier: Apache-2.0
#include "coupled/risk_bounds.hpp"

#include "coupled/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coupled {

namespace {

constexpr std::array<std::string_view, 8> kNames{"OOO", "SSS", "LLL", "SOO",
                                                 "MTN", "OTN", "LTN", "SLTN"};

double tensor_samples(const BoundParams& p) {
    return p.tensor_samples > 0 ? p.tensor_samples : p.samples;
}
double matrix_samples(const BoundParams& p) {
    return p.matrix_samples > 0 ? p.matrix_samples : p.samples;
}

/// sqrt(n_k) + sqrt(prod_{j != k} n_j), k 0-based.
double unfolding_term(const BoundParams& p, int k) {
    double rest = 1.0;
    for (int j = 0; j < 3; ++j)
        if (j != k) rest *= p.n[static_cast<std::size_t>(j)];
    return std::sqrt(p.n[static_cast<std::size_t>(k)]) + std::sqrt(rest);
}

double coupled_term(const BoundParams& p) {
    return std::sqrt(p.n[0]) + std::sqrt(p.n[1] * p.n[2] + p.m);
}

double scaled_coupled_term(const BoundParams& p) {
    return p.n[0] + std::sqrt(p.n[0] * p.n[1] * p.n[2] + p.n[0] * p.m);
}

double sqrt_rank(const BoundParams& p, int k) { return std::sqrt(p.rank[static_cast<std::size_t>(k)]); }
double scaled_rank(const BoundParams& p, int k) {
    return std::sqrt(p.rank[static_cast<std::size_t>(k)] / p.n[static_cast<std::size_t>(k)]);
}

double bound_ooo(const BoundParams& p) {
    const double rank_factor =
        std::sqrt(p.coupled_rank) * (p.B_T + p.B_M) + (sqrt_rank(p, 1) + sqrt_rank(p, 2)) * p.B_T;
    const double dim_factor = std::min(
        p.C2 * coupled_term(p), std::min(p.C1 * unfolding_term(p, 1), p.C1 * unfolding_term(p, 2)));
    return 3.0 * p.Lambda / (2.0 * p.samples) * rank_factor * dim_factor;
}

// Follows the final display of the proof, where the C1 term carries the
// full product n1 n2 n3.
double bound_sss(const BoundParams& p) {
    const double r1 = std::sqrt(p.coupled_rank / p.n[0]);
    const double rank_factor =
        r1 * p.B_M + std::min(r1, std::min(scaled_rank(p, 1), scaled_rank(p, 2))) * p.B_T;
    const double full = std::sqrt(p.n[0] * p.n[1] * p.n[2]);
    const double dim_factor = std::max(p.C2 * scaled_coupled_term(p),
                                       p.C1 * std::max(p.n[1] + full, p.n[2] + full));
    return 3.0 * p.Lambda / (2.0 * p.samples) * rank_factor * dim_factor;
}

double bound_lll(const BoundParams& p) {
    const double r1 = std::sqrt(p.coupled_rank);
    const double rank_factor =
        r1 * p.B_M + std::min(r1, std::min(sqrt_rank(p, 1), sqrt_rank(p, 2))) * p.B_T;
    const double dim_factor =
        std::max(p.C2 * coupled_term(p),
                 std::max(p.C2 * unfolding_term(p, 1), p.C2 * unfolding_term(p, 2)));
    return 3.0 * p.Lambda / (2.0 * p.samples) * rank_factor * dim_factor;
}

double bound_soo(const BoundParams& p) {
    const double r1 = std::sqrt(p.coupled_rank / p.n[0]);
    const double rank_factor =
        r1 * p.B_M + std::min(r1, sqrt_rank(p, 1) + sqrt_rank(p, 2)) * p.B_T;
    const double dim_factor = std::max(
        p.C2 * scaled_coupled_term(p), std::min(p.C1 * unfolding_term(p, 1), p.C1 * unfolding_term(p, 2)));
    return 2.0 * p.Lambda / p.samples * rank_factor * dim_factor;
}

double bound_mtn(const BoundParams& p) {
    return p.c * p.B_M * p.Lambda / matrix_samples(p) * std::sqrt(p.matrix_rank) *
           (std::sqrt(p.n[0]) + std::sqrt(p.m));
}

double bound_otn(const BoundParams& p) {
    const double ranks = sqrt_rank(p, 0) + sqrt_rank(p, 1) + sqrt_rank(p, 2);
    const double dims =
        std::min({unfolding_term(p, 0), unfolding_term(p, 1), unfolding_term(p, 2)});
    return p.c1 * p.B_T * p.Lambda / tensor_samples(p) * ranks * dims;
}

double bound_ltn(const BoundParams& p) {
    const double ranks = std::min({sqrt_rank(p, 0), sqrt_rank(p, 1), sqrt_rank(p, 2)});
    const double dims =
        std::max({unfolding_term(p, 0), unfolding_term(p, 1), unfolding_term(p, 2)});
    return p.c2 * p.Lambda * p.B_T * ranks / tensor_samples(p) * dims;
}

double bound_sltn(const BoundParams& p) {
    const double ranks = std::min({scaled_rank(p, 0), scaled_rank(p, 1), scaled_rank(p, 2)});
    const double full = std::sqrt(p.n[0] * p.n[1] * p.n[2]);
    const double dims = std::max({p.n[0], p.n[1], p.n[2]}) + full;
    return 3.0 * p.c3 * p.Lambda * p.B_T / (2.0 * tensor_samples(p)) * ranks * dims;
}

}  // namespace

BoundNorm parse_bound_norm(std::string_view id) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == id) return kAllBoundNorms[i];
    throw std::invalid_argument("unknown bound norm id '" + std::string(id) + "'");
}

std::string to_string(BoundNorm n) { return std::string(kNames[static_cast<std::size_t>(n)]); }

void BoundParams::validate() const {
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(n[k] > 0)) throw std::invalid_argument("tensor dims must be positive");
        if (!(rank[k] >= 0 && rank[k] <= n[k]))
            throw std::invalid_argument("rank r" + std::to_string(k + 1) + " must lie in [0, n" +
                                        std::to_string(k + 1) + "]");
    }
    if (!(m > 0)) throw std::invalid_argument("matrix columns must be positive");
    if (!(coupled_rank >= 0 && coupled_rank <= n[0]))
        throw std::invalid_argument("coupled rank must lie in [0, n1]");
    if (!(matrix_rank >= 0 && matrix_rank <= std::min(n[0], m)))
        throw std::invalid_argument("matrix rank must lie in [0, min(n1, m)]");
    if (!(B_T >= 0 && B_M >= 0)) throw std::invalid_argument("Frobenius caps must be >= 0");
    if (!(Lambda > 0)) throw std::invalid_argument("Lambda must be positive");
    if (!(samples > 0)) throw std::invalid_argument("sample count must be positive");
    for (double v : {C1, C2, c, c1, c2, c3})
        if (!(v > 0)) throw std::invalid_argument("constants must be positive");
}

double bound(BoundNorm norm, const BoundParams& p) {
    p.validate();
    switch (norm) {
        case BoundNorm::OOO: return bound_ooo(p);
        case BoundNorm::SSS: return bound_sss(p);
        case BoundNorm::LLL: return bound_lll(p);
        case BoundNorm::SOO: return bound_soo(p);
        case BoundNorm::MTN: return bound_mtn(p);
        case BoundNorm::OTN: return bound_otn(p);
        case BoundNorm::LTN: return bound_ltn(p);
        case BoundNorm::SLTN: return bound_sltn(p);
    }
    throw std::invalid_argument("unknown bound norm");
}

BoundParams rank_geometry(const DenseTensor3& t, const Matrix& m, BoundParams base,
                          double rel_tol) {
    if (m.rows() != t.dims()[0])
        throw std::invalid_argument("rank_geometry: matrix rows must equal n1");
    for (int k = 0; k < 3; ++k) {
        base.n[static_cast<std::size_t>(k)] = static_cast<double>(t.dims()[k]);
        base.rank[static_cast<std::size_t>(k)] =
            static_cast<double>(numerical_rank(unfold(t, k + 1), rel_tol));
    }
    base.m = static_cast<double>(m.cols());
    base.coupled_rank = static_cast<double>(numerical_rank(concat_mode1(unfold(t, 1), m), rel_tol));
    base.matrix_rank = static_cast<double>(numerical_rank(m, rel_tol));
    base.B_T = frobenius_norm(t);
    base.B_M = m.norm();
    return base;
}

BoundParams rank_geometry(const SyntheticSpec& spec, BoundParams base, double rel_tol) {
    const SyntheticInstance inst = gen_instance(spec);
    return rank_geometry(inst.clean_tensor, inst.clean_matrix, base, rel_tol);
}

}  // namespace coupled
