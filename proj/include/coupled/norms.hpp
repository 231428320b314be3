// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/tensor.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coupled {

/// How one tensor mode is regularized.
enum class Tag {
    Overlapped,    ///< O: shares one latent tensor with the other O modes
    Latent,        ///< L: own latent tensor, trace norm on this mode only
    ScaledLatent,  ///< S: as L, weighted by 1/sqrt(n_k)
    Dash,          ///< -: not regularized
};

[[nodiscard]] char tag_char(Tag t);

/// Coupled norm ||T, M_1, ...||^{a,...}_{(b,c,d)}.
///
/// coupled_modes lists the tensor modes (1-based) that carry a matrix,
/// in the same order as the matrices passed alongside. An empty list is
/// the tensor-only norm.
struct NormDescriptor {
    std::vector<int> coupled_modes;
    std::array<Tag, 3> tags{Tag::Overlapped, Tag::Overlapped, Tag::Overlapped};

    [[nodiscard]] Tag tag(int mode) const { return tags[static_cast<std::size_t>(mode - 1)]; }
    [[nodiscard]] bool all(Tag t) const;
    friend bool operator==(const NormDescriptor&, const NormDescriptor&) = default;
};

/// Parses "1:(O,S,O)", "1,3:(O,S,O)" or "(S,S,S)". Throws std::invalid_argument.
[[nodiscard]] NormDescriptor parse_descriptor(std::string_view text);
/// Inverse of parse_descriptor.
[[nodiscard]] std::string to_string(const NormDescriptor& d);

/// Throws std::invalid_argument naming the violated rule.
void validate(const NormDescriptor& d);
[[nodiscard]] bool is_valid(const NormDescriptor& d);

/// Whether the completion solver handles d: all-O, all-L, all-S, or exactly
/// one L/S mode with the other two O. Implies valid.
[[nodiscard]] bool is_solver_supported(const NormDescriptor& d);

/// One regularized unfolding of a latent component.
struct ModeTerm {
    int mode = 1;
    double scale = 1.0;
};

struct LatentComponent {
    std::vector<ModeTerm> terms;
};

/// A matrix attached to a latent component's unfolding.
struct CouplingSlot {
    int mode = 1;
    int component = 0;
};

/// Latent-tensor structure of a norm for concrete dims. Components are
/// ordered by their smallest regularized mode.
struct ComponentLayout {
    std::vector<LatentComponent> components;
    std::vector<CouplingSlot> couplings;

    [[nodiscard]] std::size_t size() const { return components.size(); }
    /// Number of regularized unfoldings of component c.
    [[nodiscard]] int attached(std::size_t c) const {
        return static_cast<int>(components[c].terms.size());
    }
    /// Index into couplings of the matrix on (component, mode), or -1.
    [[nodiscard]] int coupling_at(int component, int mode) const;
};

[[nodiscard]] ComponentLayout layout(const NormDescriptor& d, const Dims& dims);

/// One splitting constraint Y = T^(component) regularized on `mode`.
/// Slots are enumerated component by component in term order.
struct ConstraintSlot {
    int component = 0;
    int mode = 1;
    double scale = 1.0;
    /// Index of the matrix concatenated on this unfolding, or -1.
    int coupling = -1;
};

[[nodiscard]] std::vector<ConstraintSlot> constraint_slots(const ComponentLayout& layout);

/// Closed-form value of an all-O descriptor: sum of trace norms of the
/// (possibly matrix-concatenated) unfoldings.
[[nodiscard]] double evaluate_overlapped(const DenseTensor3& t, std::span<const Matrix> matrices,
                                         const NormDescriptor& d);
[[nodiscard]] double evaluate_overlapped(const DenseTensor3& t, const Matrix& m,
                                         const NormDescriptor& d);

struct EvalOptions {
    /// Decomposition-constraint residual tolerance, relative to max(1, ||data||_F).
    double tol = 1e-6;
    int max_iters = 20000;
    /// Proximity parameter of the inner splitting; <= 0 picks one from the data scale.
    double beta = 0.0;
};

/// Norm value. Single-component norms are closed form; latent ones solve the
/// infimum over decompositions by consensus ADMM and return the value of the
/// best feasible decomposition found. Throws ConvergenceError on iteration cap.
[[nodiscard]] double evaluate(const DenseTensor3& t, std::span<const Matrix> matrices,
                              const NormDescriptor& d, const EvalOptions& opts = {});
[[nodiscard]] double evaluate(const DenseTensor3& t, const Matrix& m, const NormDescriptor& d,
                              const EvalOptions& opts = {});

/// Value of the decomposition `parts` (which must sum to the tensor being
/// measured) under d's layout.
[[nodiscard]] double decomposition_value(std::span<const DenseTensor3> parts,
                                         std::span<const Matrix> matrices,
                                         const NormDescriptor& d);

/// Exact dual of all-L / all-S norms: max over modes of
/// w_k * ||unfolding_k (with matrix if coupled)||_op, w_k = 1 or sqrt(n_k).
[[nodiscard]] double dual_norm_latent_type(const DenseTensor3& t, std::span<const Matrix> matrices,
                                           const NormDescriptor& d);
[[nodiscard]] double dual_norm_latent_type(const DenseTensor3& t, const Matrix& m,
                                           const NormDescriptor& d);

/// Upper bound on the dual of the coupled overlapped norm: the minimum over
/// modes k of ||[T_(k); M]||_op on the coupled mode and
/// max(||T_(k)||_op, ||M||_op) on the others. With M = 0 this is the minimum
/// of the unfolding spectral norms.
[[nodiscard]] double dual_norm_overlapped_upper(const DenseTensor3& t, const Matrix& m,
                                                int coupled_mode = 1);

/// Unfolding of t on mode k with the matrix (if any) coupled on k appended.
[[nodiscard]] Matrix coupled_unfolding(const DenseTensor3& t, std::span<const Matrix> matrices,
                                       const NormDescriptor& d, int k);

}  // namespace coupled
