// SPDX-License-Identifier: Apache-2.0
#include "coupled/norms.hpp"

#include "coupled/linalg.hpp"
#include "splitting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coupled {

char tag_char(Tag t) {
    switch (t) {
        case Tag::Overlapped: return 'O';
        case Tag::Latent: return 'L';
        case Tag::ScaledLatent: return 'S';
        case Tag::Dash: return '-';
    }
    return '?';
}

bool NormDescriptor::all(Tag t) const {
    return std::all_of(tags.begin(), tags.end(), [t](Tag x) { return x == t; });
}

namespace {

Tag parse_tag(char c) {
    switch (c) {
        case 'O': return Tag::Overlapped;
        case 'L': return Tag::Latent;
        case 'S': return Tag::ScaledLatent;
        case '-': return Tag::Dash;
        default:
            throw std::invalid_argument(std::string("unknown mode tag '") + c +
                                        "' (expected O, L, S or -)");
    }
}

int count(const NormDescriptor& d, Tag t) {
    return static_cast<int>(std::count(d.tags.begin(), d.tags.end(), t));
}

}  // namespace

NormDescriptor parse_descriptor(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    const std::string original(text);

    NormDescriptor d;
    std::size_t pos = 0;
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        std::string modes = s.substr(0, colon);
        std::size_t start = 0;
        while (start <= modes.size()) {
            std::size_t comma = modes.find(',', start);
            std::string part = modes.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start);
            if (part.size() != 1 || !std::isdigit(static_cast<unsigned char>(part[0])))
                throw std::invalid_argument("bad coupled mode list in descriptor '" + original + "'");
            d.coupled_modes.push_back(part[0] - '0');
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        pos = colon + 1;
    }
    // "(X,X,X)"
    if (s.size() - pos != 7 || s[pos] != '(' || s[pos + 2] != ',' || s[pos + 4] != ',' ||
        s[pos + 6] != ')')
        throw std::invalid_argument("descriptor '" + original +
                                    "' is not of the form [a[,b]:](t,t,t)");
    for (std::size_t k = 0; k < 3; ++k) d.tags[k] = parse_tag(s[pos + 1 + 2 * k]);
    return d;
}

std::string to_string(const NormDescriptor& d) {
    std::string out;
    for (std::size_t i = 0; i < d.coupled_modes.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(d.coupled_modes[i]);
    }
    if (!d.coupled_modes.empty()) out += ':';
    out += '(';
    for (std::size_t k = 0; k < 3; ++k) {
        if (k > 0) out += ',';
        out += tag_char(d.tags[k]);
    }
    out += ')';
    return out;
}

void validate(const NormDescriptor& d) {
    const std::string name = to_string(d);
    for (std::size_t i = 0; i < d.coupled_modes.size(); ++i) {
        const int a = d.coupled_modes[i];
        if (a < 1 || a > 3)
            throw std::invalid_argument(name + ": coupled mode must be 1, 2 or 3");
        for (std::size_t j = 0; j < i; ++j)
            if (d.coupled_modes[j] == a)
                throw std::invalid_argument(name + ": mode " + std::to_string(a) +
                                            " is coupled twice");
        if (d.tag(a) == Tag::Dash)
            throw std::invalid_argument(name + ": coupled mode " + std::to_string(a) +
                                        " cannot be unregularized");
    }
    if (count(d, Tag::Dash) > 1)
        throw std::invalid_argument(name + ": at most one mode may be unregularized");
    if (count(d, Tag::Overlapped) == 1)
        throw std::invalid_argument(name +
                                    ": overlapped regularization needs at least two O modes");
}

bool is_valid(const NormDescriptor& d) {
    try {
        validate(d);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

bool is_solver_supported(const NormDescriptor& d) {
    if (!is_valid(d)) return false;
    if (d.all(Tag::Overlapped) || d.all(Tag::Latent) || d.all(Tag::ScaledLatent)) return true;
    const int latent = count(d, Tag::Latent) + count(d, Tag::ScaledLatent);
    return latent == 1 && count(d, Tag::Overlapped) == 2;
}

int ComponentLayout::coupling_at(int component, int mode) const {
    for (std::size_t j = 0; j < couplings.size(); ++j)
        if (couplings[j].component == component && couplings[j].mode == mode)
            return static_cast<int>(j);
    return -1;
}

ComponentLayout layout(const NormDescriptor& d, const Dims& dims) {
    validate(d);
    ComponentLayout out;
    int overlapped = -1;
    std::array<int, 3> owner{-1, -1, -1};
    for (int k = 1; k <= 3; ++k) {
        const Tag t = d.tag(k);
        if (t == Tag::Dash) continue;
        const double scale =
            t == Tag::ScaledLatent ? 1.0 / std::sqrt(static_cast<double>(dims.mode(k))) : 1.0;
        int c;
        if (t == Tag::Overlapped) {
            if (overlapped < 0) {
                overlapped = static_cast<int>(out.components.size());
                out.components.emplace_back();
            }
            c = overlapped;
        } else {
            c = static_cast<int>(out.components.size());
            out.components.emplace_back();
        }
        out.components[static_cast<std::size_t>(c)].terms.push_back({k, scale});
        owner[static_cast<std::size_t>(k - 1)] = c;
    }
    for (int a : d.coupled_modes) out.couplings.push_back({a, owner[static_cast<std::size_t>(a - 1)]});
    return out;
}

std::vector<ConstraintSlot> constraint_slots(const ComponentLayout& layout) {
    std::vector<ConstraintSlot> slots;
    for (std::size_t c = 0; c < layout.components.size(); ++c)
        for (const ModeTerm& term : layout.components[c].terms)
            slots.push_back({static_cast<int>(c), term.mode, term.scale,
                             layout.coupling_at(static_cast<int>(c), term.mode)});
    return slots;
}

// ---------------------------------------------------------------------------

namespace {

void require_matrices(const DenseTensor3& t, std::span<const Matrix> matrices,
                      const NormDescriptor& d) {
    if (matrices.size() != d.coupled_modes.size())
        throw std::invalid_argument(to_string(d) + ": expected " +
                                    std::to_string(d.coupled_modes.size()) + " matrices, got " +
                                    std::to_string(matrices.size()));
    for (std::size_t j = 0; j < matrices.size(); ++j)
        if (matrices[j].rows() != t.dims().mode(d.coupled_modes[j]))
            throw std::invalid_argument(to_string(d) + ": matrix " + std::to_string(j + 1) +
                                        " row count does not match mode " +
                                        std::to_string(d.coupled_modes[j]));
}

int coupled_index(const NormDescriptor& d, int k) {
    for (std::size_t j = 0; j < d.coupled_modes.size(); ++j)
        if (d.coupled_modes[j] == k) return static_cast<int>(j);
    return -1;
}

double data_norm(const DenseTensor3& t, std::span<const Matrix> matrices) {
    double sq = t.data().squaredNorm();
    for (const Matrix& m : matrices) sq += m.squaredNorm();
    return std::sqrt(sq);
}

}  // namespace

Matrix coupled_unfolding(const DenseTensor3& t, std::span<const Matrix> matrices,
                         const NormDescriptor& d, int k) {
    const int j = coupled_index(d, k);
    Matrix u = unfold(t, k);
    return j < 0 ? u : concat_mode1(u, matrices[static_cast<std::size_t>(j)]);
}

double evaluate_overlapped(const DenseTensor3& t, std::span<const Matrix> matrices,
                           const NormDescriptor& d) {
    validate(d);
    if (!d.all(Tag::Overlapped))
        throw std::invalid_argument(to_string(d) + ": closed-form evaluation needs (O,O,O)");
    require_matrices(t, matrices, d);
    double value = 0.0;
    for (int k = 1; k <= 3; ++k) value += trace_norm(coupled_unfolding(t, matrices, d, k));
    return value;
}

double evaluate_overlapped(const DenseTensor3& t, const Matrix& m, const NormDescriptor& d) {
    return evaluate_overlapped(t, std::span<const Matrix>(&m, 1), d);
}

double decomposition_value(std::span<const DenseTensor3> parts, std::span<const Matrix> matrices,
                           const NormDescriptor& d) {
    if (parts.empty()) throw std::invalid_argument("decomposition_value: no parts");
    const ComponentLayout lay = layout(d, parts[0].dims());
    if (parts.size() != lay.size())
        throw std::invalid_argument(to_string(d) + ": expected " + std::to_string(lay.size()) +
                                    " latent parts");
    require_matrices(parts[0], matrices, d);
    double value = 0.0;
    for (const ConstraintSlot& s : constraint_slots(lay)) {
        Matrix u = unfold(parts[static_cast<std::size_t>(s.component)], s.mode);
        if (s.coupling >= 0) u = concat_mode1(u, matrices[static_cast<std::size_t>(s.coupling)]);
        value += s.scale * trace_norm(u);
    }
    return value;
}

double evaluate(const DenseTensor3& t, std::span<const Matrix> matrices, const NormDescriptor& d,
                const EvalOptions& opts) {
    const ComponentLayout lay = layout(d, t.dims());
    require_matrices(t, matrices, d);
    const std::size_t n_comp = lay.size();
    if (n_comp == 1) return decomposition_value(std::span<const DenseTensor3>(&t, 1), matrices, d);

    // Best single assignment: the whole tensor on one component.
    double best = std::numeric_limits<double>::infinity();
    {
        std::vector<DenseTensor3> parts(n_comp, DenseTensor3(t.dims()));
        for (std::size_t c = 0; c < n_comp; ++c) {
            parts[c] = t;
            best = std::min(best, decomposition_value(parts, matrices, d));
            parts[c] = DenseTensor3(t.dims());
        }
    }

    const double scale = std::max(1.0, data_norm(t, matrices));
    if (data_norm(t, matrices) == 0.0) return 0.0;
    const double beta = opts.beta > 0.0 ? opts.beta : 10.0 / scale;
    const double tol = opts.tol * scale;

    // Consensus splitting: min sum_s scale_s ||[Y_s; X]||_tr subject to
    // Y_s = T^(c_s), X = M and sum_c T^(c) = T.
    const std::vector<ConstraintSlot> slots = constraint_slots(lay);
    std::vector<DenseTensor3> parts(n_comp, DenseTensor3(t.dims()));
    std::vector<DenseTensor3> aux(slots.size(), DenseTensor3(t.dims()));
    std::vector<DenseTensor3> dual(slots.size(), DenseTensor3(t.dims()));
    std::vector<Matrix> aux_m, dual_m;
    for (const Matrix& m : matrices) {
        aux_m.push_back(Matrix::Zero(m.rows(), m.cols()));
        dual_m.push_back(Matrix::Zero(m.rows(), m.cols()));
    }

    double inv_g_sum = 0.0;
    for (std::size_t c = 0; c < n_comp; ++c) inv_g_sum += 1.0 / lay.attached(c);

    for (int it = 0; it < opts.max_iters; ++it) {
        // Project the per-component targets onto sum_c T^(c) = T.
        std::vector<DenseTensor3> target(n_comp, DenseTensor3(t.dims()));
        for (std::size_t s = 0; s < slots.size(); ++s) {
            Vector& v = target[static_cast<std::size_t>(slots[s].component)].data();
            v += aux[s].data() - dual[s].data() / beta;
        }
        Vector gap = t.data();
        for (std::size_t c = 0; c < n_comp; ++c) {
            target[c].data() /= lay.attached(c);
            gap -= target[c].data();
        }
        gap /= inv_g_sum;
        for (std::size_t c = 0; c < n_comp; ++c)
            parts[c].data() = target[c].data() + gap / lay.attached(c);

        double primal = 0.0, dual_res = 0.0;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            const ConstraintSlot& slot = slots[s];
            const auto j = static_cast<std::size_t>(slot.coupling);
            const DenseTensor3& part = parts[static_cast<std::size_t>(slot.component)];
            detail::ProxOutput p =
                detail::prox_slot(slot, part, dual[s], slot.coupling >= 0 ? &matrices[j] : nullptr,
                                  slot.coupling >= 0 ? &dual_m[j] : nullptr, beta,
                                  slot.scale / beta);
            dual_res = std::max(dual_res, beta * (p.aux.data() - aux[s].data()).norm());
            aux[s] = std::move(p.aux);
            dual[s].data() += beta * (part.data() - aux[s].data());
            primal = std::max(primal, (part.data() - aux[s].data()).norm());
            if (slot.coupling >= 0) {
                dual_res = std::max(dual_res, beta * (p.aux_matrix - aux_m[j]).norm());
                aux_m[j] = std::move(p.aux_matrix);
                dual_m[j] += beta * (matrices[j] - aux_m[j]);
                primal = std::max(primal, (matrices[j] - aux_m[j]).norm());
            }
        }
        if (primal <= tol && dual_res <= tol)
            return std::min(best, decomposition_value(parts, matrices, d));
    }
    throw ConvergenceError(to_string(d) + ": norm evaluation did not converge in " +
                           std::to_string(opts.max_iters) + " iterations");
}

double evaluate(const DenseTensor3& t, const Matrix& m, const NormDescriptor& d,
                const EvalOptions& opts) {
    return evaluate(t, std::span<const Matrix>(&m, 1), d, opts);
}

double dual_norm_latent_type(const DenseTensor3& t, std::span<const Matrix> matrices,
                             const NormDescriptor& d) {
    validate(d);
    const bool scaled = d.all(Tag::ScaledLatent);
    if (!scaled && !d.all(Tag::Latent))
        throw std::invalid_argument(to_string(d) + ": closed-form dual needs (L,L,L) or (S,S,S)");
    require_matrices(t, matrices, d);
    double value = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const double w = scaled ? std::sqrt(static_cast<double>(t.dims().mode(k))) : 1.0;
        value = std::max(value, w * spectral_norm(coupled_unfolding(t, matrices, d, k)));
    }
    return value;
}

double dual_norm_latent_type(const DenseTensor3& t, const Matrix& m, const NormDescriptor& d) {
    return dual_norm_latent_type(t, std::span<const Matrix>(&m, 1), d);
}

double dual_norm_overlapped_upper(const DenseTensor3& t, const Matrix& m, int coupled_mode) {
    require_mode(coupled_mode);
    if (m.rows() != t.dims().mode(coupled_mode))
        throw std::invalid_argument("dual_norm_overlapped_upper: matrix rows do not match mode " +
                                    std::to_string(coupled_mode));
    const double m_op = m.size() ? spectral_norm(m) : 0.0;
    double value = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 3; ++k) {
        const double v = k == coupled_mode ? spectral_norm(concat_mode1(unfold(t, k), m))
                                           : std::max(spectral_norm(unfold(t, k)), m_op);
        value = std::min(value, v);
    }
    return value;
}

}  // namespace coupled
