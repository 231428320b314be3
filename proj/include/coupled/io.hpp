// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace coupled {

/// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct MaskedTensor {
    DenseTensor3 tensor;
    ObservationMask mask;
};

struct MaskedMatrix {
    Matrix matrix;
    ObservationMask mask;
};

/// Coordinate format:
///   dims: n1 n2 n3
///   i j k value        (1-based, whitespace separated, one entry per line)
/// Blank lines and lines starting with '#' are ignored. Unlisted entries
/// are unobserved (stored as 0).
[[nodiscard]] MaskedTensor read_sparse_tensor(std::istream& in, const std::string& source = "<stream>");
[[nodiscard]] MaskedTensor load_sparse_tensor(const std::filesystem::path& path);
void write_sparse_tensor(std::ostream& out, const DenseTensor3& t, const ObservationMask& mask);
void save_sparse_tensor(const std::filesystem::path& path, const DenseTensor3& t,
                        const ObservationMask& mask);

/// Dense CSV; an empty cell is an unobserved entry (stored as 0).
[[nodiscard]] MaskedMatrix read_matrix_csv(std::istream& in, const std::string& source = "<stream>");
[[nodiscard]] MaskedMatrix load_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const Matrix& m, const ObservationMask& mask);
void save_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                     const ObservationMask& mask);

/// Shortest decimal text that parses back to exactly v.
[[nodiscard]] std::string format_exact(double v);
/// v at 10 significant digits.
[[nodiscard]] std::string format_10(double v);

}  // namespace coupled
