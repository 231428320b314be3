// SPDX-License-Identifier: Apache-2.0
#include "coupled/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

namespace coupled {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line ? source + ":" + std::to_string(line) + ": " + what
                              : source + ": " + what),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_index(std::string_view s, long long& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

std::string format_exact(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_exact: conversion failed");
    return std::string(buf, ptr);
}

std::string format_10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

MaskedTensor read_sparse_tensor(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    bool have_dims = false;
    Dims dims{};
    std::vector<Index> positions;
    std::vector<double> values;
    std::set<Index> seen;

    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        if (!have_dims) {
            constexpr std::string_view kTag = "dims:";
            if (body.substr(0, kTag.size()) != kTag)
                throw ParseError(source, lineno, "expected header 'dims: n1 n2 n3'");
            const auto fields = split_ws(body.substr(kTag.size()));
            if (fields.size() != 3) throw ParseError(source, lineno, "header needs three dims");
            for (int k = 0; k < 3; ++k) {
                long long v = 0;
                if (!parse_index(fields[static_cast<std::size_t>(k)], v) || v < 1)
                    throw ParseError(source, lineno, "dims must be positive integers");
                dims.n[static_cast<std::size_t>(k)] = static_cast<Index>(v);
            }
            have_dims = true;
            continue;
        }
        const auto fields = split_ws(body);
        if (fields.size() != 4)
            throw ParseError(source, lineno, "expected 'i j k value', got " +
                                                 std::to_string(fields.size()) + " fields");
        std::array<Index, 3> idx{};
        for (int k = 0; k < 3; ++k) {
            long long v = 0;
            if (!parse_index(fields[static_cast<std::size_t>(k)], v))
                throw ParseError(source, lineno, "index '" +
                                                     std::string(fields[static_cast<std::size_t>(k)]) +
                                                     "' is not an integer");
            if (v < 1 || v > dims[k])
                throw ParseError(source, lineno, "index " + std::to_string(v) + " out of range 1.." +
                                                     std::to_string(dims[k]) + " on mode " +
                                                     std::to_string(k + 1));
            idx[static_cast<std::size_t>(k)] = static_cast<Index>(v - 1);
        }
        double value = 0.0;
        if (!parse_double(fields[3], value))
            throw ParseError(source, lineno, "value '" + std::string(fields[3]) + "' is not a finite number");
        const Index p = idx[0] + dims[0] * (idx[1] + dims[1] * idx[2]);
        if (!seen.insert(p).second)
            throw ParseError(source, lineno, "duplicate coordinate (" + std::string(fields[0]) + ", " +
                                                 std::string(fields[1]) + ", " +
                                                 std::string(fields[2]) + ")");
        positions.push_back(p);
        values.push_back(value);
    }
    if (!have_dims) throw ParseError(source, 0, "missing 'dims:' header");

    MaskedTensor out{DenseTensor3(dims), {}};
    for (std::size_t e = 0; e < positions.size(); ++e) out.tensor.data()[positions[e]] = values[e];
    out.mask = ObservationMask::for_tensor(dims, std::move(positions));
    return out;
}

MaskedTensor load_sparse_tensor(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_sparse_tensor(in, path.string());
}

void write_sparse_tensor(std::ostream& out, const DenseTensor3& t, const ObservationMask& mask) {
    mask.require_shape(t.dims());
    const Dims& d = t.dims();
    out << "dims: " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
    for (Index p : mask.indices()) {
        const Index i = p % d[0], j = (p / d[0]) % d[1], l = p / (d[0] * d[1]);
        out << i + 1 << ' ' << j + 1 << ' ' << l + 1 << ' ' << format_exact(t.data()[p]) << '\n';
    }
}

void save_sparse_tensor(const std::filesystem::path& path, const DenseTensor3& t,
                        const ObservationMask& mask) {
    std::ofstream out = open_out(path);
    write_sparse_tensor(out, t, mask);
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

MaskedMatrix read_matrix_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> observed;
    std::size_t cols = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::vector<bool> obs;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            const std::string_view cell = trim(rest.substr(0, comma));
            if (cell.empty()) {
                row.push_back(0.0);
                obs.push_back(false);
            } else {
                double v = 0.0;
                if (!parse_double(cell, v))
                    throw ParseError(source, lineno, "cell '" + std::string(cell) + "' is not a finite number");
                row.push_back(v);
                obs.push_back(true);
            }
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows.empty()) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw ParseError(source, lineno, "row has " + std::to_string(row.size()) +
                                                 " cells, expected " + std::to_string(cols));
        }
        rows.push_back(std::move(row));
        observed.push_back(std::move(obs));
    }
    if (rows.empty()) throw ParseError(source, 0, "no rows");

    const auto n_rows = static_cast<Index>(rows.size());
    const auto n_cols = static_cast<Index>(cols);
    MaskedMatrix out{Matrix::Zero(n_rows, n_cols), {}};
    std::vector<Index> positions;
    for (Index i = 0; i < n_rows; ++i)
        for (Index j = 0; j < n_cols; ++j) {
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            out.matrix(i, j) = rows[ui][uj];
            if (observed[ui][uj]) positions.push_back(i + n_rows * j);
        }
    out.mask = ObservationMask::for_matrix(n_rows, n_cols, std::move(positions));
    return out;
}

MaskedMatrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const ObservationMask& mask) {
    mask.require_shape(m.rows(), m.cols());
    const Vector ind = mask.indicator();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            if (ind[i + m.rows() * j] != 0.0) out << format_exact(m(i, j));
        }
        out << '\n';
    }
}

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                     const ObservationMask& mask) {
    std::ofstream out = open_out(path);
    write_matrix_csv(out, m, mask);
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace coupled
