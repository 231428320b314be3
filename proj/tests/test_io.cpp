// SPDX-License-Identifier: Apache-2.0
#include "coupled/io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace coupled;

namespace {

/// Line number reported when parsing `text` as a sparse tensor, or -1 if no ParseError.
long sparse_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)read_sparse_tensor(in);
    } catch (const ParseError& e) {
        return static_cast<long>(e.line());
    }
    return -1;
}

long csv_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)read_matrix_csv(in);
    } catch (const ParseError& e) {
        return static_cast<long>(e.line());
    }
    return -1;
}

std::vector<Index> random_subset(Index total, double fraction) {
    std::vector<Index> out;
    for (Index p = 0; p < total; ++p)
        if (oracle::uniform(0.0, 1.0) < fraction) out.push_back(p);
    return out;
}

}  // namespace

TEST(SparseTensor, ParsesCoordinateFormat) {
    std::istringstream in(
        "# comment\n"
        "dims: 2 3 4\n"
        "\n"
        "1 1 1 1.5\n"
        "2 3 4 -2e-3\n"
        "1 2 3 +7\n");
    const MaskedTensor mt = read_sparse_tensor(in);
    EXPECT_EQ(mt.tensor.dims(), (Dims{{2, 3, 4}}));
    EXPECT_EQ(mt.mask.count(), 3u);
    EXPECT_EQ(mt.tensor(0, 0, 0), 1.5);
    EXPECT_EQ(mt.tensor(1, 2, 3), -2e-3);
    EXPECT_EQ(mt.tensor(0, 1, 2), 7.0);
    EXPECT_TRUE(mt.mask.contains(0 + 2 * (1 + 3 * 2)));
    EXPECT_FALSE(mt.mask.contains(1));
    EXPECT_EQ(mt.tensor(1, 0, 0), 0.0);
}

TEST(SparseTensor, RoundTripIsBitExact) {
    for (int trial = 0; trial < 10; ++trial) {
        const Dims d{{oracle::uniform_int(1, 6), oracle::uniform_int(1, 6), oracle::uniform_int(1, 6)}};
        DenseTensor3 t = oracle::random_tensor(d);
        t.data() *= std::pow(10.0, oracle::uniform(-8.0, 8.0));
        const ObservationMask mask = ObservationMask::for_tensor(d, random_subset(d[0] * d[1] * d[2], 0.5));
        std::stringstream io;
        write_sparse_tensor(io, t, mask);
        const MaskedTensor back = read_sparse_tensor(io);
        EXPECT_EQ(back.tensor.dims(), d);
        EXPECT_EQ(back.mask.indices(), mask.indices());
        for (Index p : mask.indices()) EXPECT_EQ(back.tensor.data()[p], t.data()[p]);
    }
}

TEST(SparseTensor, FileRoundTrip) {
    const Dims d{{3, 2, 2}};
    const DenseTensor3 t = oracle::random_tensor(d);
    const ObservationMask mask = ObservationMask::full_tensor(d);
    const auto path = std::filesystem::temp_directory_path() / "coupled_io_roundtrip.tns";
    save_sparse_tensor(path, t, mask);
    const MaskedTensor back = load_sparse_tensor(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.tensor.data(), t.data());
    EXPECT_EQ(back.mask.count(), 12u);
    EXPECT_THROW((void)load_sparse_tensor(path), std::runtime_error);
}

TEST(SparseTensor, ErrorsCarryLineNumbers) {
    EXPECT_EQ(sparse_error_line("1 1 1 2\n"), 1);
    EXPECT_EQ(sparse_error_line("dims: 2 2\n"), 1);
    EXPECT_EQ(sparse_error_line("dims: 2 0 2\n"), 1);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1 1 1\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n\n1 x 1 1\n"), 3);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1.5 1 1\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 3 1\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n0 1 1 1\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1 abc\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1 nan\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1 inf\n"), 2);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n1 1 1 1\n# x\n1 1 1 2\n"), 4);
    EXPECT_EQ(sparse_error_line(""), 0);
    EXPECT_EQ(sparse_error_line("dims: 2 2 2\n2 2 2 1\n"), -1);
}

TEST(SparseTensor, MessageNamesSource) {
    std::istringstream in("dims: 2 2 2\n1 1 9 1\n");
    try {
        (void)read_sparse_tensor(in, "data.tns");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("data.tns:2:", 0), 0u) << e.what();
    }
}

TEST(MatrixCsv, EmptyCellsAreUnobserved) {
    std::istringstream in("1,,3\n,5, 6 \n");
    const MaskedMatrix mm = read_matrix_csv(in);
    ASSERT_EQ(mm.matrix.rows(), 2);
    ASSERT_EQ(mm.matrix.cols(), 3);
    EXPECT_EQ(mm.mask.count(), 4u);
    EXPECT_EQ(mm.matrix(0, 0), 1.0);
    EXPECT_EQ(mm.matrix(1, 2), 6.0);
    EXPECT_EQ(mm.matrix(0, 1), 0.0);
    EXPECT_FALSE(mm.mask.contains(0 + 2 * 1));
    EXPECT_FALSE(mm.mask.contains(1 + 2 * 0));
    EXPECT_TRUE(mm.mask.contains(1 + 2 * 1));
}

TEST(MatrixCsv, RoundTripIsBitExact) {
    for (int trial = 0; trial < 10; ++trial) {
        const Index r = oracle::uniform_int(1, 8), c = oracle::uniform_int(2, 8);
        Matrix m = oracle::random_matrix(r, c) * std::pow(10.0, oracle::uniform(-10.0, 10.0));
        const ObservationMask mask = ObservationMask::for_matrix(r, c, random_subset(r * c, 0.7));
        std::stringstream io;
        write_matrix_csv(io, m, mask);
        const MaskedMatrix back = read_matrix_csv(io);
        // A row with every cell empty still has commas, so the shape survives.
        EXPECT_EQ(back.matrix.rows(), r);
        EXPECT_EQ(back.matrix.cols(), c);
        EXPECT_EQ(back.mask.indices(), mask.indices());
        for (Index p : mask.indices()) EXPECT_EQ(back.matrix.data()[p], m.data()[p]);
    }
}

TEST(MatrixCsv, FileRoundTrip) {
    const Matrix m = oracle::random_matrix(4, 3);
    const auto path = std::filesystem::temp_directory_path() / "coupled_io_roundtrip.csv";
    save_matrix_csv(path, m, ObservationMask::full_matrix(4, 3));
    const MaskedMatrix back = load_matrix_csv(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.matrix, m);
}

TEST(MatrixCsv, ErrorsCarryLineNumbers) {
    EXPECT_EQ(csv_error_line("1,2\n3,4,5\n"), 2);
    EXPECT_EQ(csv_error_line("1,2\n\n3\n"), 3);
    EXPECT_EQ(csv_error_line("1,2\nx,4\n"), 2);
    EXPECT_EQ(csv_error_line("1,nan\n"), 1);
    EXPECT_EQ(csv_error_line("1,2 3\n"), 1);
    EXPECT_EQ(csv_error_line(""), 0);
    EXPECT_EQ(csv_error_line("1,2\n,\n"), -1);
}

TEST(FormatExact, RoundTripsEveryDouble) {
    const double specials[] = {0.0,
                               -0.0,
                               1.0,
                               0.1,
                               1.0 / 3.0,
                               std::numeric_limits<double>::min(),
                               std::numeric_limits<double>::denorm_min(),
                               std::numeric_limits<double>::max(),
                               -123456789.123456789};
    for (double v : specials) EXPECT_EQ(std::strtod(format_exact(v).c_str(), nullptr), v) << v;
    for (int i = 0; i < 10000; ++i) {
        const double v = oracle::normal() * std::pow(10.0, oracle::uniform(-300.0, 300.0));
        EXPECT_EQ(std::strtod(format_exact(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_exact(0.1), "0.1");
    EXPECT_EQ(format_exact(2.0), "2");
}

TEST(Format10, TenSignificantDigits) {
    EXPECT_EQ(format_10(1.0 / 3.0), "0.3333333333");
    EXPECT_EQ(format_10(2.0), "2");
    EXPECT_EQ(format_10(123456789012.0), "1.23456789e+11");
}
