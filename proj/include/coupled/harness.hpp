// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coupled/admm.hpp"
#include "coupled/baselines.hpp"
#include "coupled/datagen.hpp"
#include "coupled/risk_bounds.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace coupled {

/// A completion method in an experiment: a norm descriptor (tensor-only when
/// it has no coupled mode) or one of the non-descriptor baselines.
struct Method {
    enum class Kind { Norm, MatrixTraceNorm, CoupledCp };

    std::string label;  ///< as written in the config
    Kind kind = Kind::Norm;
    NormDescriptor descriptor;

    /// Accepts descriptor text and the aliases OTN, SLTN, LTN, MTN, CP.
    static Method parse(const std::string& text);
    [[nodiscard]] bool uses_lambda() const { return kind != Kind::CoupledCp; }
    [[nodiscard]] bool fits_tensor() const { return kind != Kind::MatrixTraceNorm; }
    [[nodiscard]] bool fits_matrix() const {
        return kind != Kind::Norm || !descriptor.coupled_modes.empty();
    }
};

struct LambdaGrid {
    double min = 0.01;
    double max = 5.0;
    int count = 500;
    bool log_scale = false;
    /// Explicit values; overrides min/max/count when non-empty.
    std::vector<double> values;

    [[nodiscard]] std::vector<double> points() const;
    void validate() const;
};

struct FileData {
    std::filesystem::path tensor;
    std::filesystem::path matrix;
    int coupled_mode = 1;
    /// Keep every matrix entry in training; validation MSE then uses the
    /// tensor alone.
    bool matrix_fully_observed = false;
};

struct ExperimentConfig {
    std::optional<SyntheticSpec> synthetic;
    std::optional<FileData> files;
    std::vector<Method> methods;
    LambdaGrid lambdas;
    std::vector<double> train_fractions{0.3, 0.5, 0.7};
    double validation_fraction = 0.1;
    int repetitions = 3;
    std::uint64_t seed = 0;
    SolverOptions solver;
    CpOptions cp;
    std::filesystem::path output_dir = "results";

    /// Risk-bound table settings (used by the `bounds` command).
    std::vector<BoundNorm> bound_norms{kAllBoundNorms.begin(), kAllBoundNorms.end()};
    std::vector<BoundParams> bound_settings;

    /// Parses the JSON document; relative file paths resolve against base_dir.
    static ExperimentConfig from_json(const std::string& text,
                                      const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;
};

/// One repetition's data with its train / validation / test split. The
/// training problem holds only training entries; the full data values live
/// in `data_tensor` / `data_matrix`.
struct DataSplit {
    CoupledProblem train;
    DenseTensor3 data_tensor;
    Matrix data_matrix;
    ObservationMask tensor_validation, tensor_test;
    ObservationMask matrix_validation, matrix_test;
    bool matrix_fully_observed = false;
};

struct Fit {
    DenseTensor3 tensor;  ///< empty for matrix-only methods
    Matrix matrix;        ///< empty for tensor-only methods
    int iterations = 0;
    bool converged = true;
};

/// Fits `method` on split.train at regularization `lambda`.
[[nodiscard]] Fit fit_method(const Method& method, const DataSplit& split, double lambda,
                             const SolverOptions& solver, const CpOptions& cp);

/// Mean squared error on validation entries. Coupled fits pool tensor and
/// matrix entries, unless the matrix is fully observed.
[[nodiscard]] double validation_mse(const Method& method, const DataSplit& split, const Fit& fit);

struct CvResult {
    double lambda = 0.0;
    double validation_mse = 0.0;
    Fit fit;
    std::vector<double> curve;  ///< validation MSE per grid point (NaN on failure)
};

/// Grid search on validation MSE; ties go to the larger lambda. Throws if
/// every fit fails.
[[nodiscard]] CvResult cross_validate(const Method& method, const DataSplit& split,
                                      const std::vector<double>& grid,
                                      const SolverOptions& solver, const CpOptions& cp);

/// Mean of (estimate - data)^2 over mask; NaN when the mask is empty.
[[nodiscard]] double masked_mse(const Vector& estimate, const Vector& data,
                                const ObservationMask& mask);

struct ResultRow {
    std::size_t method = 0;  ///< index into the config's method list
    std::string label;
    double fraction = 0.0;
    int repetition = 0;
    double lambda = 0.0;  ///< NaN when the method has no lambda
    double validation_mse = 0.0;
    double tensor_test_mse = 0.0;  ///< NaN when not applicable
    double matrix_test_mse = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string error;  ///< empty on success
    double seconds = 0.0;
};

struct SummaryRow {
    std::size_t method = 0;
    std::string label;
    double fraction = 0.0;
    int count = 0;
    double tensor_mean = 0.0, tensor_std = 0.0;
    double matrix_mean = 0.0, matrix_std = 0.0;
};

struct ExperimentReport {
    std::vector<ResultRow> rows;

    [[nodiscard]] std::vector<SummaryRow> summary() const;
    [[nodiscard]] std::vector<const ResultRow*> failures() const;
};

/// Builds the split for (repetition, fraction) of a config.
[[nodiscard]] DataSplit make_split(const ExperimentConfig& config, int repetition, double fraction);

/// Runs every method x fraction x repetition cell; failures are recorded
/// per row and do not stop the run.
[[nodiscard]] ExperimentReport run(const ExperimentConfig& config);

/// Writes results.csv, summary.csv, plotdata.csv and timing.csv into dir.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Writes bounds.csv for the config's bound settings and norms.
void emit_bounds(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Writes each repetition's synthetic data (noisy and clean) into dir.
void emit_synthetic(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Deterministic 64-bit seed from a base and up to three stream tags.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                        std::uint64_t c = 0);

/// Quotes a CSV field when it contains a comma, quote or newline.
[[nodiscard]] std::string csv_field(const std::string& s);

}  // namespace coupled
