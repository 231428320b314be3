// SPDX-License-Identifier: Apache-2.0
#include "coupled/harness.hpp"

#include "coupled/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace coupled {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<T>();
}

SyntheticSpec parse_synthetic(const json& j) {
    check_keys(j, "data.synthetic",
               {"dims", "tucker_rank", "matrix_cols", "matrix_rank", "shared", "noise"});
    SyntheticSpec s;
    if (j.contains("dims")) {
        const auto d = j.at("dims").get<std::vector<Index>>();
        if (d.size() != 3) throw std::invalid_argument("data.synthetic.dims needs 3 entries");
        s.dims = Dims{{d[0], d[1], d[2]}};
    }
    if (j.contains("tucker_rank")) {
        const auto r = j.at("tucker_rank").get<std::vector<Index>>();
        if (r.size() != 3) throw std::invalid_argument("data.synthetic.tucker_rank needs 3 entries");
        s.tucker_rank = {r[0], r[1], r[2]};
    }
    s.matrix_cols = get_or<Index>(j, "matrix_cols", s.matrix_cols);
    s.matrix_rank = get_or<Index>(j, "matrix_rank", s.matrix_rank);
    s.shared = get_or<Index>(j, "shared", s.shared);
    if (j.contains("noise")) {
        const json& n = j.at("noise");
        if (n.is_string()) {
            const auto preset = n.get<std::string>();
            if (preset == "default") {
                s.noise_mean = 0.01;
                s.noise_std = 1.0;
            } else if (preset == "low") {
                s.noise_mean = 0.0;
                s.noise_std = 0.01;
            } else if (preset == "none") {
                s.noise_mean = 0.0;
                s.noise_std = 0.0;
            } else {
                throw std::invalid_argument("data.synthetic.noise: unknown preset '" + preset + "'");
            }
        } else {
            check_keys(n, "data.synthetic.noise", {"mean", "std"});
            s.noise_mean = get_or(n, "mean", s.noise_mean);
            s.noise_std = get_or(n, "std", s.noise_std);
        }
    }
    return s;
}

BoundParams parse_bound_params(const json& j, BoundParams p, const std::string& where) {
    check_keys(j, where,
               {"n", "m", "rank", "coupled_rank", "matrix_rank", "B_T", "B_M", "Lambda", "samples",
                "tensor_samples", "matrix_samples", "C1", "C2", "c", "c1", "c2", "c3"});
    auto triple = [&](const char* key, std::array<double, 3>& out) {
        if (!j.contains(key)) return;
        const auto v = j.at(key).get<std::vector<double>>();
        if (v.size() != 3) throw std::invalid_argument(where + "." + key + " needs 3 entries");
        out = {v[0], v[1], v[2]};
    };
    triple("n", p.n);
    triple("rank", p.rank);
    p.m = get_or(j, "m", p.m);
    p.coupled_rank = get_or(j, "coupled_rank", p.coupled_rank);
    p.matrix_rank = get_or(j, "matrix_rank", p.matrix_rank);
    p.B_T = get_or(j, "B_T", p.B_T);
    p.B_M = get_or(j, "B_M", p.B_M);
    p.Lambda = get_or(j, "Lambda", p.Lambda);
    p.samples = get_or(j, "samples", p.samples);
    p.tensor_samples = get_or(j, "tensor_samples", p.tensor_samples);
    p.matrix_samples = get_or(j, "matrix_samples", p.matrix_samples);
    p.C1 = get_or(j, "C1", p.C1);
    p.C2 = get_or(j, "C2", p.C2);
    p.c = get_or(j, "c", p.c);
    p.c1 = get_or(j, "c1", p.c1);
    p.c2 = get_or(j, "c2", p.c2);
    p.c3 = get_or(j, "c3", p.c3);
    return p;
}

void parse_bounds(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "bounds", {"norms", "base", "from_synthetic", "settings", "rank_sweep"});
    if (j.contains("norms")) {
        cfg.bound_norms.clear();
        for (const auto& n : j.at("norms")) cfg.bound_norms.push_back(parse_bound_norm(n.get<std::string>()));
    }
    BoundParams base;
    if (get_or(j, "from_synthetic", false)) {
        if (!cfg.synthetic) throw std::invalid_argument("bounds.from_synthetic needs synthetic data");
        base = rank_geometry(*cfg.synthetic);
    }
    if (j.contains("base")) base = parse_bound_params(j.at("base"), base, "bounds.base");
    if (j.contains("settings"))
        for (const auto& s : j.at("settings"))
            cfg.bound_settings.push_back(parse_bound_params(s, base, "bounds.settings[]"));
    if (j.contains("rank_sweep"))
        for (const auto& v : j.at("rank_sweep")) {
            BoundParams p = base;
            const double r = v.get<double>();
            for (std::size_t k = 0; k < 3; ++k) p.rank[k] = std::min(r, p.n[k]);
            p.coupled_rank = std::min(r, p.n[0]);
            p.matrix_rank = std::min({r, p.n[0], p.m});
            cfg.bound_settings.push_back(p);
        }
    if (cfg.bound_settings.empty()) cfg.bound_settings.push_back(base);
}

std::string num(double v) { return std::isnan(v) ? std::string() : format_10(v); }

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

struct Split3 {
    std::vector<Index> train, validation, test;
};

Split3 split_observed(const std::vector<Index>& observed, double train, double validation,
                      std::uint64_t seed) {
    const auto n = static_cast<Index>(observed.size());
    const auto n_train = static_cast<std::size_t>(std::llround(train * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(validation * static_cast<double>(n)));
    if (n_train + n_val > observed.size())
        throw std::invalid_argument("split fractions exceed the observed entries");
    const std::vector<Index> perm = random_permutation(n, seed);
    Split3 s;
    for (std::size_t p = 0; p < perm.size(); ++p) {
        const Index v = observed[static_cast<std::size_t>(perm[p])];
        if (p < n_train) s.train.push_back(v);
        else if (p < n_train + n_val) s.validation.push_back(v);
        else s.test.push_back(v);
    }
    return s;
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix(splitmix(splitmix(splitmix(base) ^ a) ^ b) ^ c);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

Method Method::parse(const std::string& text) {
    Method m;
    m.label = text;
    auto tensor_only = [&](Tag t) {
        m.kind = Kind::Norm;
        m.descriptor.tags = {t, t, t};
    };
    if (text == "OTN") tensor_only(Tag::Overlapped);
    else if (text == "SLTN") tensor_only(Tag::ScaledLatent);
    else if (text == "LTN") tensor_only(Tag::Latent);
    else if (text == "MTN") m.kind = Kind::MatrixTraceNorm;
    else if (text == "CP") m.kind = Kind::CoupledCp;
    else {
        m.descriptor = parse_descriptor(text);
        if (!is_solver_supported(m.descriptor))
            throw std::invalid_argument("norm '" + text + "' is not supported by the solver");
        if (m.descriptor.coupled_modes.size() > 1)
            throw std::invalid_argument("norm '" + text + "': experiments couple one matrix");
    }
    return m;
}

std::vector<double> LambdaGrid::points() const {
    validate();
    if (!values.empty()) return values;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) return {min};
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out.push_back(log_scale ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                                : min + t * (max - min));
    }
    out.front() = min;
    out.back() = max;
    return out;
}

void LambdaGrid::validate() const {
    if (!values.empty()) {
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("lambda values must be finite and >= 0");
        return;
    }
    if (count < 1) throw std::invalid_argument("lambda count must be >= 1");
    if (!(min > 0.0) || !(max >= min) || !std::isfinite(max))
        throw std::invalid_argument("lambda grid needs 0 < min <= max");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text,
                                             const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"data", "norms", "lambda", "masks", "repetitions", "seed", "solver", "cp",
                "output_dir", "bounds"});
    ExperimentConfig cfg;
    try {
        if (j.contains("data")) {
            const json& d = j.at("data");
            check_keys(d, "data", {"synthetic", "files"});
            if (d.contains("synthetic")) cfg.synthetic = parse_synthetic(d.at("synthetic"));
            if (d.contains("files")) {
                const json& f = d.at("files");
                check_keys(f, "data.files", {"tensor", "matrix", "coupled_mode", "matrix_fully_observed"});
                FileData fd;
                fd.tensor = base_dir / f.at("tensor").get<std::string>();
                fd.matrix = base_dir / f.at("matrix").get<std::string>();
                fd.coupled_mode = get_or(f, "coupled_mode", 1);
                fd.matrix_fully_observed = get_or(f, "matrix_fully_observed", false);
                cfg.files = fd;
            }
        }
        if (j.contains("norms")) {
            cfg.methods.clear();
            for (const auto& n : j.at("norms")) cfg.methods.push_back(Method::parse(n.get<std::string>()));
        }
        if (j.contains("lambda")) {
            const json& l = j.at("lambda");
            check_keys(l, "lambda", {"min", "max", "count", "scale", "values"});
            cfg.lambdas.min = get_or(l, "min", cfg.lambdas.min);
            cfg.lambdas.max = get_or(l, "max", cfg.lambdas.max);
            cfg.lambdas.count = get_or(l, "count", cfg.lambdas.count);
            const auto scale = get_or<std::string>(l, "scale", "linear");
            if (scale != "linear" && scale != "log")
                throw std::invalid_argument("lambda.scale must be 'linear' or 'log'");
            cfg.lambdas.log_scale = scale == "log";
            if (l.contains("values")) cfg.lambdas.values = l.at("values").get<std::vector<double>>();
        }
        if (j.contains("masks")) {
            const json& m = j.at("masks");
            check_keys(m, "masks", {"train_fractions", "validation"});
            if (m.contains("train_fractions"))
                cfg.train_fractions = m.at("train_fractions").get<std::vector<double>>();
            cfg.validation_fraction = get_or(m, "validation", cfg.validation_fraction);
        }
        cfg.repetitions = get_or(j, "repetitions", cfg.repetitions);
        cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            check_keys(s, "solver", {"beta", "max_iters", "tol", "tol_primal", "tol_dual"});
            cfg.solver.beta = get_or(s, "beta", cfg.solver.beta);
            cfg.solver.max_iters = get_or(s, "max_iters", cfg.solver.max_iters);
            const double tol = get_or(s, "tol", cfg.solver.tol_primal);
            cfg.solver.tol_primal = get_or(s, "tol_primal", tol);
            cfg.solver.tol_dual = get_or(s, "tol_dual", tol);
        }
        if (j.contains("cp")) {
            const json& c = j.at("cp");
            check_keys(c, "cp", {"rank", "iters", "tol"});
            cfg.cp.rank = get_or<Index>(c, "rank", cfg.cp.rank);
            cfg.cp.iters = get_or(c, "iters", cfg.cp.iters);
            cfg.cp.tol = get_or(c, "tol", cfg.cp.tol);
        }
        if (j.contains("output_dir")) {
            const std::filesystem::path out = j.at("output_dir").get<std::string>();
            cfg.output_dir = out.is_absolute() ? out : base_dir / out;
        } else {
            cfg.output_dir = base_dir / cfg.output_dir;
        }
        if (j.contains("bounds")) parse_bounds(j.at("bounds"), cfg);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), path.parent_path());
}

void ExperimentConfig::validate() const {
    if (synthetic && files) throw std::invalid_argument("config: give synthetic or files data, not both");
    if (synthetic) synthetic->validate();
    if (files) require_mode(files->coupled_mode);
    lambdas.validate();
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    for (double f : train_fractions) MaskSpec{f, validation_fraction, 0}.validate();
    solver.validate();
    if (cp.rank < 1) throw std::invalid_argument("cp.rank must be >= 1");
    const int mode = files ? files->coupled_mode : 1;
    for (const Method& m : methods)
        if (m.kind == Method::Kind::Norm && !m.descriptor.coupled_modes.empty() &&
            m.descriptor.coupled_modes.front() != mode)
            throw std::invalid_argument("norm '" + m.label + "' couples mode " +
                                        std::to_string(m.descriptor.coupled_modes.front()) +
                                        " but the data couples mode " + std::to_string(mode));
    for (const BoundParams& p : bound_settings) p.validate();
}

// ---------------------------------------------------------------------------

DataSplit make_split(const ExperimentConfig& config, int repetition, double fraction) {
    const auto rep = static_cast<std::uint64_t>(repetition);
    const auto frac_bits = std::bit_cast<std::uint64_t>(fraction);
    DataSplit s;
    if (config.synthetic) {
        SyntheticSpec spec = *config.synthetic;
        spec.seed = derive_seed(config.seed, 1, rep);
        const SyntheticInstance inst = gen_instance(spec);
        s.data_tensor = inst.tensor;
        s.data_matrix = inst.matrix;
        const MaskSplit tm = gen_masks(spec.dims, {fraction, config.validation_fraction,
                                                   derive_seed(config.seed, 2, rep, frac_bits)});
        const MaskSplit mm = gen_masks(s.data_matrix.rows(), s.data_matrix.cols(),
                                       {fraction, config.validation_fraction,
                                        derive_seed(config.seed, 3, rep, frac_bits)});
        s.train = CoupledProblem::coupled(mask_apply(s.data_tensor, tm.train), tm.train,
                                          mask_apply(s.data_matrix, mm.train), mm.train, 1);
        s.tensor_validation = tm.validation;
        s.tensor_test = tm.test;
        s.matrix_validation = mm.validation;
        s.matrix_test = mm.test;
        return s;
    }
    if (!config.files) throw std::invalid_argument("config has no data source");
    const FileData& fd = *config.files;
    MaskedTensor t = load_sparse_tensor(fd.tensor);
    MaskedMatrix m = load_matrix_csv(fd.matrix);
    s.data_tensor = std::move(t.tensor);
    s.data_matrix = std::move(m.matrix);
    const Dims& dims = s.data_tensor.dims();
    const Index rows = s.data_matrix.rows(), cols = s.data_matrix.cols();

    const Split3 ts = split_observed(t.mask.indices(), fraction, config.validation_fraction,
                                     derive_seed(config.seed, 2, rep, frac_bits));
    const ObservationMask t_train = ObservationMask::for_tensor(dims, ts.train);
    s.tensor_validation = ObservationMask::for_tensor(dims, ts.validation);
    s.tensor_test = ObservationMask::for_tensor(dims, ts.test);

    ObservationMask m_train;
    if (fd.matrix_fully_observed) {
        m_train = m.mask;
        s.matrix_validation = ObservationMask::for_matrix(rows, cols, {});
        s.matrix_test = ObservationMask::for_matrix(rows, cols, {});
        s.matrix_fully_observed = true;
    } else {
        const Split3 ms = split_observed(m.mask.indices(), fraction, config.validation_fraction,
                                         derive_seed(config.seed, 3, rep, frac_bits));
        m_train = ObservationMask::for_matrix(rows, cols, ms.train);
        s.matrix_validation = ObservationMask::for_matrix(rows, cols, ms.validation);
        s.matrix_test = ObservationMask::for_matrix(rows, cols, ms.test);
    }
    s.train = CoupledProblem::coupled(mask_apply(s.data_tensor, t_train), t_train,
                                      mask_apply(s.data_matrix, m_train), m_train, fd.coupled_mode);
    return s;
}

Fit fit_method(const Method& method, const DataSplit& split, double lambda,
               const SolverOptions& solver, const CpOptions& cp) {
    Fit f;
    const CoupledProblem& p = split.train;
    switch (method.kind) {
        case Method::Kind::Norm: {
            SolverOptions o = solver;
            o.lambda = lambda;
            CompletionResult r;
            if (method.descriptor.coupled_modes.empty())
                r = solve(CoupledProblem::tensor_only(p.tensor, p.tensor_mask), method.descriptor, o);
            else
                r = solve(p, method.descriptor, o);
            f.tensor = std::move(r.tensor);
            if (!r.matrices.empty()) f.matrix = r.matrices.front();
            f.iterations = r.iterations;
            f.converged = r.converged;
            break;
        }
        case Method::Kind::MatrixTraceNorm: {
            const MatrixBlock& b = p.matrices.at(0);
            MatrixCompletionResult r = complete_matrix_mtn(b.observed, b.mask, lambda, solver);
            f.matrix = std::move(r.value);
            f.iterations = r.iterations;
            f.converged = r.converged;
            break;
        }
        case Method::Kind::CoupledCp: {
            const MatrixBlock& b = p.matrices.at(0);
            if (b.mode != 1) throw std::invalid_argument("CP baseline couples mode 1 only");
            CpResult r = coupled_cp_als(p.tensor, p.tensor_mask, b.observed, b.mask, cp);
            f.tensor = r.factors.tensor();
            f.matrix = r.factors.matrix();
            f.iterations = r.sweeps;
            f.converged = true;
            break;
        }
    }
    return f;
}

double masked_mse(const Vector& estimate, const Vector& data, const ObservationMask& mask) {
    if (mask.count() == 0) return kNaN;
    double sq = 0.0;
    for (Index p : mask.indices()) sq += (estimate[p] - data[p]) * (estimate[p] - data[p]);
    return sq / static_cast<double>(mask.count());
}

double validation_mse(const Method& method, const DataSplit& split, const Fit& fit) {
    double sq = 0.0;
    std::size_t count = 0;
    if (method.fits_tensor()) {
        for (Index p : split.tensor_validation.indices()) {
            const double r = fit.tensor.data()[p] - split.data_tensor.data()[p];
            sq += r * r;
        }
        count += split.tensor_validation.count();
    }
    const bool matrix_counts = method.fits_matrix() &&
                               (!split.matrix_fully_observed || !method.fits_tensor());
    if (matrix_counts) {
        for (Index p : split.matrix_validation.indices()) {
            const double r = fit.matrix.data()[p] - split.data_matrix.data()[p];
            sq += r * r;
        }
        count += split.matrix_validation.count();
    }
    return count ? sq / static_cast<double>(count) : kNaN;
}

CvResult cross_validate(const Method& method, const DataSplit& split,
                        const std::vector<double>& grid, const SolverOptions& solver,
                        const CpOptions& cp) {
    if (grid.empty()) throw std::invalid_argument("cross_validate: empty lambda grid");
    CvResult best;
    bool found = false;
    std::string last_error;
    for (double lambda : grid) {
        double mse = kNaN;
        Fit fit;
        try {
            fit = fit_method(method, split, lambda, solver, cp);
            mse = validation_mse(method, split, fit);
        } catch (const std::exception& e) {
            last_error = e.what();
        }
        best.curve.push_back(mse);
        if (std::isnan(mse)) continue;
        if (!found || mse < best.validation_mse ||
            (mse == best.validation_mse && lambda > best.lambda)) {
            found = true;
            best.lambda = lambda;
            best.validation_mse = mse;
            best.fit = std::move(fit);
        }
    }
    if (!found)
        throw std::runtime_error("every fit failed" + (last_error.empty() ? std::string(" (no validation entries)")
                                                                          : ": " + last_error));
    return best;
}

ExperimentReport run(const ExperimentConfig& config) {
    config.validate();
    const std::vector<double> grid = config.lambdas.points();
    ExperimentReport report;
    for (std::size_t fi = 0; fi < config.train_fractions.size(); ++fi) {
        const double fraction = config.train_fractions[fi];
        for (int rep = 0; rep < config.repetitions; ++rep) {
            std::optional<DataSplit> split;
            std::string split_error;
            try {
                split = make_split(config, rep, fraction);
            } catch (const std::exception& e) {
                split_error = e.what();
            }
            for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                const Method& method = config.methods[mi];
                ResultRow row;
                row.method = mi;
                row.label = method.label;
                row.fraction = fraction;
                row.repetition = rep;
                row.lambda = row.validation_mse = row.tensor_test_mse = row.matrix_test_mse = kNaN;
                const auto start = std::chrono::steady_clock::now();
                try {
                    if (!split) throw std::runtime_error(split_error);
                    const std::vector<double> cells =
                        method.uses_lambda() ? grid : std::vector<double>{kNaN};
                    CpOptions cp = config.cp;
                    cp.seed = derive_seed(config.seed, 4, static_cast<std::uint64_t>(rep));
                    CvResult cv = cross_validate(method, *split, cells, config.solver, cp);
                    row.lambda = cv.lambda;
                    row.validation_mse = cv.validation_mse;
                    if (method.fits_tensor())
                        row.tensor_test_mse =
                            masked_mse(cv.fit.tensor.data(), split->data_tensor.data(), split->tensor_test);
                    if (method.fits_matrix())
                        row.matrix_test_mse = masked_mse(
                            Eigen::Map<const Vector>(cv.fit.matrix.data(), cv.fit.matrix.size()),
                            Eigen::Map<const Vector>(split->data_matrix.data(), split->data_matrix.size()),
                            split->matrix_test);
                    row.iterations = cv.fit.iterations;
                    row.converged = cv.fit.converged;
                } catch (const std::exception& e) {
                    row.error = e.what();
                    if (row.error.empty()) row.error = "unknown failure";
                }
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

std::vector<SummaryRow> ExperimentReport::summary() const {
    std::vector<SummaryRow> out;
    std::vector<std::vector<double>> tensor_vals, matrix_vals;
    for (const ResultRow& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
            return s.method == r.method && s.fraction == r.fraction;
        });
        std::size_t idx = 0;
        if (it == out.end()) {
            SummaryRow s;
            s.method = r.method;
            s.label = r.label;
            s.fraction = r.fraction;
            out.push_back(s);
            tensor_vals.emplace_back();
            matrix_vals.emplace_back();
            idx = out.size() - 1;
        } else {
            idx = static_cast<std::size_t>(it - out.begin());
        }
        if (!r.error.empty()) continue;
        ++out[idx].count;
        if (!std::isnan(r.tensor_test_mse)) tensor_vals[idx].push_back(r.tensor_test_mse);
        if (!std::isnan(r.matrix_test_mse)) matrix_vals[idx].push_back(r.matrix_test_mse);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].tensor_mean = mean_of(tensor_vals[i]);
        out[i].tensor_std = tensor_vals[i].empty() ? kNaN : sample_std(tensor_vals[i], out[i].tensor_mean);
        out[i].matrix_mean = mean_of(matrix_vals[i]);
        out[i].matrix_std = matrix_vals[i].empty() ? kNaN : sample_std(matrix_vals[i], out[i].matrix_mean);
    }
    std::stable_sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
        return a.method != b.method ? a.method < b.method : a.fraction < b.fraction;
    });
    return out;
}

std::vector<const ResultRow*> ExperimentReport::failures() const {
    std::vector<const ResultRow*> out;
    for (const ResultRow& r : rows)
        if (!r.error.empty()) out.push_back(&r);
    return out;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    const auto results_path = dir / "results.csv";
    std::ofstream results = open_csv(results_path);
    results << "method,norm,fraction,repetition,lambda,validation_mse,tensor_test_mse,"
               "matrix_test_mse,iterations,converged,error\n";
    for (const ResultRow& r : report.rows)
        results << r.method << ',' << csv_field(r.label) << ',' << num(r.fraction) << ','
                << r.repetition << ',' << num(r.lambda) << ',' << num(r.validation_mse) << ','
                << num(r.tensor_test_mse) << ',' << num(r.matrix_test_mse) << ','
                << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << csv_field(r.error)
                << '\n';
    finish(results, results_path);

    const std::vector<SummaryRow> summary = report.summary();
    const auto summary_path = dir / "summary.csv";
    std::ofstream sum = open_csv(summary_path);
    sum << "method,norm,fraction,count,tensor_mse_mean,tensor_mse_std,matrix_mse_mean,"
           "matrix_mse_std\n";
    for (const SummaryRow& s : summary)
        sum << s.method << ',' << csv_field(s.label) << ',' << num(s.fraction) << ',' << s.count
            << ',' << num(s.tensor_mean) << ',' << num(s.tensor_std) << ','
            << num(s.matrix_mean) << ',' << num(s.matrix_std) << '\n';
    finish(sum, summary_path);

    const auto plot_path = dir / "plotdata.csv";
    std::ofstream plot = open_csv(plot_path);
    plot << "series,fraction,tensor_mse,matrix_mse\n";
    for (const SummaryRow& s : summary)
        plot << csv_field(s.label) << ',' << num(s.fraction) << ',' << num(s.tensor_mean) << ','
             << num(s.matrix_mean) << '\n';
    finish(plot, plot_path);

    const auto timing_path = dir / "timing.csv";
    std::ofstream timing = open_csv(timing_path);
    timing << "method,norm,fraction,repetition,seconds\n";
    for (const ResultRow& r : report.rows)
        timing << r.method << ',' << csv_field(r.label) << ',' << num(r.fraction) << ','
               << r.repetition << ',' << num(r.seconds) << '\n';
    finish(timing, timing_path);
}

void emit_bounds(const ExperimentConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / "bounds.csv";
    std::ofstream out = open_csv(path);
    out << "setting,norm,n1,n2,n3,m,r1,r2,r3,coupled_rank,matrix_rank,samples,bound\n";
    for (std::size_t s = 0; s < config.bound_settings.size(); ++s) {
        const BoundParams& p = config.bound_settings[s];
        for (BoundNorm n : config.bound_norms)
            out << s << ',' << to_string(n) << ',' << num(p.n[0]) << ',' << num(p.n[1]) << ','
                << num(p.n[2]) << ',' << num(p.m) << ',' << num(p.rank[0]) << ','
                << num(p.rank[1]) << ',' << num(p.rank[2]) << ',' << num(p.coupled_rank) << ','
                << num(p.matrix_rank) << ',' << num(p.samples) << ',' << num(bound(n, p)) << '\n';
    }
    finish(out, path);
}

void emit_synthetic(const ExperimentConfig& config, const std::filesystem::path& dir) {
    if (!config.synthetic) throw std::invalid_argument("gen needs a synthetic data section");
    for (int rep = 0; rep < config.repetitions; ++rep) {
        SyntheticSpec spec = *config.synthetic;
        spec.seed = derive_seed(config.seed, 1, static_cast<std::uint64_t>(rep));
        const SyntheticInstance inst = gen_instance(spec);
        const auto sub = dir / ("rep" + std::to_string(rep));
        std::filesystem::create_directories(sub);
        const ObservationMask tfull = ObservationMask::full_tensor(spec.dims);
        const ObservationMask mfull = ObservationMask::full_matrix(inst.matrix.rows(), inst.matrix.cols());
        save_sparse_tensor(sub / "tensor.txt", inst.tensor, tfull);
        save_matrix_csv(sub / "matrix.csv", inst.matrix, mfull);
        save_sparse_tensor(sub / "clean_tensor.txt", inst.clean_tensor, tfull);
        save_matrix_csv(sub / "clean_matrix.csv", inst.clean_matrix, mfull);
    }
}

}  // namespace coupled
