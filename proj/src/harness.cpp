#include "qks/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "qks/io.hpp"
#include "qks/parallel.hpp"
#include "qks/random.hpp"
#include "qks/regression.hpp"

namespace qks {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::uint64_t kDatasetStream = 1;
constexpr std::uint64_t kHaarStream = 2;
constexpr std::size_t kReportedEigenvalues = 20;

std::vector<double> to_std(const VectorXd &v) { return {v.data(), v.data() + v.size()}; }

// --- TOML -------------------------------------------------------------------

class Section {
  public:
    Section(const toml::table &table, std::string name, std::set<std::string> allowed)
        : table_(table), name_(std::move(name)), allowed_(std::move(allowed)) {
        for (auto &&[key, node] : table_) {
            (void)node;
            const std::string k(key.str());
            if (!allowed_.contains(k)) {
                throw std::invalid_argument(fmt::format("config: unknown key '{}{}'",
                                                        name_.empty() ? "" : name_ + ".", k));
            }
        }
    }

    template <typename T>
    std::optional<T> get(const std::string &key) const {
        const auto node = table_[key];
        if (!node) { return std::nullopt; }
        if (auto value = node.template value<T>()) { return *value; }
        throw std::invalid_argument(fmt::format("config: '{}{}' has the wrong type",
                                                name_.empty() ? "" : name_ + ".", key));
    }

    const toml::table *sub(const std::string &key) const {
        const auto node = table_[key];
        if (!node) { return nullptr; }
        if (const auto *t = node.as_table()) { return t; }
        throw std::invalid_argument("config: '" + key + "' must be a table");
    }

    toml::node_view<const toml::node> node(const std::string &key) const { return table_[key]; }

  private:
    const toml::table &table_;
    std::string name_;
    std::set<std::string> allowed_;
};

std::uint64_t to_seed(std::int64_t v, const char *what) {
    if (v < 0) { throw std::invalid_argument(std::string("config: ") + what + " must be >= 0"); }
    return static_cast<std::uint64_t>(v);
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

// --- experiment helpers ------------------------------------------------------

struct Arm {
    KernelKind kind;
    const KernelMatrix *kernel;
    Spectrum<double> spectrum;
};

double score_cell(const MatrixXd &k, const MatrixXd &y, const std::vector<Index> &train,
                  const std::vector<Index> &eval, double ridge, Predictor predictor) {
    if (predictor == Predictor::literal) {
        const MatrixXd y_train = y(train, Eigen::all);
        const MatrixXd y_hat = k(train, train) * y_train;
        return mse(y_train, y_hat);
    }
    const KrrModel model = krr_fit(k(train, train), y(train, Eigen::all), ridge, train);
    const MatrixXd y_hat = krr_predict(k(eval, train), model);
    return mse(y(eval, Eigen::all), y_hat);
}

nlohmann::ordered_json kernel_json(const KernelMatrix &kernel, const Spectrum<double> &spectrum) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kernel.kind());
    if (const auto *fm = std::get_if<FeatureMapConfig>(&kernel.params)) {
        j["t"] = fm->bandwidth;
        j["T"] = fm->trotter_steps;
        j["haar_seed"] = fm->haar_seed;
        j["qubits"] = fm->qubit_count();
    } else {
        j["gamma_rbf"] = std::get<RbfParams>(kernel.params).gamma;
    }
    j["source_hash"] = kernel.source_hash;
    j["entries_digest"] = matrix_digest(kernel.entries);
    j["eigenvalues_digest"] = matrix_digest(spectrum.eigenvalues);
    j["trace"] = kernel.entries.trace();
    const auto top = std::min<Index>(spectrum.size(), static_cast<Index>(kReportedEigenvalues));
    j["top_eigenvalues"] = to_std(spectrum.eigenvalues.head(top));
    return j;
}

KernelMatrix load_checked_kernel(const std::filesystem::path &path, KernelKind expected,
                                 const std::string &feature_hash) {
    auto kernel = load_kernel(path);
    if (kernel.kind() != expected) {
        throw std::invalid_argument(fmt::format("kernel file {} holds a {} kernel, expected {}",
                                                path.string(), to_string(kernel.kind()),
                                                to_string(expected)));
    }
    if (kernel.source_hash != feature_hash) {
        throw std::invalid_argument(fmt::format(
            "kernel/dataset hash mismatch: {} was built from features {}, dataset has {}",
            path.string(), kernel.source_hash, feature_hash));
    }
    return kernel;
}

} // namespace

// --- enums --------------------------------------------------------------------

std::string to_string(RelabelMode mode) {
    switch (mode) {
    case RelabelMode::none: return "none";
    case RelabelMode::step: return "step";
    case RelabelMode::geometric: return "geometric";
    }
    return "?";
}

std::string to_string(Generator generator) {
    switch (generator) {
    case Generator::quantum: return "quantum";
    case Generator::rbf: return "rbf";
    case Generator::both: return "both";
    }
    return "?";
}

std::string to_string(Predictor predictor) {
    return predictor == Predictor::krr ? "krr" : "literal";
}

std::string to_string(Evaluation evaluation) {
    return evaluation == Evaluation::full ? "full" : "held_out";
}

RelabelMode relabel_mode_from_string(const std::string &name) {
    if (name == "none") { return RelabelMode::none; }
    if (name == "step") { return RelabelMode::step; }
    if (name == "geometric") { return RelabelMode::geometric; }
    throw std::invalid_argument("unknown relabel mode '" + name + "' (expected none, step or geometric)");
}

Generator generator_from_string(const std::string &name) {
    if (name == "quantum") { return Generator::quantum; }
    if (name == "rbf") { return Generator::rbf; }
    if (name == "both") { return Generator::both; }
    throw std::invalid_argument("unknown generator '" + name + "' (expected quantum, rbf or both)");
}

Predictor predictor_from_string(const std::string &name) {
    if (name == "krr") { return Predictor::krr; }
    if (name == "literal") { return Predictor::literal; }
    throw std::invalid_argument("unknown predictor '" + name + "' (expected krr or literal)");
}

Evaluation evaluation_from_string(const std::string &name) {
    if (name == "full") { return Evaluation::full; }
    if (name == "held_out") { return Evaluation::held_out; }
    throw std::invalid_argument("unknown evaluation '" + name + "' (expected full or held_out)");
}

std::vector<Index> parse_n_grid(const std::string &text) {
    std::vector<Index> grid;
    auto parse_int = [&](std::string_view token) {
        const auto v = io::parse_double(token);
        if (!v || *v != std::floor(*v) || *v < 1) {
            throw std::invalid_argument("n grid: '" + std::string(token) + "' is not a positive integer");
        }
        return static_cast<Index>(*v);
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::string current;
        for (char ch : text) {
            if (ch == ':') {
                parts.push_back(current);
                current.clear();
            } else {
                current += ch;
            }
        }
        parts.push_back(current);
        if (parts.size() != 3) {
            throw std::invalid_argument("n grid: expected start:stop:step, got '" + text + "'");
        }
        const Index start = parse_int(parts[0]);
        const Index stop = parse_int(parts[1]);
        const Index step = parse_int(parts[2]);
        for (Index n = start; n <= stop; n += step) { grid.push_back(n); }
    } else {
        for (const auto &field : io::split_csv_line(text)) { grid.push_back(parse_int(field)); }
    }
    if (grid.empty()) { throw std::invalid_argument("n grid: empty"); }
    return grid;
}

std::vector<Index> default_n_grid(Index m) {
    const Index hi = m / 2;
    if (hi <= 10) { return {std::max<Index>(1, hi)}; }
    std::vector<Index> grid;
    for (int i = 0; i < 10; ++i) {
        const auto n = static_cast<Index>(
            std::llround(10.0 + static_cast<double>(i) * static_cast<double>(hi - 10) / 9.0));
        if (grid.empty() || grid.back() != n) { grid.push_back(n); }
    }
    return grid;
}

// --- config ---------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_toml_file(const std::filesystem::path &path) {
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return from_toml_string(io::read_text(path), base);
}

ExperimentConfig ExperimentConfig::from_toml_string(const std::string &text,
                                                    const std::filesystem::path &base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error &e) {
        throw std::invalid_argument(fmt::format("config: TOML parse error at line {}: {}",
                                                e.source().begin.line, e.description()));
    }
    ExperimentConfig c;
    const Section top(root, "",
                      {"master_seed", "output_dir", "repetitions", "ridge", "n_grid", "predictor",
                       "evaluation", "spectrum_scale", "mode_error_variant", "dataset",
                       "feature_map", "rbf", "relabel", "kernels"});
    if (auto v = top.get<std::int64_t>("master_seed")) { c.master_seed = to_seed(*v, "master_seed"); }
    if (auto v = top.get<std::string>("output_dir")) { c.output_dir = *v; }
    if (auto v = top.get<std::int64_t>("repetitions")) { c.repetitions = static_cast<int>(*v); }
    if (auto v = top.get<double>("ridge")) { c.ridge = *v; }
    if (const auto node = top.node("n_grid")) {
        if (const auto *arr = node.as_array()) {
            for (const auto &el : *arr) {
                const auto v = el.value<std::int64_t>();
                if (!v || *v < 1) { throw std::invalid_argument("config: n_grid entries must be positive integers"); }
                c.n_grid.push_back(static_cast<Index>(*v));
            }
        } else if (auto s = node.value<std::string>()) {
            c.n_grid = parse_n_grid(*s);
        } else {
            throw std::invalid_argument("config: n_grid must be an array or a start:stop:step string");
        }
    }
    if (auto v = top.get<std::string>("predictor")) { c.predictor = predictor_from_string(*v); }
    if (auto v = top.get<std::string>("evaluation")) { c.evaluation = evaluation_from_string(*v); }
    if (auto v = top.get<std::string>("spectrum_scale")) {
        c.prediction.scale = spectrum_scale_from_string(*v);
    }
    if (auto v = top.get<std::string>("mode_error_variant")) {
        c.prediction.variant = mode_error_variant_from_string(*v);
    }

    if (const auto *t = top.sub("dataset")) {
        const Section s(*t, "dataset",
                        {"source", "rows", "features", "seed", "path", "preset", "schema", "k_pca"});
        if (auto v = s.get<std::string>("source")) {
            if (*v == "synthetic") {
                c.dataset.kind = DatasetSource::Kind::synthetic;
            } else if (*v == "csv") {
                c.dataset.kind = DatasetSource::Kind::csv;
            } else {
                throw std::invalid_argument("config: dataset.source must be synthetic or csv");
            }
        }
        if (auto v = s.get<std::int64_t>("rows")) { c.dataset.rows = static_cast<Index>(*v); }
        if (auto v = s.get<std::int64_t>("features")) { c.dataset.features = static_cast<Index>(*v); }
        if (auto v = s.get<std::int64_t>("seed")) { c.dataset.seed = to_seed(*v, "dataset.seed"); }
        if (auto v = s.get<std::string>("path")) {
            c.dataset.path = resolve(base_dir, *v);
            if (!s.get<std::string>("source")) { c.dataset.kind = DatasetSource::Kind::csv; }
        }
        if (auto v = s.get<std::string>("preset")) { c.dataset.preset = *v; }
        if (auto v = s.get<std::string>("schema")) { c.dataset.schema = resolve(base_dir, *v); }
        if (auto v = s.get<std::int64_t>("k_pca")) { c.dataset.k_pca = static_cast<Index>(*v); }
    }
    if (const auto *t = top.sub("feature_map")) {
        const Section s(*t, "feature_map", {"t", "trotter_steps", "haar_seed"});
        if (auto v = s.get<double>("t")) { c.t = *v; }
        if (auto v = s.get<std::int64_t>("trotter_steps")) { c.trotter_steps = static_cast<int>(*v); }
        if (auto v = s.get<std::int64_t>("haar_seed")) { c.haar_seed = to_seed(*v, "feature_map.haar_seed"); }
    }
    if (const auto *t = top.sub("rbf")) {
        const Section s(*t, "rbf", {"gamma"});
        if (auto v = s.get<double>("gamma")) { c.rbf_gamma = *v; }
    }
    if (const auto *t = top.sub("relabel")) {
        const Section s(*t, "relabel", {"mode", "n", "x", "lambda_reg", "generator"});
        if (auto v = s.get<std::string>("mode")) { c.relabel = relabel_mode_from_string(*v); }
        if (auto v = s.get<std::int64_t>("n")) { c.step.n = static_cast<Index>(*v); }
        if (auto v = s.get<double>("x")) { c.step.x = *v; }
        if (auto v = s.get<double>("lambda_reg")) { c.lambda_reg = *v; }
        if (auto v = s.get<std::string>("generator")) { c.generator = generator_from_string(*v); }
    }
    if (const auto *t = top.sub("kernels")) {
        const Section s(*t, "kernels", {"quantum", "rbf"});
        if (auto v = s.get<std::string>("quantum")) { c.kernel_quantum = resolve(base_dir, *v); }
        if (auto v = s.get<std::string>("rbf")) { c.kernel_rbf = resolve(base_dir, *v); }
    }
    c.validate();
    return c;
}

std::uint64_t ExperimentConfig::resolved_haar_seed() const {
    return haar_seed.value_or(derive_seed({master_seed, kHaarStream}));
}

std::uint64_t ExperimentConfig::resolved_dataset_seed() const {
    return dataset.seed.value_or(derive_seed({master_seed, kDatasetStream}));
}

void ExperimentConfig::validate() const {
    if (repetitions < 1) { throw std::invalid_argument("config: repetitions must be >= 1"); }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw std::invalid_argument("config: ridge must be >= 0");
    }
    if (!(t > 0.0) || !std::isfinite(t)) { throw std::invalid_argument("config: t must be > 0"); }
    if (trotter_steps < 1) { throw std::invalid_argument("config: trotter_steps must be >= 1"); }
    if (rbf_gamma && !(*rbf_gamma > 0.0)) { throw std::invalid_argument("config: rbf gamma must be > 0"); }
    if (dataset.k_pca < 1) { throw std::invalid_argument("config: k_pca must be >= 1"); }
    if (dataset.kind == DatasetSource::Kind::synthetic && (dataset.rows < 2 || dataset.features < 1)) {
        throw std::invalid_argument("config: synthetic dataset needs rows >= 2 and features >= 1");
    }
    if (dataset.kind == DatasetSource::Kind::csv) {
        if (dataset.path.empty()) { throw std::invalid_argument("config: dataset.path is required for csv data"); }
        if (dataset.preset.empty() == dataset.schema.empty()) {
            throw std::invalid_argument("config: csv data needs exactly one of dataset.preset or dataset.schema");
        }
    }
    if (relabel == RelabelMode::step && (step.n < 1 || !(step.x > 0.0))) {
        throw std::invalid_argument("config: relabel.n must be >= 1 and relabel.x > 0");
    }
    if (relabel == RelabelMode::geometric && !(lambda_reg > 0.0)) {
        throw std::invalid_argument("config: relabel.lambda_reg must be > 0");
    }
    for (Index n : n_grid) {
        if (n < 1) { throw std::invalid_argument("config: N grid values must be >= 1"); }
    }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["master_seed"] = master_seed;
    j["output_dir"] = output_dir.string();
    j["repetitions"] = repetitions;
    j["ridge"] = ridge;
    j["n_grid"] = n_grid;
    j["predictor"] = to_string(predictor);
    j["evaluation"] = to_string(evaluation);
    j["spectrum_scale"] = to_string(prediction.scale);
    j["mode_error_variant"] = to_string(prediction.variant);
    j["paired_subsampling"] = true;
    auto &d = j["dataset"];
    if (dataset.kind == DatasetSource::Kind::synthetic) {
        d["source"] = "synthetic";
        d["rows"] = dataset.rows;
        d["features"] = dataset.features;
        d["seed"] = resolved_dataset_seed();
    } else {
        d["source"] = "csv";
        d["path"] = dataset.path.string();
        if (!dataset.preset.empty()) { d["preset"] = dataset.preset; }
        if (!dataset.schema.empty()) { d["schema"] = dataset.schema.string(); }
    }
    d["k_pca"] = dataset.k_pca;
    j["feature_map"] = {{"t", t}, {"trotter_steps", trotter_steps}, {"haar_seed", resolved_haar_seed()}};
    j["rbf"] = {{"gamma", rbf_gamma ? nlohmann::ordered_json(*rbf_gamma) : nlohmann::ordered_json("scale")}};
    auto &r = j["relabel"];
    r["mode"] = to_string(relabel);
    r["n"] = step.n;
    r["x"] = step.x;
    r["lambda_reg"] = lambda_reg;
    r["generator"] = to_string(generator);
    if (kernel_quantum) { j["kernels"]["quantum"] = kernel_quantum->string(); }
    if (kernel_rbf) { j["kernels"]["rbf"] = kernel_rbf->string(); }
    return j;
}

// --- experiment ---------------------------------------------------------------------

Dataset load_experiment_dataset(const ExperimentConfig &config) {
    Dataset raw;
    if (config.dataset.kind == DatasetSource::Kind::synthetic) {
        raw = synthetic(config.dataset.rows, config.dataset.features, config.resolved_dataset_seed());
    } else {
        const Schema schema = config.dataset.preset.empty() ? Schema::load(config.dataset.schema)
                                                            : Schema::preset(config.dataset.preset);
        raw = load_csv(config.dataset.path, schema);
    }
    for (const auto &w : raw.warnings) { spdlog::warn("{}", w); }
    Dataset out = preprocess(raw, config.dataset.k_pca);
    for (const auto &w : out.warnings) { spdlog::warn("{}", w); }
    return out;
}

std::vector<CurvePoint> summarize(const std::vector<RepetitionRecord> &records) {
    std::vector<CurvePoint> points;
    std::map<std::tuple<std::string, int, Index>, std::vector<double>> groups;
    for (const auto &r : records) {
        auto key = std::make_tuple(r.labels, static_cast<int>(r.kernel), r.n);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            CurvePoint p;
            p.labels = r.labels;
            p.kernel = r.kernel;
            p.n = r.n;
            points.push_back(p);
        }
        it->second.push_back(r.error);
    }
    for (auto &p : points) {
        const auto &errors = groups.at(std::make_tuple(p.labels, static_cast<int>(p.kernel), p.n));
        p.count = static_cast<int>(errors.size());
        double sum = 0.0;
        for (double e : errors) { sum += e; }
        p.mean = sum / static_cast<double>(errors.size());
        double ss = 0.0;
        for (double e : errors) { ss += (e - p.mean) * (e - p.mean); }
        p.std = errors.size() > 1 ? std::sqrt(ss / static_cast<double>(errors.size() - 1)) : 0.0;
        p.min = *std::min_element(errors.begin(), errors.end());
        p.max = *std::max_element(errors.begin(), errors.end());
        p.predicted = std::numeric_limits<double>::quiet_NaN();
    }
    return points;
}

const CurvePoint &ExperimentResult::point(const std::string &labels, KernelKind kernel,
                                          Index n) const {
    for (const auto &p : curve) {
        if (p.labels == labels && p.kernel == kernel && p.n == n) { return p; }
    }
    throw std::out_of_range(fmt::format("no curve point for ({}, {}, N={})", labels,
                                        to_string(kernel), n));
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
    config.validate();
    return run_experiment(config, load_experiment_dataset(config));
}

ExperimentResult run_experiment(const ExperimentConfig &config, const Dataset &data) {
    config.validate();
    ExperimentResult result;
    result.config = config;
    result.data = data;
    ExperimentConfig &cfg = result.config;
    const Index m = data.rows();

    cfg.haar_seed = config.resolved_haar_seed();
    cfg.dataset.seed = config.resolved_dataset_seed();
    if (!cfg.rbf_gamma) { cfg.rbf_gamma = scale_gamma(data.features); }
    if (cfg.n_grid.empty()) { cfg.n_grid = default_n_grid(m); }
    for (Index n : cfg.n_grid) {
        if (n > m) {
            throw std::invalid_argument(fmt::format("config: N = {} exceeds dataset size {}", n, m));
        }
        if (cfg.evaluation == Evaluation::held_out && n >= m) {
            throw std::invalid_argument(
                fmt::format("config: held-out evaluation needs N < M (N = {}, M = {})", n, m));
        }
    }
    if (cfg.relabel == RelabelMode::step && cfg.step.n > m) {
        throw std::invalid_argument(fmt::format("config: relabel.n = {} exceeds M = {}", cfg.step.n, m));
    }

    // Kernels over the full dataset; subsamples take rows and columns from these.
    const std::string feature_hash = matrix_digest(data.features);
    FeatureMapConfig fm;
    fm.feature_count = static_cast<int>(data.features.cols());
    fm.bandwidth = cfg.t;
    fm.trotter_steps = cfg.trotter_steps;
    fm.haar_seed = *cfg.haar_seed;
    result.quantum = cfg.kernel_quantum
                         ? load_checked_kernel(*cfg.kernel_quantum, KernelKind::quantum, feature_hash)
                         : quantum_gram(data.features, fm);
    result.rbf = cfg.kernel_rbf
                     ? load_checked_kernel(*cfg.kernel_rbf, KernelKind::rbf, feature_hash)
                     : rbf_gram(data.features, RbfParams{*cfg.rbf_gamma});
    if (result.quantum.size() != m || result.rbf.size() != m) {
        throw std::invalid_argument("kernel size does not match the dataset");
    }

    std::vector<Arm> arms;
    arms.push_back({KernelKind::quantum, &result.quantum, sym_eig(result.quantum.entries)});
    arms.push_back({KernelKind::rbf, &result.rbf, sym_eig(result.rbf.entries)});

    // Label sets.
    switch (cfg.relabel) {
    case RelabelMode::none:
        result.label_sets.push_back({"original", "dataset", data.labels_encoded});
        break;
    case RelabelMode::step: {
        const VectorXd c_hat = step_c(m, cfg.step);
        for (const auto &arm : arms) {
            const bool wanted = cfg.generator == Generator::both ||
                                (cfg.generator == Generator::quantum) == (arm.kind == KernelKind::quantum);
            if (!wanted) { continue; }
            result.label_sets.push_back(
                {"step_" + to_string(arm.kind), to_string(arm.kind), relabel(arm.spectrum, c_hat)});
        }
        break;
    }
    case RelabelMode::geometric:
        result.label_sets.push_back(
            {"geometric", "geometric", geometric_relabel(result.quantum, result.rbf, cfg.lambda_reg)});
        break;
    }

    // Paired subsamples: one index list per (N, repetition), shared by every arm.
    const auto reps = static_cast<std::size_t>(cfg.repetitions);
    std::vector<std::vector<Index>> train(cfg.n_grid.size() * reps);
    std::vector<std::vector<Index>> eval(train.size());
    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
        for (std::size_t r = 0; r < reps; ++r) {
            auto &idx = train[g * reps + r];
            idx = subsample_indices(m, {cfg.n_grid[g], static_cast<Index>(r), cfg.master_seed});
            auto &ev = eval[g * reps + r];
            if (cfg.evaluation == Evaluation::full) {
                ev.resize(static_cast<std::size_t>(m));
                std::iota(ev.begin(), ev.end(), Index{0});
            } else {
                std::vector<char> used(static_cast<std::size_t>(m), 0);
                for (Index i : idx) { used[static_cast<std::size_t>(i)] = 1; }
                for (Index i = 0; i < m; ++i) {
                    if (!used[static_cast<std::size_t>(i)]) { ev.push_back(i); }
                }
            }
        }
    }

    const std::size_t per_arm = cfg.n_grid.size() * reps;
    const std::size_t cells = result.label_sets.size() * arms.size() * per_arm;
    result.records.resize(cells);
    parallel_for(cells, [&](std::size_t cell) {
        const std::size_t label_idx = cell / (arms.size() * per_arm);
        const std::size_t arm_idx = (cell / per_arm) % arms.size();
        const std::size_t g = (cell % per_arm) / reps;
        const std::size_t r = cell % reps;
        const auto &labels = result.label_sets[label_idx];
        const auto &arm = arms[arm_idx];
        auto &rec = result.records[cell];
        rec.labels = labels.name;
        rec.kernel = arm.kind;
        rec.n = cfg.n_grid[g];
        rec.repetition = static_cast<int>(r);
        rec.error = score_cell(arm.kernel->entries, labels.values, train[g * reps + r],
                               eval[g * reps + r], cfg.ridge, cfg.predictor);
    });
    result.curve = summarize(result.records);

    // Theory predictions per (labels, kernel, N).
    nlohmann::ordered_json predictions = nlohmann::ordered_json::array();
    for (auto &p : result.curve) {
        const auto &labels = *std::find_if(result.label_sets.begin(), result.label_sets.end(),
                                           [&](const LabelArm &l) { return l.name == p.labels; });
        const auto &arm = p.kernel == KernelKind::quantum ? arms[0] : arms[1];
        nlohmann::ordered_json entry;
        entry["labels"] = p.labels;
        entry["kernel"] = to_string(p.kernel);
        try {
            const auto report = predicted_error(arm.spectrum, labels.values,
                                                static_cast<double>(p.n), cfg.ridge, cfg.prediction);
            p.predicted = report.predicted_error;
            entry.update(to_json(report));
        } catch (const NumericalError &e) {
            entry["N"] = p.n;
            entry["predicted_error"] = nullptr;
            entry["error"] = e.what();
        }
        predictions.push_back(std::move(entry));
    }

    // Report.
    auto &report = result.report;
    report["config"] = cfg.to_json();
    auto &ds = report["dataset"];
    ds["name"] = data.name;
    ds["provenance"] = data.provenance;
    ds["M"] = m;
    ds["D"] = data.features.cols();
    ds["dropped_rows"] = data.dropped_rows;
    ds["feature_hash"] = feature_hash;
    ds["warnings"] = data.warnings;
    report["kernels"]["quantum"] = kernel_json(result.quantum, arms[0].spectrum);
    report["kernels"]["rbf"] = kernel_json(result.rbf, arms[1].spectrum);

    std::vector<NamedLabels> corr_inputs;
    auto &label_json = report["label_sets"];
    label_json = nlohmann::ordered_json::array();
    for (const auto &labels : result.label_sets) {
        nlohmann::ordered_json lj;
        lj["name"] = labels.name;
        lj["generator"] = labels.generator;
        lj["columns"] = labels.values.cols();
        lj["squared_norm"] = labels.values.squaredNorm();
        for (const auto &arm : arms) {
            VectorXd c = VectorXd::Zero(m);
            for (Index col = 0; col < labels.values.cols(); ++col) {
                c += helper_c(arm.spectrum, labels.values.col(col));
            }
            lj["alignment"][to_string(arm.kind)] =
                c.sum() > 0.0 ? nlohmann::ordered_json(to_std(alignment_curve(c)))
                              : nlohmann::ordered_json(nullptr);
        }
        label_json.push_back(std::move(lj));
        for (Index col = 0; col < labels.values.cols(); ++col) {
            const std::string name =
                labels.values.cols() == 1
                    ? labels.name
                    : fmt::format("{}[{}]", labels.name,
                                  col < static_cast<Index>(data.classes.size())
                                      ? data.classes[static_cast<std::size_t>(col)]
                                      : std::to_string(col));
            corr_inputs.push_back({name, labels.values.col(col)});
        }
    }
    if (cfg.relabel != RelabelMode::none) {
        for (Index col = 0; col < data.labels_encoded.cols(); ++col) {
            const std::string name =
                col < static_cast<Index>(data.classes.size())
                    ? fmt::format("original[{}]", data.classes[static_cast<std::size_t>(col)])
                    : "original";
            corr_inputs.push_back({name, data.labels_encoded.col(col)});
        }
    }
    report["correlation"] = correlation_report(data.features, corr_inputs, data.feature_names).to_json();
    report["predictions"] = std::move(predictions);
    return result;
}

std::string curves_csv(const ExperimentResult &result) {
    std::string text = "labels,kernel,N,rep,E_empirical\n";
    for (const auto &r : result.records) {
        text += fmt::format("{},{},{},{},{}\n", r.labels, to_string(r.kernel), r.n, r.repetition,
                            io::format_double(r.error));
    }
    return text;
}

std::string summary_csv(const ExperimentResult &result) {
    std::string text = "labels,kernel,N,reps,mean,std,min,max,E_predicted\n";
    for (const auto &p : result.curve) {
        text += fmt::format("{},{},{},{},{},{},{},{},{}\n", p.labels, to_string(p.kernel), p.n,
                            p.count, io::format_double(p.mean), io::format_double(p.std),
                            io::format_double(p.min), io::format_double(p.max),
                            std::isfinite(p.predicted) ? io::format_double(p.predicted) : "nan");
    }
    return text;
}

void write_results(const ExperimentResult &result, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    io::write_text(dir / "curves.csv", curves_csv(result));
    io::write_text(dir / "summary.csv", summary_csv(result));
    io::write_text(dir / "report.json", result.report.dump(2) + "\n");
}

// --- correlation ------------------------------------------------------------------

CorrelationTable correlation_report(const MatrixXd &features, const std::vector<NamedLabels> &labels,
                                    std::vector<std::string> feature_names) {
    if (feature_names.empty()) {
        for (Index c = 0; c < features.cols(); ++c) { feature_names.push_back(fmt::format("f{}", c)); }
    }
    if (static_cast<Index>(feature_names.size()) != features.cols()) {
        throw std::invalid_argument("correlation_report: feature names do not match columns");
    }
    auto centered_or_null = [](const VectorXd &v) -> std::optional<VectorXd> {
        if (v.size() < 2) { return std::nullopt; }
        const VectorXd c = v.array() - v.mean();
        const double scale = std::max(v.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        if (!(std::sqrt(c.squaredNorm() / static_cast<double>(v.size())) > 1e-12 * scale)) {
            return std::nullopt;
        }
        return c;
    };

    CorrelationTable table;
    table.feature_names = std::move(feature_names);
    std::vector<std::optional<VectorXd>> feature_cols;
    for (Index c = 0; c < features.cols(); ++c) { feature_cols.push_back(centered_or_null(features.col(c))); }
    for (const auto &l : labels) {
        if (l.values.size() != features.rows()) {
            throw std::invalid_argument(fmt::format(
                "correlation_report: label set '{}' has {} rows, features have {}", l.name,
                l.values.size(), features.rows()));
        }
        table.label_names.push_back(l.name);
        const auto y = centered_or_null(l.values);
        std::vector<std::optional<double>> row;
        for (const auto &x : feature_cols) {
            if (!x || !y) {
                row.push_back(std::nullopt);
                continue;
            }
            const double r = x->dot(*y) / std::sqrt(x->squaredNorm() * y->squaredNorm());
            row.push_back(std::clamp(r, -1.0, 1.0));
        }
        table.r.push_back(std::move(row));
    }
    return table;
}

nlohmann::ordered_json CorrelationTable::to_json() const {
    nlohmann::ordered_json j;
    j["features"] = feature_names;
    auto &rows = j["pearson"];
    rows = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < label_names.size(); ++i) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto &v : r[i]) { arr.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr)); }
        rows[label_names[i]] = std::move(arr);
    }
    return j;
}

std::string CorrelationTable::to_csv() const {
    std::string text = "label_set";
    for (const auto &f : feature_names) { text += "," + f; }
    text += '\n';
    for (std::size_t i = 0; i < label_names.size(); ++i) {
        text += label_names[i];
        for (const auto &v : r[i]) { text += "," + (v ? io::format_double(*v) : std::string{}); }
        text += '\n';
    }
    return text;
}

// --- bandwidth sweep ----------------------------------------------------------------

std::vector<SweepArm> bandwidth_sweep(const ExperimentConfig &config, const std::vector<double> &t_values) {
    if (t_values.empty()) { throw std::invalid_argument("bandwidth_sweep: no t values"); }
    for (double t : t_values) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw std::invalid_argument(fmt::format("bandwidth_sweep: t = {} must be positive", t));
        }
    }
    config.validate();
    const Dataset data = load_experiment_dataset(config);
    std::vector<SweepArm> arms;
    for (double t : t_values) {
        ExperimentConfig c = config;
        c.t = t;
        spdlog::info("bandwidth sweep: t = {}", t);
        arms.push_back({t, run_experiment(c, data)});
    }
    return arms;
}

void write_sweep(const std::vector<SweepArm> &arms, const std::filesystem::path &dir) {
    std::string text = "t,labels,kernel,N,reps,mean,std,E_predicted\n";
    for (const auto &arm : arms) {
        write_results(arm.result, dir / fmt::format("t_{}", arm.t));
        for (const auto &p : arm.result.curve) {
            text += fmt::format("{},{},{},{},{},{},{},{}\n", io::format_double(arm.t), p.labels,
                                to_string(p.kernel), p.n, p.count, io::format_double(p.mean),
                                io::format_double(p.std),
                                std::isfinite(p.predicted) ? io::format_double(p.predicted) : "nan");
        }
    }
    io::write_text(dir / "sweep_summary.csv", text);
}

} // namespace qks
