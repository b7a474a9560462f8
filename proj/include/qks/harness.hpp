#pragma once

// Learning-curve experiments: quantum vs RBF kernel ridge regression on
// relabeled datasets, with empirical and predicted errors per training size.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qks/dataset.hpp"
#include "qks/kernels.hpp"
#include "qks/relabel.hpp"
#include "qks/spectral.hpp"

namespace qks {

enum class RelabelMode { none, step, geometric };
enum class Generator { quantum, rbf, both };
/// `krr` fits (K_n + lambda I) alpha = y_n; `literal` applies y_hat = K_n y_n.
enum class Predictor { krr, literal };
/// `full` scores every dataset row, `held_out` only rows outside the subsample.
enum class Evaluation { full, held_out };

struct DatasetSource {
    enum class Kind { synthetic, csv } kind = Kind::synthetic;
    Eigen::Index rows = 200;
    Eigen::Index features = 8;
    std::optional<std::uint64_t> seed;  // synthetic; derived from master_seed when absent
    std::filesystem::path path;         // csv
    std::string preset;                 // csv: shipped schema name
    std::filesystem::path schema;       // csv: schema JSON file
    Eigen::Index k_pca = 8;
};

struct ExperimentConfig {
    DatasetSource dataset;

    double t = 0.5;
    int trotter_steps = 10;
    std::optional<std::uint64_t> haar_seed;  // derived from master_seed when absent
    std::optional<double> rbf_gamma;         // scale heuristic when absent

    double ridge = 1e-4;
    RelabelMode relabel = RelabelMode::step;
    StepSpec step{20, 1.0};
    double lambda_reg = kGeometricRidge;
    Generator generator = Generator::both;

    std::vector<Eigen::Index> n_grid;  // default_n_grid(M) when empty
    int repetitions = 50;
    Predictor predictor = Predictor::krr;
    Evaluation evaluation = Evaluation::full;
    PredictionOptions prediction;

    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "results";

    // Optional precomputed kernels; must match the preprocessed features.
    std::optional<std::filesystem::path> kernel_quantum;
    std::optional<std::filesystem::path> kernel_rbf;

    /// Relative paths in the file resolve against the file's directory.
    static ExperimentConfig from_toml_file(const std::filesystem::path &path);
    static ExperimentConfig from_toml_string(const std::string &text,
                                             const std::filesystem::path &base_dir = ".");

    [[nodiscard]] std::uint64_t resolved_haar_seed() const;
    [[nodiscard]] std::uint64_t resolved_dataset_seed() const;

    /// Checks everything that does not need the dataset.
    void validate() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

std::string to_string(RelabelMode mode);
std::string to_string(Generator generator);
std::string to_string(Predictor predictor);
std::string to_string(Evaluation evaluation);
RelabelMode relabel_mode_from_string(const std::string &name);
Generator generator_from_string(const std::string &name);
Predictor predictor_from_string(const std::string &name);
Evaluation evaluation_from_string(const std::string &name);

/// "10:100:10" (inclusive) or "10,20,50".
std::vector<Eigen::Index> parse_n_grid(const std::string &text);

/// Ten evenly spaced sizes from 10 to floor(M/2).
std::vector<Eigen::Index> default_n_grid(Eigen::Index m);

/// Loads (or synthesizes) and preprocesses the configured dataset.
Dataset load_experiment_dataset(const ExperimentConfig &config);

struct LabelArm {
    std::string name;       // original, step_quantum, step_rbf, geometric
    std::string generator;  // kernel (or method) that produced the labels
    Eigen::MatrixXd values; // M x L
};

struct RepetitionRecord {
    std::string labels;
    KernelKind kernel = KernelKind::quantum;
    Eigen::Index n = 0;
    int repetition = 0;
    double error = 0.0;
};

struct CurvePoint {
    std::string labels;
    KernelKind kernel = KernelKind::quantum;
    Eigen::Index n = 0;
    int count = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single repetition
    double min = 0.0;
    double max = 0.0;
    double predicted = 0.0;  // NaN when the theory is degenerate for this cell
};

/// Groups records by (labels, kernel, N) in order of first appearance.
std::vector<CurvePoint> summarize(const std::vector<RepetitionRecord> &records);

struct ExperimentResult {
    ExperimentConfig config;  // with seeds, gamma and N grid resolved
    Dataset data;
    KernelMatrix quantum;
    KernelMatrix rbf;
    std::vector<LabelArm> label_sets;
    std::vector<RepetitionRecord> records;
    std::vector<CurvePoint> curve;
    nlohmann::ordered_json report;

    [[nodiscard]] const CurvePoint &point(const std::string &labels, KernelKind kernel,
                                          Eigen::Index n) const;
};

/// The learning-curve experiment. Every (labels, kernel, N, repetition) cell
/// is scored independently, so the result does not depend on scheduling.
ExperimentResult run_experiment(const ExperimentConfig &config);

/// Same as above on an already preprocessed dataset.
ExperimentResult run_experiment(const ExperimentConfig &config, const Dataset &data);

std::string curves_csv(const ExperimentResult &result);
std::string summary_csv(const ExperimentResult &result);

/// Writes curves.csv, summary.csv and report.json into `dir`.
void write_results(const ExperimentResult &result, const std::filesystem::path &dir);

struct NamedLabels {
    std::string name;
    Eigen::VectorXd values;
};

/// Pearson r for every (label set, feature column); nullopt where either
/// side has zero variance.
struct CorrelationTable {
    std::vector<std::string> label_names;
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::optional<double>>> r;  // [label][feature]

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    [[nodiscard]] std::string to_csv() const;
};

CorrelationTable correlation_report(const Eigen::MatrixXd &features,
                                    const std::vector<NamedLabels> &labels,
                                    std::vector<std::string> feature_names = {});

struct SweepArm {
    double t = 0.0;
    ExperimentResult result;
};

/// Reruns the experiment for each bandwidth with every seed held fixed.
std::vector<SweepArm> bandwidth_sweep(const ExperimentConfig &config,
                                      const std::vector<double> &t_values);

/// One sub-directory per t plus sweep_summary.csv.
void write_sweep(const std::vector<SweepArm> &arms, const std::filesystem::path &dir);

} // namespace qks
