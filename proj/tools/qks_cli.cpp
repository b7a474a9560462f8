// qks: command-line front end for kernels, relabeling, theory predictions and
// learning-curve experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qks/harness.hpp"
#include "qks/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> data;
    std::optional<std::string> preset;
    std::optional<std::string> schema;
    std::optional<long> rows;
    std::optional<long> features;
    std::optional<long> k_pca;
    std::optional<std::uint64_t> master_seed;
    std::optional<double> t;
    std::optional<int> trotter_steps;
    std::optional<std::uint64_t> haar_seed;
    std::optional<double> gamma;
    std::optional<double> ridge;
    std::optional<std::string> relabel;
    std::optional<std::string> generator;
    std::optional<long> step_n;
    std::optional<double> step_x;
    std::optional<double> lambda_reg;
    std::optional<std::string> n_grid;
    std::optional<int> repetitions;
    std::optional<std::string> predictor;
    std::optional<std::string> evaluation;
    std::optional<std::string> scale;
    std::optional<std::string> variant;
    std::optional<std::string> output;
    std::optional<std::string> kernel_quantum;
    std::optional<std::string> kernel_rbf;
};

void add_dataset_flags(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "TOML experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--data", o.data, "CSV dataset (header row required)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "schema preset: breast_cancer, heart_failure, bone_marrow");
    cmd->add_option("--schema", o.schema, "schema JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--rows", o.rows, "synthetic dataset rows");
    cmd->add_option("--features", o.features, "synthetic dataset feature count");
    cmd->add_option("--k-pca", o.k_pca, "principal components kept");
    cmd->add_option("--master-seed", o.master_seed, "master seed");
}

void add_kernel_flags(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--t", o.t, "feature-map bandwidth t");
    cmd->add_option("--trotter-steps", o.trotter_steps, "Trotter steps T");
    cmd->add_option("--haar-seed", o.haar_seed, "seed of the Haar-random initial state");
    cmd->add_option("--gamma", o.gamma, "RBF gamma (default: 1 / (D * mean variance))");
}

void add_experiment_flags(CLI::App *cmd, Overrides &o) {
    add_dataset_flags(cmd, o);
    add_kernel_flags(cmd, o);
    cmd->add_option("--ridge", o.ridge, "KRR ridge lambda");
    cmd->add_option("--relabel", o.relabel, "none, step or geometric");
    cmd->add_option("--generator", o.generator, "kernel generating step labels: quantum, rbf, both");
    cmd->add_option("--n", o.step_n, "step relabel: number of leading modes");
    cmd->add_option("--x", o.step_x, "step relabel: target power per mode");
    cmd->add_option("--lambda-reg", o.lambda_reg, "geometric relabel ridge");
    cmd->add_option("--n-grid", o.n_grid, "training sizes, start:stop:step or a,b,c");
    cmd->add_option("--repetitions", o.repetitions, "subsamples per N");
    cmd->add_option("--predictor", o.predictor, "krr or literal");
    cmd->add_option("--evaluation", o.evaluation, "full or held_out");
    cmd->add_option("--scale", o.scale, "spectrum scale for the theory: raw or over_m");
    cmd->add_option("--variant", o.variant, "mode error variant: kappa_squared or printed");
    cmd->add_option("--kernel-quantum", o.kernel_quantum, "precomputed quantum kernel CSV")
        ->check(CLI::ExistingFile);
    cmd->add_option("--kernel-rbf", o.kernel_rbf, "precomputed RBF kernel CSV")->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", o.output, "output directory");
}

qks::ExperimentConfig build_config(const Overrides &o) {
    qks::ExperimentConfig c =
        o.config.empty() ? qks::ExperimentConfig{} : qks::ExperimentConfig::from_toml_file(o.config);
    if (o.data) {
        c.dataset.kind = qks::DatasetSource::Kind::csv;
        c.dataset.path = *o.data;
    }
    if (o.preset) {
        c.dataset.preset = *o.preset;
        c.dataset.schema.clear();
    }
    if (o.schema) {
        c.dataset.schema = *o.schema;
        c.dataset.preset.clear();
    }
    if (o.rows) { c.dataset.rows = *o.rows; }
    if (o.features) { c.dataset.features = *o.features; }
    if (o.k_pca) { c.dataset.k_pca = *o.k_pca; }
    if (o.master_seed) { c.master_seed = *o.master_seed; }
    if (o.t) { c.t = *o.t; }
    if (o.trotter_steps) { c.trotter_steps = *o.trotter_steps; }
    if (o.haar_seed) { c.haar_seed = *o.haar_seed; }
    if (o.gamma) { c.rbf_gamma = *o.gamma; }
    if (o.ridge) { c.ridge = *o.ridge; }
    if (o.relabel) { c.relabel = qks::relabel_mode_from_string(*o.relabel); }
    if (o.generator) { c.generator = qks::generator_from_string(*o.generator); }
    if (o.step_n) { c.step.n = *o.step_n; }
    if (o.step_x) { c.step.x = *o.step_x; }
    if (o.lambda_reg) { c.lambda_reg = *o.lambda_reg; }
    if (o.n_grid) { c.n_grid = qks::parse_n_grid(*o.n_grid); }
    if (o.repetitions) { c.repetitions = *o.repetitions; }
    if (o.predictor) { c.predictor = qks::predictor_from_string(*o.predictor); }
    if (o.evaluation) { c.evaluation = qks::evaluation_from_string(*o.evaluation); }
    if (o.scale) { c.prediction.scale = qks::spectrum_scale_from_string(*o.scale); }
    if (o.variant) { c.prediction.variant = qks::mode_error_variant_from_string(*o.variant); }
    if (o.output) { c.output_dir = *o.output; }
    if (o.kernel_quantum) { c.kernel_quantum = fs::path(*o.kernel_quantum); }
    if (o.kernel_rbf) { c.kernel_rbf = fs::path(*o.kernel_rbf); }
    c.validate();
    return c;
}

qks::FeatureMapConfig feature_map_for(const qks::ExperimentConfig &c, const qks::Dataset &data) {
    qks::FeatureMapConfig fm;
    fm.feature_count = static_cast<int>(data.features.cols());
    fm.bandwidth = c.t;
    fm.trotter_steps = c.trotter_steps;
    fm.haar_seed = c.resolved_haar_seed();
    return fm;
}

void write_or_print(const std::optional<std::string> &out, const std::string &text) {
    if (out) {
        qks::io::write_text(*out, text);
        spdlog::info("wrote {}", *out);
    } else {
        std::cout << text;
    }
}

} // namespace

int main(int argc, char **argv) {
    auto logger = spdlog::stderr_color_mt("qks");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^%l%$: %v");

    CLI::App app{"Quantum vs classical kernel learning curves"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "only log warnings and errors");

    // kernel
    Overrides kernel_o;
    std::string kernel_kind = "quantum";
    std::optional<std::string> kernel_out;
    std::optional<std::string> features_out;
    auto *kernel_cmd = app.add_subcommand("kernel", "build a Gram matrix over the preprocessed dataset");
    add_dataset_flags(kernel_cmd, kernel_o);
    add_kernel_flags(kernel_cmd, kernel_o);
    kernel_cmd->add_option("--kind", kernel_kind, "quantum or rbf")
        ->check(CLI::IsMember({"quantum", "rbf"}));
    kernel_cmd->add_option("-o,--out", kernel_out, "kernel CSV (sidecar JSON written next to it)");
    kernel_cmd->add_option("--features-out", features_out, "also write the preprocessed dataset");

    // relabel
    std::string relabel_kernel;
    std::optional<std::string> relabel_classical;
    std::string relabel_mode = "step";
    long relabel_n = 20;
    double relabel_x = 1.0;
    double relabel_lambda = qks::kGeometricRidge;
    std::string relabel_out = "labels.csv";
    auto *relabel_cmd = app.add_subcommand("relabel", "generate semi-artificial labels from a kernel");
    relabel_cmd->add_option("--kernel", relabel_kernel, "generating kernel CSV (quantum kernel for geometric)")
        ->required()
        ->check(CLI::ExistingFile);
    relabel_cmd->add_option("--classical", relabel_classical, "classical kernel CSV (geometric mode)")
        ->check(CLI::ExistingFile);
    relabel_cmd->add_option("--mode", relabel_mode, "step or geometric")
        ->check(CLI::IsMember({"step", "geometric"}));
    relabel_cmd->add_option("--n", relabel_n, "step: number of leading modes");
    relabel_cmd->add_option("--x", relabel_x, "step: target power per mode");
    relabel_cmd->add_option("--lambda-reg", relabel_lambda, "geometric: ridge on the classical kernel");
    relabel_cmd->add_option("-o,--out", relabel_out, "labels CSV (sidecar JSON written next to it)");

    // predict
    std::string predict_kernel;
    std::string predict_labels;
    double predict_ridge = 1e-4;
    std::string predict_grid = "10:100:10";
    std::string predict_scale = "over_m";
    std::string predict_variant = "kappa_squared";
    std::optional<std::string> predict_out;
    auto *predict_cmd = app.add_subcommand("predict", "theory prediction of E versus N");
    predict_cmd->add_option("--kernel", predict_kernel, "kernel CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--labels", predict_labels, "labels CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--ridge", predict_ridge, "ridge lambda");
    predict_cmd->add_option("--n-grid", predict_grid, "training sizes, start:stop:step or a,b,c");
    predict_cmd->add_option("--scale", predict_scale, "raw or over_m");
    predict_cmd->add_option("--variant", predict_variant, "kappa_squared or printed");
    predict_cmd->add_option("-o,--out", predict_out, "CSV output (default stdout)");

    // experiment
    Overrides exp_o;
    auto *exp_cmd = app.add_subcommand("experiment", "run the learning-curve experiment");
    add_experiment_flags(exp_cmd, exp_o);

    // correlate
    Overrides corr_o;
    std::vector<std::string> corr_labels;
    std::optional<std::string> corr_out;
    auto *corr_cmd = app.add_subcommand("correlate", "Pearson r between label sets and features");
    add_dataset_flags(corr_cmd, corr_o);
    corr_cmd->add_option("--labels", corr_labels, "label CSVs built from the same dataset")
        ->check(CLI::ExistingFile);
    corr_cmd->add_option("-o,--out", corr_out, "CSV output (default stdout)");

    // sweep
    Overrides sweep_o;
    std::string sweep_t = "0.5,1.0";
    auto *sweep_cmd = app.add_subcommand("sweep", "rerun the experiment for several bandwidths");
    add_experiment_flags(sweep_cmd, sweep_o);
    sweep_cmd->add_option("--t-values", sweep_t, "comma separated bandwidths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*kernel_cmd) {
            const auto config = build_config(kernel_o);
            const auto data = qks::load_experiment_dataset(config);
            const auto kind = qks::kernel_kind_from_string(kernel_kind);
            const auto kernel =
                kind == qks::KernelKind::quantum
                    ? qks::quantum_gram(data.features, feature_map_for(config, data))
                    : qks::rbf_gram(data.features,
                                    qks::RbfParams{config.rbf_gamma.value_or(qks::scale_gamma(data.features))});
            const fs::path out = kernel_out ? fs::path(*kernel_out)
                                            : config.output_dir / fmt::format("kernel_{}.csv", kernel_kind);
            qks::save_kernel(out, kernel);
            spdlog::info("wrote {} ({}x{}, features {})", out.string(), kernel.size(), kernel.size(),
                         kernel.source_hash);
            if (features_out) {
                qks::save_dataset(*features_out, data);
                spdlog::info("wrote {}", *features_out);
            }
        } else if (*relabel_cmd) {
            const auto kernel = qks::load_kernel(relabel_kernel);
            qks::LabelSet labels;
            labels.metadata["source_hash"] = kernel.source_hash;
            labels.metadata["mode"] = relabel_mode;
            if (relabel_mode == "step") {
                const auto spectrum = qks::sym_eig(kernel.entries);
                labels.values = qks::relabel(spectrum, qks::step_c(kernel.size(), {relabel_n, relabel_x}));
                labels.metadata["generator"] = qks::to_string(kernel.kind());
                labels.metadata["n"] = relabel_n;
                labels.metadata["x"] = relabel_x;
            } else {
                if (!relabel_classical) {
                    throw std::invalid_argument("relabel --mode geometric needs --classical <kernel.csv>");
                }
                const auto classical = qks::load_kernel(*relabel_classical);
                labels.values = qks::geometric_relabel(kernel, classical, relabel_lambda);
                labels.metadata["generator"] = "geometric";
                labels.metadata["lambda_reg"] = relabel_lambda;
            }
            labels.metadata["kernel_digest"] = qks::matrix_digest(kernel.entries);
            qks::save_labels(relabel_out, labels);
            spdlog::info("wrote {}", relabel_out);
        } else if (*predict_cmd) {
            const auto kernel = qks::load_kernel(predict_kernel);
            const auto labels = qks::load_labels(predict_labels);
            if (labels.values.rows() != kernel.size()) {
                throw std::invalid_argument(fmt::format("labels have {} rows, kernel is {}x{}",
                                                        labels.values.rows(), kernel.size(), kernel.size()));
            }
            if (labels.metadata.contains("source_hash") &&
                labels.metadata["source_hash"].get<std::string>() != kernel.source_hash) {
                throw std::invalid_argument(fmt::format(
                    "labels were built from features {}, kernel from features {}",
                    labels.metadata["source_hash"].get<std::string>(), kernel.source_hash));
            }
            qks::PredictionOptions options;
            options.scale = qks::spectrum_scale_from_string(predict_scale);
            options.variant = qks::mode_error_variant_from_string(predict_variant);
            const auto spectrum = qks::sym_eig(kernel.entries);
            std::string text = "N,a,b,E_predicted\n";
            for (auto n : qks::parse_n_grid(predict_grid)) {
                try {
                    const auto report = qks::predicted_error(spectrum, labels.values,
                                                             static_cast<double>(n), predict_ridge, options);
                    text += fmt::format("{},{},{},{}\n", n, qks::io::format_double(report.solution.a),
                                        qks::io::format_double(report.solution.b_for(options.variant)),
                                        qks::io::format_double(report.predicted_error));
                } catch (const qks::NumericalError &e) {
                    spdlog::warn("N = {}: {}", n, e.what());
                    text += fmt::format("{},nan,nan,nan\n", n);
                }
            }
            write_or_print(predict_out, text);
        } else if (*exp_cmd) {
            const auto config = build_config(exp_o);
            const auto result = qks::run_experiment(config);
            qks::write_results(result, config.output_dir);
            spdlog::info("wrote {}/{{curves.csv,summary.csv,report.json}}", config.output_dir.string());
        } else if (*corr_cmd) {
            const auto config = build_config(corr_o);
            const auto data = qks::load_experiment_dataset(config);
            const auto hash = qks::matrix_digest(data.features);
            std::vector<qks::NamedLabels> sets;
            for (qks::Index c = 0; c < data.labels_encoded.cols(); ++c) {
                sets.push_back({data.labels_encoded.cols() == 1
                                    ? std::string("original")
                                    : fmt::format("original[{}]", data.classes[static_cast<std::size_t>(c)]),
                                data.labels_encoded.col(c)});
            }
            for (const auto &path : corr_labels) {
                const auto labels = qks::load_labels(path);
                if (labels.metadata.contains("source_hash") &&
                    labels.metadata["source_hash"].get<std::string>() != hash) {
                    throw std::invalid_argument(fmt::format(
                        "{} was built from features {}, this dataset has {}", path,
                        labels.metadata["source_hash"].get<std::string>(), hash));
                }
                const auto stem = fs::path(path).stem().string();
                for (qks::Index c = 0; c < labels.values.cols(); ++c) {
                    sets.push_back({labels.values.cols() == 1 ? stem : stem + ":" + labels.columns[c],
                                    labels.values.col(c)});
                }
            }
            write_or_print(corr_out, qks::correlation_report(data.features, sets, data.feature_names).to_csv());
        } else if (*sweep_cmd) {
            const auto config = build_config(sweep_o);
            std::vector<double> ts;
            for (const auto &field : qks::io::split_csv_line(sweep_t)) {
                const auto v = qks::io::parse_double(field);
                if (!v) { throw std::invalid_argument("--t-values: '" + field + "' is not a number"); }
                ts.push_back(*v);
            }
            const auto arms = qks::bandwidth_sweep(config, ts);
            qks::write_sweep(arms, config.output_dir);
            spdlog::info("wrote sweep to {}", config.output_dir.string());
        }
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
