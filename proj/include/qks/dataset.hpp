#pragma once

// Tabular dataset ingestion, preprocessing and seeded subsampling.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace qks {

enum class ColumnRole { feature, label, ignore };
enum class LabelKind { categorical, real };

/// Maps CSV header names to roles. Columns not listed get `default_role`.
/// Exactly one label column is required.
struct Schema {
    std::string name;
    std::map<std::string, ColumnRole> roles;
    ColumnRole default_role = ColumnRole::ignore;
    LabelKind label_kind = LabelKind::categorical;
    std::vector<std::string> missing_tokens = {"", "?", "NA", "NaN", "nan"};

    static Schema from_json(const nlohmann::json &j);
    static Schema load(const std::filesystem::path &path);
    /// Shipped presets: breast_cancer, heart_failure, bone_marrow.
    static Schema preset(const std::string &name);
};

struct Dataset {
    std::string name;
    std::string provenance;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;                 // M x D
    std::vector<std::string> labels_raw;      // per row
    std::vector<std::string> classes;         // sorted; empty for real labels
    Eigen::MatrixXd labels_encoded;           // M x L, one-hot for classes
    Eigen::Index dropped_rows = 0;            // rows removed for missing values
    std::vector<std::string> warnings;

    [[nodiscard]] Eigen::Index rows() const { return features.rows(); }
};

/// Reads a CSV with a header row. Rows with a missing cell in a used column
/// are dropped and counted; an unparseable feature cell is an error naming
/// the row and column.
Dataset load_csv(const std::filesystem::path &path, const Schema &schema);

/// Class labels recovered from one-hot rows.
std::vector<std::string> decode_one_hot(const Eigen::MatrixXd &one_hot,
                                        const std::vector<std::string> &classes);

/// Standardize columns, project onto the top-k principal components, then
/// rescale each component to unit variance. Zero-variance input columns are
/// dropped with a warning; components with no variance stay zero.
Dataset preprocess(const Dataset &dataset, Eigen::Index k = 8);

/// Standard-Gaussian features with labels 1[x . w > 0] for a Gaussian w.
Dataset synthetic(Eigen::Index m, Eigen::Index d, std::uint64_t seed);

struct SubsampleSpec {
    Eigen::Index n = 0;
    Eigen::Index repetition = 0;
    std::uint64_t master_seed = 0;
};

/// N distinct indices drawn uniformly without replacement from [0, M),
/// sorted ascending. Seeded only by (master_seed, N, repetition).
std::vector<Eigen::Index> subsample_indices(Eigen::Index m, const SubsampleSpec &spec);

/// Features plus a `label` column.
void save_dataset(const std::filesystem::path &csv, const Dataset &dataset);

} // namespace qks
