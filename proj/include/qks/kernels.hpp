#pragma once

// Quantum-fidelity and RBF Gram matrices, cross-kernel blocks, and the
// CSV + JSON-sidecar kernel file format.

#include <filesystem>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "qks/qsim.hpp"

namespace qks {

enum class KernelKind { quantum, rbf };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string &name);

struct RbfParams {
    double gamma = 1.0;  // inverse squared length scale

    void validate() const;
    bool operator==(const RbfParams &) const = default;
};

using KernelParams = std::variant<FeatureMapConfig, RbfParams>;

KernelKind kind_of(const KernelParams &params);

/// Symmetric Gram matrix with the parameters that produced it and a digest
/// of the feature matrix it was computed from.
struct KernelMatrix {
    Eigen::MatrixXd entries;
    KernelParams params;
    std::string source_hash;

    [[nodiscard]] KernelKind kind() const { return kind_of(params); }
    [[nodiscard]] Eigen::Index size() const { return entries.rows(); }
};

/// 64-bit FNV-1a digest of the shape and IEEE-754 bytes of a matrix
/// (row-major, little-endian), as 16 hex digits.
std::string matrix_digest(const Eigen::MatrixXd &x);

/// Default RBF width: 1 / (D * mean per-column sample variance).
double scale_gamma(const Eigen::MatrixXd &x);

KernelMatrix quantum_gram(const Eigen::MatrixXd &x, const FeatureMapConfig &config);
KernelMatrix rbf_gram(const Eigen::MatrixXd &x, const RbfParams &params);
KernelMatrix gram(const Eigen::MatrixXd &x, const KernelParams &params);

/// k(a_i, b_j) for every row pair.
Eigen::MatrixXd cross_gram(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                           const KernelParams &params);

/// As above, but refuses parameters that differ from the ones `trained`
/// was built with: kernels from different feature maps are incomparable.
Eigen::MatrixXd cross_gram(const KernelMatrix &trained, const Eigen::MatrixXd &a,
                           const Eigen::MatrixXd &b, const KernelParams &params);

/// Sidecar path used for `csv`: the same path with ".json" appended.
std::filesystem::path sidecar_path(const std::filesystem::path &csv);

/// Writes the M x M grid with 17 significant digits plus the JSON sidecar
/// (kind, t, T, haar_seed, gamma_rbf, source_hash, M).
void save_kernel(const std::filesystem::path &csv, const KernelMatrix &kernel);
KernelMatrix load_kernel(const std::filesystem::path &csv);

} // namespace qks
