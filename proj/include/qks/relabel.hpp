#pragma once

// Semi-artificial label generation: step-function spectrum alignment and
// geometric-difference relabeling, plus the label file format.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qks/kernels.hpp"
#include "qks/numerics.hpp"

namespace qks {

/// c_hat with value `x` on the leading `n` modes and zero elsewhere.
struct StepSpec {
    Eigen::Index n = 1;
    double x = 1.0;
};

inline constexpr double kGeometricRidge = 1.1;

Eigen::VectorXd step_c(Eigen::Index m, const StepSpec &spec);

/// y = V sqrt(c_hat). V is orthogonal, so helper_c(spectrum, y) == c_hat.
Eigen::VectorXd relabel(const Spectrum<double> &spectrum, const Eigen::VectorXd &c_hat);

/// y = sqrt(K_Q) v, where v is the eigenvector of
/// sqrt(K_Q) (K_C + lambda I)^{-1} sqrt(K_Q) with the largest |eigenvalue|
/// (lowest index on ties).
Eigen::VectorXd geometric_relabel(const Eigen::MatrixXd &k_quantum,
                                  const Eigen::MatrixXd &k_classical,
                                  double lambda_reg = kGeometricRidge);
Eigen::VectorXd geometric_relabel(const KernelMatrix &k_quantum, const KernelMatrix &k_classical,
                                  double lambda_reg = kGeometricRidge);

/// Label matrix (one column per output) with the metadata written to its sidecar.
struct LabelSet {
    Eigen::MatrixXd values;
    std::vector<std::string> columns;
    nlohmann::ordered_json metadata;  // generator, hyperparameters, kernel hash
};

void save_labels(const std::filesystem::path &csv, const LabelSet &labels);
LabelSet load_labels(const std::filesystem::path &csv);

} // namespace qks
