#pragma once

// Spectral generalization theory for kernel ridge regression: the
// self-consistent scalars (a, b), per-mode errors, predicted total error,
// per-mode target power c and the cumulative alignment curve C(i).

#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qks/numerics.hpp"

namespace qks {

/// How Gram-matrix eigenvalues enter the theory. `over_m` divides eig(K) and
/// the target power by the dataset size M (eigenvalues of the integral
/// operator under the empirical measure); `raw` feeds eig(K) directly.
enum class SpectrumScale { raw, over_m };

/// Numerator of the mode error. `printed` uses gamma_i together with
/// b = sum N gamma_i / (a + N gamma_i)^2; `kappa_squared` uses a^2 together
/// with b = sum N gamma_i^2 / (a + N gamma_i)^2.
enum class ModeErrorVariant { printed, kappa_squared };

std::string to_string(SpectrumScale scale);
std::string to_string(ModeErrorVariant variant);
SpectrumScale spectrum_scale_from_string(const std::string &name);
ModeErrorVariant mode_error_variant_from_string(const std::string &name);

struct SelfConsistentSolution {
    double a = 0.0;
    double b = 0.0;        // sum N g / (a + N g)^2
    double b_kappa = 0.0;  // sum N g^2 / (a + N g)^2
    double residual_a = 0.0;
    int iterations = 0;

    [[nodiscard]] double b_for(ModeErrorVariant variant) const {
        return variant == ModeErrorVariant::printed ? b : b_kappa;
    }
    /// b >= 1 leaves the mode errors undefined.
    [[nodiscard]] bool degenerate(ModeErrorVariant variant) const { return b_for(variant) >= 1.0; }
};

/// Damped fixed-point iteration a <- (a + lambda + sum a g/(a + N g)) / 2
/// started from lambda + sum g. Negative eigenvalues are clamped to zero.
/// Throws NumericalError after 1e5 iterations without convergence.
SelfConsistentSolution solve_self_consistent(const Eigen::VectorXd &gamma, double n,
                                             double lambda);

/// E_i for each mode; `b` must be the value matching `variant`.
Eigen::VectorXd mode_errors(const Eigen::VectorXd &gamma, double a, double b, double n,
                            ModeErrorVariant variant);

/// c_i = (v_i . y)^2.
Eigen::VectorXd helper_c(const Spectrum<double> &spectrum, const Eigen::VectorXd &y);

/// C(i) = sum_{i' <= i} c_i' / sum c.
Eigen::VectorXd alignment_curve(const Eigen::VectorXd &c);

struct PredictionOptions {
    SpectrumScale scale = SpectrumScale::over_m;
    ModeErrorVariant variant = ModeErrorVariant::kappa_squared;
};

struct GeneralizationReport {
    double n = 0.0;
    double lambda = 0.0;
    SelfConsistentSolution solution;
    Eigen::VectorXd mode_errors;
    Eigen::VectorXd per_output_error;  // one entry per label column
    double predicted_error = 0.0;
    Eigen::VectorXd alignment_curve;   // from c summed over label columns
    PredictionOptions options;
};

/// E = sum_i c_i E_i per label column, summed over columns. Throws
/// NumericalError when b >= 1 for the chosen variant.
GeneralizationReport predicted_error(const Spectrum<double> &spectrum, const Eigen::MatrixXd &y,
                                     double n, double lambda, PredictionOptions options = {});

nlohmann::ordered_json to_json(const GeneralizationReport &report);

} // namespace qks
