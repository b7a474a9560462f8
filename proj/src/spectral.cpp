#include "qks/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace qks {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr int kMaxIterations = 100000;
constexpr double kStepTolerance = 1e-12;
constexpr double kResidualTolerance = 5e-11;  // relative to a; the contract is 1e-10
constexpr double kDamping = 0.5;

double fixed_point_rhs(const VectorXd &g, double a, double n, double lambda) {
    double sum = lambda;
    for (Index i = 0; i < g.size(); ++i) {
        if (g(i) > 0.0) { sum += a * g(i) / (a + n * g(i)); }
    }
    return sum;
}

std::vector<double> to_std(const VectorXd &v) { return {v.data(), v.data() + v.size()}; }

} // namespace

std::string to_string(SpectrumScale scale) { return scale == SpectrumScale::raw ? "raw" : "over_m"; }

std::string to_string(ModeErrorVariant variant) {
    return variant == ModeErrorVariant::printed ? "printed" : "kappa_squared";
}

SpectrumScale spectrum_scale_from_string(const std::string &name) {
    if (name == "raw") { return SpectrumScale::raw; }
    if (name == "over_m" || name == "over_M") { return SpectrumScale::over_m; }
    throw std::invalid_argument("unknown spectrum_scale '" + name + "' (expected raw or over_m)");
}

ModeErrorVariant mode_error_variant_from_string(const std::string &name) {
    if (name == "printed") { return ModeErrorVariant::printed; }
    if (name == "kappa_squared") { return ModeErrorVariant::kappa_squared; }
    throw std::invalid_argument("unknown mode_error_variant '" + name +
                                "' (expected printed or kappa_squared)");
}

SelfConsistentSolution solve_self_consistent(const VectorXd &gamma, double n, double lambda) {
    if (!gamma.allFinite()) { throw std::invalid_argument("solve_self_consistent: non-finite eigenvalue"); }
    if (!(n >= 1.0) || !std::isfinite(n)) {
        throw std::invalid_argument("solve_self_consistent: N must be >= 1");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("solve_self_consistent: lambda must be >= 0");
    }
    const VectorXd g = gamma.cwiseMax(0.0);
    const auto positive = (g.array() > 0.0).count();

    SelfConsistentSolution sol;
    if (lambda == 0.0 && positive == 0) {
        throw std::invalid_argument("solve_self_consistent: lambda = 0 needs a positive eigenvalue");
    }
    if (lambda == 0.0 && static_cast<double>(positive) <= n) {
        // No positive root: the interpolating regime has a = 0 exactly.
        sol.a = 0.0;
    } else {
        double a = lambda + g.sum();
        int it = 0;
        for (;; ++it) {
            if (it >= kMaxIterations) {
                throw NumericalError(fmt::format(
                    "solve_self_consistent: no convergence after {} iterations (a={}, residual={})",
                    kMaxIterations, a, std::abs(fixed_point_rhs(g, a, n, lambda) - a)));
            }
            const double next = (1.0 - kDamping) * a + kDamping * fixed_point_rhs(g, a, n, lambda);
            const double step = std::abs(next - a);
            a = next;
            if (step <= kStepTolerance * std::max(a, 1.0) &&
                std::abs(fixed_point_rhs(g, a, n, lambda) - a) <= kResidualTolerance * a) {
                break;
            }
        }
        // Newton polish; the damped map contracts slowly when its slope nears 1.
        double residual = fixed_point_rhs(g, a, n, lambda) - a;
        for (int k = 0; k < 8 && residual != 0.0; ++k) {
            double slope = -1.0;
            for (Index i = 0; i < g.size(); ++i) {
                const double d = a + n * g(i);
                if (g(i) > 0.0) { slope += n * g(i) * g(i) / (d * d); }
            }
            const double candidate = a - residual / slope;
            if (!(candidate > 0.0)) { break; }
            const double r = fixed_point_rhs(g, candidate, n, lambda) - candidate;
            if (!(std::abs(r) < std::abs(residual))) { break; }
            a = candidate;
            residual = r;
        }
        sol.a = a;
        sol.iterations = it + 1;
    }
    sol.residual_a = std::abs(fixed_point_rhs(g, sol.a, n, lambda) - sol.a);
    for (Index i = 0; i < g.size(); ++i) {
        if (g(i) <= 0.0) { continue; }
        const double denom = (sol.a + n * g(i)) * (sol.a + n * g(i));
        sol.b += n * g(i) / denom;
        sol.b_kappa += n * g(i) * g(i) / denom;
    }
    return sol;
}

VectorXd mode_errors(const VectorXd &gamma, double a, double b, double n,
                     ModeErrorVariant variant) {
    if (!(b < 1.0)) {
        throw NumericalError(fmt::format("mode_errors: b = {} >= 1, mode errors are undefined", b));
    }
    const double inv = 1.0 / (1.0 - b);
    VectorXd e(gamma.size());
    for (Index i = 0; i < gamma.size(); ++i) {
        const double g = std::max(gamma(i), 0.0);
        const double denom = (a + n * g) * (a + n * g);
        if (variant == ModeErrorVariant::printed) {
            e(i) = g > 0.0 ? inv * g / denom : 0.0;
        } else {
            // A mode with g = 0 is never learned: a^2 / a^2 = 1, also in the a -> 0 limit.
            e(i) = g > 0.0 ? inv * a * a / denom : inv;
        }
    }
    return e;
}

VectorXd helper_c(const Spectrum<double> &spectrum, const VectorXd &y) {
    if (y.size() != spectrum.size()) {
        throw std::invalid_argument(fmt::format("helper_c: labels have length {}, spectrum has {}",
                                                y.size(), spectrum.size()));
    }
    return (spectrum.eigenvectors.transpose() * y).array().square().matrix();
}

VectorXd alignment_curve(const VectorXd &c) {
    if ((c.array() < 0.0).any() || !c.allFinite()) {
        throw std::invalid_argument("alignment_curve: coefficients must be finite and non-negative");
    }
    VectorXd cumulative(c.size());
    double running = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
        running += c(i);
        cumulative(i) = running;
    }
    if (!(running > 0.0)) { throw std::invalid_argument("alignment_curve: all coefficients are zero"); }
    return cumulative / running;
}

GeneralizationReport predicted_error(const Spectrum<double> &spectrum, const Eigen::MatrixXd &y,
                                     double n, double lambda, PredictionOptions options) {
    const Index m = spectrum.size();
    if (y.rows() != m) {
        throw std::invalid_argument(
            fmt::format("predicted_error: labels have {} rows, spectrum has {}", y.rows(), m));
    }
    if (n > static_cast<double>(m)) {
        throw std::invalid_argument(
            fmt::format("predicted_error: N = {} exceeds dataset size {}", n, m));
    }
    const double scale = options.scale == SpectrumScale::over_m ? 1.0 / static_cast<double>(m) : 1.0;
    const VectorXd gamma = spectrum.eigenvalues * scale;

    GeneralizationReport report;
    report.n = n;
    report.lambda = lambda;
    report.options = options;
    report.solution = solve_self_consistent(gamma, n, lambda);
    report.mode_errors = mode_errors(gamma, report.solution.a,
                                     report.solution.b_for(options.variant), n, options.variant);

    report.per_output_error.resize(y.cols());
    VectorXd total_c = VectorXd::Zero(m);
    for (Index col = 0; col < y.cols(); ++col) {
        const VectorXd c = helper_c(spectrum, y.col(col));
        total_c += c;
        report.per_output_error(col) = scale * c.dot(report.mode_errors);
    }
    report.predicted_error = report.per_output_error.sum();
    if (total_c.sum() > 0.0) { report.alignment_curve = alignment_curve(total_c); }
    return report;
}

nlohmann::ordered_json to_json(const GeneralizationReport &report) {
    nlohmann::ordered_json j;
    j["N"] = report.n;
    j["lambda"] = report.lambda;
    j["spectrum_scale"] = to_string(report.options.scale);
    j["mode_error_variant"] = to_string(report.options.variant);
    j["a"] = report.solution.a;
    j["b"] = report.solution.b_for(report.options.variant);
    j["b_printed"] = report.solution.b;
    j["b_kappa"] = report.solution.b_kappa;
    j["residual_a"] = report.solution.residual_a;
    j["iterations"] = report.solution.iterations;
    j["predicted_error"] = report.predicted_error;
    j["per_output_error"] = to_std(report.per_output_error);
    j["mode_errors"] = to_std(report.mode_errors);
    j["alignment_curve"] = to_std(report.alignment_curve);
    return j;
}

} // namespace qks
