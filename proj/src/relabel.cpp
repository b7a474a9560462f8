#include "qks/relabel.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "qks/io.hpp"

namespace qks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd step_c(Index m, const StepSpec &spec) {
    if (spec.n < 1 || spec.n > m) {
        throw std::invalid_argument(
            fmt::format("step_c: n = {} must lie in [1, M = {}]", spec.n, m));
    }
    if (!(spec.x > 0.0) || !std::isfinite(spec.x)) {
        throw std::invalid_argument("step_c: plateau value x must be positive");
    }
    VectorXd c = VectorXd::Zero(m);
    c.head(spec.n).setConstant(spec.x);
    return c;
}

VectorXd relabel(const Spectrum<double> &spectrum, const VectorXd &c_hat) {
    if (c_hat.size() != spectrum.size()) {
        throw std::invalid_argument(fmt::format("relabel: c_hat has length {}, spectrum has {}",
                                                c_hat.size(), spectrum.size()));
    }
    if ((c_hat.array() < 0.0).any() || !c_hat.allFinite()) {
        throw std::invalid_argument("relabel: c_hat must be finite and non-negative");
    }
    return spectrum.eigenvectors * c_hat.cwiseSqrt();
}

VectorXd geometric_relabel(const MatrixXd &k_quantum, const MatrixXd &k_classical,
                           double lambda_reg) {
    if (k_quantum.rows() != k_classical.rows() || k_quantum.cols() != k_classical.cols()) {
        throw std::invalid_argument("geometric_relabel: kernel matrices differ in size");
    }
    if (!(lambda_reg > 0.0)) { throw std::invalid_argument("geometric_relabel: lambda must be > 0"); }
    const MatrixXd root = psd_sqrt(k_quantum);
    MatrixXd geometric = root * solve_spd(k_classical, lambda_reg, root);
    geometric = (geometric + geometric.transpose()) / 2.0;
    const auto spec = sym_eig(geometric);

    Index best = 0;
    for (Index i = 1; i < spec.size(); ++i) {
        if (std::abs(spec.eigenvalues(i)) > std::abs(spec.eigenvalues(best))) { best = i; }
    }
    return root * spec.eigenvectors.col(best);
}

VectorXd geometric_relabel(const KernelMatrix &k_quantum, const KernelMatrix &k_classical,
                           double lambda_reg) {
    if (k_quantum.source_hash != k_classical.source_hash) {
        throw std::invalid_argument(
            "geometric_relabel: kernels were computed from different feature matrices");
    }
    return geometric_relabel(k_quantum.entries, k_classical.entries, lambda_reg);
}

void save_labels(const std::filesystem::path &csv, const LabelSet &labels) {
    std::vector<std::string> columns = labels.columns;
    if (columns.empty()) {
        for (Index c = 0; c < labels.values.cols(); ++c) {
            columns.push_back(labels.values.cols() == 1 ? "y" : fmt::format("y{}", c));
        }
    }
    if (static_cast<Index>(columns.size()) != labels.values.cols()) {
        throw std::invalid_argument("save_labels: column names do not match label width");
    }
    io::write_grid(csv, labels.values, columns);
    auto meta = labels.metadata;
    meta["rows"] = labels.values.rows();
    meta["columns"] = columns;
    io::write_text(sidecar_path(csv), meta.dump(2) + "\n");
}

LabelSet load_labels(const std::filesystem::path &csv) {
    auto grid = io::read_grid(csv, true);
    LabelSet labels;
    labels.values = std::move(grid.values);
    labels.columns = std::move(grid.header);
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        try {
            labels.metadata = nlohmann::ordered_json::parse(io::read_text(side));
        } catch (const nlohmann::json::exception &e) {
            throw io::FormatError(side.string() + ": " + e.what());
        }
    }
    return labels;
}

} // namespace qks
