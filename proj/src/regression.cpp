#include "qks/regression.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "qks/numerics.hpp"

namespace qks {

KrrModel krr_fit(const Eigen::MatrixXd &k_train, const Eigen::MatrixXd &y_train, double ridge,
                 std::vector<Eigen::Index> training_index) {
    if (y_train.rows() != k_train.rows()) {
        throw std::invalid_argument(fmt::format("krr_fit: {} label rows for a {}x{} kernel",
                                                y_train.rows(), k_train.rows(), k_train.cols()));
    }
    if (!training_index.empty() &&
        static_cast<Eigen::Index>(training_index.size()) != k_train.rows()) {
        throw std::invalid_argument("krr_fit: training index does not match kernel size");
    }
    return KrrModel{solve_spd(k_train, ridge, y_train), ridge, std::move(training_index)};
}

Eigen::MatrixXd krr_predict(const Eigen::MatrixXd &k_cross, const KrrModel &model) {
    if (k_cross.cols() != model.alpha.rows()) {
        throw std::invalid_argument(fmt::format(
            "krr_predict: cross kernel has {} columns, model was fit on {} points", k_cross.cols(),
            model.alpha.rows()));
    }
    return k_cross * model.alpha;
}

double mse(const Eigen::MatrixXd &y_true, const Eigen::MatrixXd &y_hat) {
    if (y_true.rows() != y_hat.rows() || y_true.cols() != y_hat.cols()) {
        throw std::invalid_argument("mse: shape mismatch");
    }
    if (y_true.rows() == 0) { throw std::invalid_argument("mse: empty input"); }
    return (y_true - y_hat).squaredNorm() / static_cast<double>(y_true.rows());
}

} // namespace qks
