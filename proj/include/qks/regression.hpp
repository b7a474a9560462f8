#pragma once

#include <vector>

#include <Eigen/Dense>

namespace qks {

/// Dual kernel ridge regression model.
struct KrrModel {
    Eigen::MatrixXd alpha;  // (K + lambda I)^{-1} y, one column per output
    double ridge = 0.0;
    std::vector<Eigen::Index> training_index;  // rows of the source dataset
};

KrrModel krr_fit(const Eigen::MatrixXd &k_train, const Eigen::MatrixXd &y_train, double ridge,
                 std::vector<Eigen::Index> training_index = {});

/// y_hat = K_cross alpha, with K_cross of shape (M_test, M_train).
Eigen::MatrixXd krr_predict(const Eigen::MatrixXd &k_cross, const KrrModel &model);

/// Mean over rows of the squared error, summed over output columns.
double mse(const Eigen::MatrixXd &y_true, const Eigen::MatrixXd &y_hat);

} // namespace qks
