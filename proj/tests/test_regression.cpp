#include <doctest.h>

#include "qks/kernels.hpp"
#include "qks/numerics.hpp"
#include "qks/regression.hpp"
#include "support.hpp"

using Eigen::MatrixXd;

TEST_SUITE("regression") {

TEST_CASE("krr_fit with an identity kernel") {
    const MatrixXd y = (MatrixXd(3, 2) << 1, 2, 3, 4, 5, 6).finished();
    CHECK(qks::krr_fit(MatrixXd::Identity(3, 3), y, 0.0).alpha.isApprox(y));
    CHECK(qks::krr_fit(MatrixXd::Identity(3, 3), y, 1.0).alpha.isApprox(y / 2));
}

TEST_CASE("krr interpolates as the ridge vanishes") {
    std::mt19937_64 rng(71);
    const MatrixXd x = qks_test::random_matrix(rng, 10, 3);
    const MatrixXd k = qks::rbf_gram(x, {0.5}).entries;
    const MatrixXd y = qks_test::random_matrix(rng, 10, 1);
    const auto model = qks::krr_fit(k, y, 1e-12);
    CHECK(qks::mse(y, qks::krr_predict(k, model)) <= 1e-6);
}

TEST_CASE("krr_fit errors") {
    CHECK_THROWS_AS(qks::krr_fit(MatrixXd::Ones(3, 3), MatrixXd::Ones(3, 1), 0.0), qks::NumericalError);
    CHECK_THROWS_AS(qks::krr_fit(MatrixXd::Identity(3, 3), MatrixXd::Ones(2, 1), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(qks::krr_fit(MatrixXd::Identity(3, 3), MatrixXd::Ones(3, 1), 0.0, {0, 1}),
                    std::invalid_argument);
}

TEST_CASE("krr_predict examples") {
    std::mt19937_64 rng(72);
    const MatrixXd k = qks_test::random_spd(rng, 6);
    const MatrixXd y = qks_test::random_matrix(rng, 6, 2);
    const auto model = qks::krr_fit(k, y, 0.1);
    CHECK(qks::krr_predict(k.topRows(2), model).isApprox(k.topRows(2) * model.alpha));
    CHECK(qks::krr_predict(MatrixXd::Zero(4, 6), model).isZero());
    const MatrixXd cross = qks_test::random_matrix(rng, 3, 6);
    const MatrixXd direct = cross * (k + 0.1 * MatrixXd::Identity(6, 6)).inverse() * y;
    CHECK((qks::krr_predict(cross, model) - direct).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK_THROWS_AS(qks::krr_predict(MatrixXd::Zero(4, 5), model), std::invalid_argument);
}

TEST_CASE("krr predictions are linear in the labels") {
    std::mt19937_64 rng(73);
    const MatrixXd k = qks_test::random_spd(rng, 8);
    const MatrixXd cross = qks_test::random_matrix(rng, 5, 8);
    const MatrixXd y1 = qks_test::random_matrix(rng, 8, 1);
    const MatrixXd y2 = qks_test::random_matrix(rng, 8, 1);
    const MatrixXd sum = qks::krr_predict(cross, qks::krr_fit(k, y1 + y2, 1e-3));
    const MatrixXd parts = qks::krr_predict(cross, qks::krr_fit(k, y1, 1e-3)) +
                           qks::krr_predict(cross, qks::krr_fit(k, y2, 1e-3));
    CHECK((sum - parts).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("mse examples") {
    std::mt19937_64 rng(74);
    const MatrixXd a = qks_test::random_matrix(rng, 9, 2);
    CHECK(qks::mse(a, a) == 0.0);
    CHECK(qks::mse(MatrixXd::Zero(2, 1), MatrixXd::Ones(2, 1)) == 1.0);
    const MatrixXd b = qks_test::random_matrix(rng, 9, 2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < 9; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) { sum += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j)); }
    }
    CHECK(qks::mse(a, b) == doctest::Approx(sum / 9.0).epsilon(1e-14));
    CHECK(qks::mse(a, b) > 0.0);
    CHECK_THROWS_AS(qks::mse(a, MatrixXd::Zero(9, 1)), std::invalid_argument);
    CHECK_THROWS_AS(qks::mse(MatrixXd(0, 1), MatrixXd(0, 1)), std::invalid_argument);
}

}
