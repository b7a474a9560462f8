#include <doctest.h>

#include <numbers>

#include "qks/qsim.hpp"
#include "support.hpp"

using qks::FeatureMapConfig;
using qks::Statevector;
using qks_test::CMatrix;
using qks_test::Complex;
using qks_test::CVector;

TEST_SUITE("qsim") {

TEST_CASE("statevector validation") {
    CHECK_THROWS_AS(Statevector<>(CVector::Ones(3) / std::sqrt(3.0)), std::invalid_argument);
    CHECK_THROWS_AS(Statevector<>(CVector::Ones(4)), std::invalid_argument);
    CHECK_THROWS_AS(Statevector<>::normalized(CVector::Zero(4)), std::invalid_argument);
    const auto s = Statevector<>::normalized(CVector::Ones(8));
    CHECK(s.qubit_count() == 3);
    CHECK(s.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(Statevector<>::basis(2, 4), std::invalid_argument);
}

TEST_CASE("haar_product_state is deterministic and normalized") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        const auto a = qks::haar_product_state(5, seed);
        const auto b = qks::haar_product_state(5, seed);
        CHECK(a == b);
        CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
    }
    CHECK_FALSE(qks::haar_product_state(3, 1) == qks::haar_product_state(3, 2));
    CHECK_THROWS_AS(qks::haar_product_state(0, 1), std::invalid_argument);
}

TEST_CASE("haar_product_state is a product state") {
    const auto s = qks::haar_product_state(2, 7);
    const auto &a = s.amplitudes();
    // Rank-one 2x2 coefficient matrix.
    CHECK(std::abs(a(0) * a(3) - a(1) * a(2)) <= 1e-14);
}

TEST_CASE("single-qubit Haar overlap with |0> has mean 1/2") {
    double sum = 0.0;
    const int draws = 100000;
    for (int seed = 0; seed < draws; ++seed) {
        sum += std::norm(qks::haar_product_state(1, static_cast<std::uint64_t>(seed)).amplitudes()(0));
    }
    CHECK(std::abs(sum / draws - 0.5) <= 0.01);
}

TEST_CASE("apply_xyz_evolution with theta = 0 is the identity") {
    const auto s = qks::haar_product_state(4, 3);
    CHECK(qks::apply_xyz_evolution(s, 1, 0.0) == s);
}

TEST_CASE("theta = pi/4 swaps |01> into |10> with phase e^{-i pi/4}") {
    const auto s = Statevector<>::basis(2, 1);
    const auto out = qks::apply_xyz_evolution(s, 0, std::numbers::pi / 4);
    const CMatrix u = qks_test::expm_hermitian(qks_test::xyz_hamiltonian(), std::numbers::pi / 4);
    const CVector oracle = u * s.amplitudes();
    const Complex phase = std::exp(Complex(0, -std::numbers::pi / 4));
    CHECK(std::abs(out.amplitudes()(2) - phase) <= 1e-12);
    CHECK(std::abs(out.amplitudes()(1)) <= 1e-12);
    CHECK((out.amplitudes() - oracle).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("apply_xyz_evolution matches the dense matrix exponential") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> angle(-4.0, 4.0);
    std::uniform_int_distribution<int> qubits(2, 5);
    const CMatrix h = qks_test::xyz_hamiltonian();
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int q = qubits(rng);
        std::uniform_int_distribution<int> pair(0, q - 2);
        const int j = pair(rng);
        const double theta = angle(rng);
        const CVector psi = qks_test::random_state(rng, Eigen::Index{1} << q);
        const CVector oracle = qks_test::embed_pair(qks_test::expm_hermitian(h, theta), j, q) * psi;
        const auto out = qks::apply_xyz_evolution(Statevector<>(psi), j, theta);
        worst = std::max(worst, (out.amplitudes() - oracle).cwiseAbs().maxCoeff());
        CHECK(std::abs(out.norm() - 1.0) <= 1e-10);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("apply_xyz_evolution rejects bad pairs") {
    auto s = qks::haar_product_state(3, 1);
    CHECK_THROWS_AS(s.apply_xyz(2, 0.1), std::out_of_range);
    CHECK_THROWS_AS(s.apply_xyz(-1, 0.1), std::out_of_range);
}

TEST_CASE("evolutions on disjoint pairs commute") {
    const auto s = qks::haar_product_state(4, 9);
    const auto ab = qks::apply_xyz_evolution(qks::apply_xyz_evolution(s, 0, 0.3), 2, -1.1);
    const auto ba = qks::apply_xyz_evolution(qks::apply_xyz_evolution(s, 2, -1.1), 0, 0.3);
    CHECK((ab.amplitudes() - ba.amplitudes()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("embed of the zero vector returns the initial state") {
    FeatureMapConfig config{3, 0.5, 10, 17};
    const auto s = qks::embed(Eigen::VectorXd::Zero(3), config);
    CHECK(s == qks::haar_product_state(4, 17));
}

TEST_CASE("embed preserves norm and is deterministic") {
    std::mt19937_64 rng(22);
    FeatureMapConfig config{8, 0.5, 10, 5};
    const qks::FeatureMap<> map(config);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd x = qks_test::random_matrix(rng, 8, 1);
        const auto a = map.embed(x);
        CHECK(std::abs(a.norm() - 1.0) <= 1e-10);
        CHECK(a == qks::embed(x, config));
    }
}

TEST_CASE("embed matches brute-force unitary products for n = 2") {
    const Eigen::Vector2d x(0.7, -1.3);
    const CMatrix h = qks_test::xyz_hamiltonian();
    const CVector init = qks::haar_product_state(3, 4).amplitudes();
    auto oracle = [&](int trotter) {
        const double t = 0.5;
        CMatrix step = CMatrix::Identity(8, 8);
        for (int j = 0; j < 2; ++j) {
            step = qks_test::embed_pair(qks_test::expm_hermitian(h, t / trotter * x(j)), j, 3) * step;
        }
        CMatrix u = CMatrix::Identity(8, 8);
        for (int r = 0; r < trotter; ++r) { u = step * u; }
        return CVector(u * init);
    };
    for (int trotter : {1, 4}) {
        const auto s = qks::embed(x, FeatureMapConfig{2, 0.5, trotter, 4});
        CHECK((s.amplitudes() - oracle(trotter)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const auto s1 = qks::embed(x, FeatureMapConfig{2, 0.5, 1, 4});
    const auto s4 = qks::embed(x, FeatureMapConfig{2, 0.5, 4, 4});
    const double expected = std::norm(oracle(1).dot(oracle(4)));
    CHECK(qks::fidelity(s1, s4) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(qks::fidelity(s1, s4) < 1.0 - 1e-6);
}

TEST_CASE("embed validates its input") {
    FeatureMapConfig config{3, 0.5, 10, 0};
    CHECK_THROWS_AS(qks::embed(Eigen::VectorXd::Zero(2), config), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
    bad(1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(qks::embed(bad, config), std::invalid_argument);
    CHECK_THROWS_AS(qks::embed(Eigen::VectorXd::Zero(3), FeatureMapConfig{3, 0.0, 10, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(qks::embed(Eigen::VectorXd::Zero(3), FeatureMapConfig{3, 0.5, 0, 0}),
                    std::invalid_argument);
    CHECK(config.qubit_count() == 4);
}

TEST_CASE("fidelity examples") {
    const auto s = qks::haar_product_state(3, 8);
    CHECK(qks::fidelity(s, s) == doctest::Approx(1.0));
    CHECK(qks::fidelity(Statevector<>::basis(3, 0), Statevector<>::basis(3, 7)) == 0.0);
    CHECK_THROWS_AS(qks::fidelity(s, Statevector<>::basis(2, 0)), std::invalid_argument);
}

TEST_CASE("fidelity equals the direct inner product and is symmetric") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const CVector a = qks_test::random_state(rng, 16);
        const CVector b = qks_test::random_state(rng, 16);
        Complex sum = 0;
        for (Eigen::Index i = 0; i < 16; ++i) { sum += std::conj(a(i)) * b(i); }
        const Statevector<> sa(a), sb(b);
        CHECK(qks::fidelity(sa, sb) == doctest::Approx(std::norm(sum)).epsilon(1e-12));
        CHECK(qks::fidelity(sa, sb) == qks::fidelity(sb, sa));
    }
}

}
