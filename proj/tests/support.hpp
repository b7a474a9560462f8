#pragma once

// Test-only oracles: dense unitaries, random matrices, scratch directories.

#include <complex>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace qks_test {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) { m(i, j) = normal(rng); }
    }
    return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64 &rng, Eigen::Index n) {
    const Eigen::MatrixXd a = random_matrix(rng, n, n);
    return (a + a.transpose()) / 2.0;
}

/// A^T A + shift I.
inline Eigen::MatrixXd random_spd(std::mt19937_64 &rng, Eigen::Index n, double shift = 0.1) {
    const Eigen::MatrixXd a = random_matrix(rng, n, n);
    return a.transpose() * a + shift * Eigen::MatrixXd::Identity(n, n);
}

inline CVector random_state(std::mt19937_64 &rng, Eigen::Index dim) {
    std::normal_distribution<double> normal;
    CVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) { v(i) = Complex(normal(rng), normal(rng)); }
    return v / v.norm();
}

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// XX + YY + ZZ on two qubits, first qubit most significant.
inline CMatrix xyz_hamiltonian() {
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    return kron(x, x) + kron(y, y) + kron(z, z);
}

/// exp(-i theta H) through the eigendecomposition of the Hermitian H.
inline CMatrix expm_hermitian(const CMatrix &h, double theta) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CVector phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        phases(i) = std::exp(Complex(0, -theta * es.eigenvalues()(i)));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Full-register operator for a two-qubit gate on (j, j+1) of q qubits.
inline CMatrix embed_pair(const CMatrix &u, int j, int q) {
    const CMatrix left = CMatrix::Identity(Eigen::Index{1} << j, Eigen::Index{1} << j);
    const Eigen::Index right_dim = Eigen::Index{1} << (q - j - 2);
    const CMatrix right = CMatrix::Identity(right_dim, right_dim);
    return kron(kron(left, u), right);
}

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("qks_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace qks_test
