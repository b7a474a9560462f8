#pragma once

// Dense symmetric linear algebra on Eigen types: Jacobi eigendecomposition,
// PSD square root, shifted SPD solves and PCA.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qks {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when a numerical routine cannot produce a trustworthy result
/// (singular system, non-PSD input, non-convergence).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Eigenpairs of a symmetric matrix. Eigenvalues are non-increasing and
/// column i of `eigenvectors` pairs with `eigenvalues(i)`. Within each column
/// the entry of largest magnitude is non-negative (lowest index wins ties).
template <typename Scalar>
struct Spectrum {
    Vector<Scalar> eigenvalues;
    Matrix<Scalar> eigenvectors;

    [[nodiscard]] Index size() const { return eigenvalues.size(); }
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived> &m, const char *what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived> &m, const char *what) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(what) + ": matrix is " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    ", expected square");
    }
}

namespace detail {

template <typename Scalar>
Scalar off_diagonal_norm(const Matrix<Scalar> &a) {
    Scalar sum = 0;
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            if (i != j) { sum += a(i, j) * a(i, j); }
        }
    }
    return std::sqrt(sum);
}

/// Flip each column so its largest-magnitude entry is non-negative.
template <typename Scalar>
void canonicalize_signs(Matrix<Scalar> &v) {
    for (Index j = 0; j < v.cols(); ++j) {
        Index best = 0;
        Scalar best_abs = -1;
        for (Index i = 0; i < v.rows(); ++i) {
            if (std::abs(v(i, j)) > best_abs) {
                best_abs = std::abs(v(i, j));
                best = i;
            }
        }
        if (v(best, j) < 0) { v.col(j) = -v.col(j); }
    }
}

} // namespace detail

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized as (K + K^T)/2. Sweeps stop once the off-diagonal
/// Frobenius norm falls to 1e-12 * ||K||_F, or after 100 sweeps. Equal
/// eigenvalues keep the order of their diagonal positions, so the result is
/// fully deterministic for a given input.
template <typename Derived>
Spectrum<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived> &k) {
    using Scalar = typename Derived::Scalar;
    require_square(k, "sym_eig");
    require_finite(k, "sym_eig");

    const Index n = k.rows();
    Matrix<Scalar> a = (k + k.transpose()) / Scalar(2);
    Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);

    constexpr int max_sweeps = 100;
    const Scalar target = Scalar(1e-12) * a.norm();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (detail::off_diagonal_norm(a) <= target) { break; }
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (apq == Scalar(0)) { continue; }
                const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                Scalar t;
                if (std::abs(theta) > Scalar(1e150)) {
                    t = Scalar(1) / (Scalar(2) * theta);
                } else {
                    t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                        (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
                }
                const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
                const Scalar s = t * c;

                // A <- J^T A J with J the (p, q) plane rotation [[c, s], [-s, c]].
                const Vector<Scalar> col_p = a.col(p);
                a.col(p) = c * col_p - s * a.col(q);
                a.col(q) = s * col_p + c * a.col(q);
                const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row_p = a.row(p);
                a.row(p) = c * row_p - s * a.row(q);
                a.row(q) = s * row_p + c * a.row(q);
                a(p, q) = Scalar(0);
                a(q, p) = Scalar(0);

                const Vector<Scalar> vp = v.col(p);
                v.col(p) = c * vp - s * v.col(q);
                v.col(q) = s * vp + c * v.col(q);
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index lhs, Index rhs) { return a(lhs, lhs) > a(rhs, rhs); });

    Spectrum<Scalar> out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        out.eigenvalues(i) = a(src, src);
        out.eigenvectors.col(i) = v.col(src);
    }
    detail::canonicalize_signs(out.eigenvectors);
    return out;
}

/// Clamp tolerance for eigenvalues treated as numerical noise around zero.
inline constexpr double kPsdClamp = 1e-10;
/// Eigenvalues below -kPsdReject * max(1, ||K||_max) mean the input is not PSD.
inline constexpr double kPsdReject = 1e-6;

/// Symmetric square root of a PSD matrix; small negative eigenvalues are
/// clamped to zero.
template <typename Derived>
Matrix<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived> &k) {
    using Scalar = typename Derived::Scalar;
    const auto spec = sym_eig(k);
    const Scalar scale = std::max(Scalar(1), k.cwiseAbs().maxCoeff());
    if (spec.size() > 0 && spec.eigenvalues(spec.size() - 1) < -Scalar(kPsdReject) * scale) {
        throw NumericalError("psd_sqrt: matrix is not positive semidefinite (eigenvalue " +
                             std::to_string(static_cast<double>(spec.eigenvalues(spec.size() - 1))) +
                             ")");
    }
    const Vector<Scalar> roots = spec.eigenvalues.cwiseMax(Scalar(0)).cwiseSqrt();
    Matrix<Scalar> s = spec.eigenvectors * roots.asDiagonal() * spec.eigenvectors.transpose();
    return (s + s.transpose()) / Scalar(2);
}

/// Smallest admissible LDLT pivot, relative to max(1, max |diag|).
inline constexpr double kSingularPivot = 1e-14;

/// Solves (K + ridge * I) X = B for symmetric positive definite K + ridge * I.
/// A pivot below kSingularPivot raises NumericalError; no regularization is
/// added behind the caller's back.
template <typename DerivedK, typename DerivedB>
Matrix<typename DerivedK::Scalar> solve_spd(const Eigen::MatrixBase<DerivedK> &k,
                                           typename DerivedK::Scalar ridge,
                                           const Eigen::MatrixBase<DerivedB> &b) {
    using Scalar = typename DerivedK::Scalar;
    require_square(k, "solve_spd");
    require_finite(k, "solve_spd");
    require_finite(b, "solve_spd");
    if (b.rows() != k.rows()) {
        throw std::invalid_argument("solve_spd: right-hand side has " + std::to_string(b.rows()) +
                                    " rows, system has " + std::to_string(k.rows()));
    }
    if (ridge < Scalar(0)) { throw std::invalid_argument("solve_spd: negative ridge"); }

    Matrix<Scalar> a = (k + k.transpose()) / Scalar(2);
    a.diagonal().array() += ridge;
    if (a.rows() == 0) { return Matrix<Scalar>(0, b.cols()); }

    Eigen::LDLT<Matrix<Scalar>> ldlt(a);
    const Scalar scale = std::max(Scalar(1), a.diagonal().cwiseAbs().maxCoeff());
    const auto pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() < Scalar(kSingularPivot) * scale) {
        throw NumericalError("solve_spd: singular or indefinite system (smallest pivot " +
                             std::to_string(static_cast<double>(pivots.minCoeff())) + ")");
    }
    return ldlt.solve(b);
}

/// Projects column-centered data onto its top-k principal axes. Output
/// columns are ordered by descending explained variance. When k exceeds the
/// data rank the trailing columns carry (near-)zero variance.
template <typename Derived>
Matrix<typename Derived::Scalar> pca_reduce(const Eigen::MatrixBase<Derived> &x, Index k) {
    using Scalar = typename Derived::Scalar;
    require_finite(x, "pca_reduce");
    if (x.rows() < 2) { throw std::invalid_argument("pca_reduce: need at least 2 rows"); }
    if (k < 0 || k > std::min(x.rows(), x.cols())) {
        throw std::invalid_argument("pca_reduce: k=" + std::to_string(k) +
                                    " exceeds min(rows, cols)");
    }
    const Matrix<Scalar> centered = x.rowwise() - x.colwise().mean();
    const Matrix<Scalar> cov =
        (centered.transpose() * centered) / static_cast<Scalar>(x.rows() - 1);
    const auto spec = sym_eig(cov);
    return centered * spec.eigenvectors.leftCols(k);
}

} // namespace qks
