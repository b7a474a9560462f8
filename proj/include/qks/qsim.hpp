#pragma once

// Dense statevector simulation for the Hamiltonian-evolution feature map.
//
// Qubit 0 is the most significant bit of the amplitude index. Coupling acts
// on adjacent pairs (j, j + 1) with open boundary: n features drive the n
// pairs of an (n + 1)-qubit chain.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qks/random.hpp"

namespace qks {

template <typename Real = double>
class Statevector {
  public:
    using Complex = std::complex<Real>;
    using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

    /// Norm deviation tolerated on construction.
    static constexpr double kNormTolerance = 1e-10;

    explicit Statevector(Amplitudes amplitudes) : amps_(std::move(amplitudes)) {
        qubits_ = qubits_for(amps_.size());
        const Real deviation = std::abs(amps_.norm() - Real(1));
        if (!(deviation <= Real(kNormTolerance))) {
            throw std::invalid_argument("Statevector: amplitudes are not unit norm");
        }
    }

    /// Normalizes arbitrary nonzero amplitudes.
    static Statevector normalized(Amplitudes amplitudes) {
        const Real n = amplitudes.norm();
        if (!(n > Real(0))) { throw std::invalid_argument("Statevector: zero vector"); }
        amplitudes /= n;
        return Statevector(std::move(amplitudes));
    }

    /// Computational basis state |index>.
    static Statevector basis(int qubit_count, std::uint64_t index) {
        if (qubit_count < 1 || qubit_count > 30) {
            throw std::invalid_argument("Statevector: qubit count out of range");
        }
        const Eigen::Index dim = Eigen::Index{1} << qubit_count;
        if (index >= static_cast<std::uint64_t>(dim)) {
            throw std::invalid_argument("Statevector: basis index out of range");
        }
        Amplitudes amps = Amplitudes::Zero(dim);
        amps(static_cast<Eigen::Index>(index)) = Complex(1);
        return Statevector(std::move(amps));
    }

    [[nodiscard]] int qubit_count() const { return qubits_; }
    [[nodiscard]] Eigen::Index dimension() const { return amps_.size(); }
    [[nodiscard]] const Amplitudes &amplitudes() const { return amps_; }
    [[nodiscard]] Real norm() const { return amps_.norm(); }

    /// Applies exp(-i theta (X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1})) in place.
    void apply_xyz(int j, Real theta);

    /// Exact amplitude-wise equality.
    bool operator==(const Statevector &other) const {
        return amps_.size() == other.amps_.size() && amps_ == other.amps_;
    }

  private:
    static int qubits_for(Eigen::Index size) {
        if (size < 2 || (size & (size - 1)) != 0) {
            throw std::invalid_argument("Statevector: length " + std::to_string(size) +
                                        " is not a power of two >= 2");
        }
        int q = 0;
        while ((Eigen::Index{1} << q) < size) { ++q; }
        return q;
    }

    Amplitudes amps_;
    int qubits_ = 0;
};

template <typename Real>
void Statevector<Real>::apply_xyz(int j, Real theta) {
    if (j < 0 || j + 1 >= qubits_) {
        throw std::out_of_range("apply_xyz_evolution: pair (" + std::to_string(j) + ", " +
                                std::to_string(j + 1) + ") outside " + std::to_string(qubits_) +
                                "-qubit register");
    }
    // H = 2 SWAP - I, so exp(-i theta H) = e^{i theta} (cos 2theta I - i sin 2theta SWAP):
    // the triplet picks up e^{-i theta}, the singlet e^{+3 i theta}.
    const Complex triplet = std::polar(Real(1), -theta);
    const Complex global = std::polar(Real(1), theta);
    const Complex keep = global * std::cos(Real(2) * theta);
    const Complex swap = global * Complex(0, -std::sin(Real(2) * theta));

    const Eigen::Index hi = Eigen::Index{1} << (qubits_ - 1 - j);
    const Eigen::Index lo = hi >> 1;
    const Eigen::Index dim = amps_.size();
    for (Eigen::Index base = 0; base < dim; ++base) {
        if ((base & (hi | lo)) != 0) { continue; }
        const Eigen::Index i01 = base | lo;
        const Eigen::Index i10 = base | hi;
        const Eigen::Index i11 = base | hi | lo;
        const Complex a01 = amps_(i01);
        const Complex a10 = amps_(i10);
        amps_(base) *= triplet;
        amps_(i11) *= triplet;
        amps_(i01) = keep * a01 + swap * a10;
        amps_(i10) = keep * a10 + swap * a01;
    }
}

/// Pure-function form of Statevector::apply_xyz.
template <typename Real>
Statevector<Real> apply_xyz_evolution(Statevector<Real> state, int j, Real theta) {
    state.apply_xyz(j, theta);
    return state;
}

/// Tensor product of independent Haar-random single-qubit states. Each factor
/// is a pair of standard complex Gaussians, normalized.
template <typename Real = double>
Statevector<Real> haar_product_state(int qubit_count, std::uint64_t seed) {
    if (qubit_count < 1 || qubit_count > 30) {
        throw std::invalid_argument("haar_product_state: qubit count out of range");
    }
    using Complex = std::complex<Real>;
    using Amplitudes = typename Statevector<Real>::Amplitudes;
    Rng rng(seed);
    Amplitudes amps(1);
    amps(0) = Complex(1);
    for (int q = 0; q < qubit_count; ++q) {
        Complex f0(static_cast<Real>(rng.normal()), static_cast<Real>(rng.normal()));
        Complex f1(static_cast<Real>(rng.normal()), static_cast<Real>(rng.normal()));
        const Real n = std::sqrt(std::norm(f0) + std::norm(f1));
        f0 /= n;
        f1 /= n;
        // Earlier qubits are more significant.
        Amplitudes next(amps.size() * 2);
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            next(2 * i) = amps(i) * f0;
            next(2 * i + 1) = amps(i) * f1;
        }
        amps = std::move(next);
    }
    return Statevector<Real>::normalized(std::move(amps));
}

struct FeatureMapConfig {
    int feature_count = 8;
    double bandwidth = 0.5;  // total evolution time t
    int trotter_steps = 10;  // T
    std::uint64_t haar_seed = 0;

    [[nodiscard]] int qubit_count() const { return feature_count + 1; }

    void validate() const {
        if (feature_count < 1 || feature_count > 24) {
            throw std::invalid_argument("FeatureMapConfig: feature_count must be in [1, 24]");
        }
        if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
            throw std::invalid_argument("FeatureMapConfig: bandwidth t must be positive");
        }
        if (trotter_steps < 1) {
            throw std::invalid_argument("FeatureMapConfig: trotter_steps T must be positive");
        }
    }

    bool operator==(const FeatureMapConfig &) const = default;
};

/// Hamiltonian-evolution embedding with the initial Haar state shared by all
/// data points of one configuration.
template <typename Real = double>
class FeatureMap {
  public:
    explicit FeatureMap(const FeatureMapConfig &config)
        : config_((config.validate(), config)),
          initial_(haar_product_state<Real>(config.qubit_count(), config.haar_seed)) {}

    [[nodiscard]] const FeatureMapConfig &config() const { return config_; }
    [[nodiscard]] const Statevector<Real> &initial_state() const { return initial_; }

    /// T repetitions of the ordered product over j = 0..n-1 of
    /// exp(-i (t/T) x_j H_j^{XYZ}).
    template <typename Derived>
    [[nodiscard]] Statevector<Real> embed(const Eigen::MatrixBase<Derived> &x) const {
        if (x.size() != config_.feature_count) {
            throw std::invalid_argument("embed: feature vector has length " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(config_.feature_count));
        }
        if (!x.allFinite()) { throw std::invalid_argument("embed: non-finite feature"); }
        Statevector<Real> state = initial_;
        const Real step = static_cast<Real>(config_.bandwidth / config_.trotter_steps);
        for (int rep = 0; rep < config_.trotter_steps; ++rep) {
            for (int j = 0; j < config_.feature_count; ++j) {
                state.apply_xyz(j, step * static_cast<Real>(x(j)));
            }
        }
        return state;
    }

  private:
    FeatureMapConfig config_;
    Statevector<Real> initial_;
};

template <typename Real = double, typename Derived>
Statevector<Real> embed(const Eigen::MatrixBase<Derived> &x, const FeatureMapConfig &config) {
    return FeatureMap<Real>(config).embed(x);
}

/// |<a|b>|^2, clamped to [0, 1].
template <typename Real>
Real fidelity(const Statevector<Real> &a, const Statevector<Real> &b) {
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    const Real f = std::norm(a.amplitudes().dot(b.amplitudes()));
    return std::clamp(f, Real(0), Real(1));
}

} // namespace qks
