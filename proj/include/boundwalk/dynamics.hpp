#pragma once

#include "boundwalk/fock.hpp"
#include "boundwalk/effective.hpp"
#include "boundwalk/optimize.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <functional>
#include <vector>

namespace boundwalk {

using QuantumState = Eigen::VectorXcd;

/// Eigendecomposition of a Hermitian Hamiltonian, cached for repeated
/// time-evolution queries.
class SpectralCache {
public:
    explicit SpectralCache(const Eigen::MatrixXcd& H, double hermiticity_tol = 1e-9) {
        const double defect = (H - H.adjoint()).norm();
        const double scale = std::max(1.0, H.norm());
        if (defect > hermiticity_tol * scale)
            throw std::invalid_argument("SpectralCache: Hamiltonian is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }
    explicit SpectralCache(const Eigen::MatrixXd& H)
        : SpectralCache(Eigen::MatrixXcd(H.cast<Complex>())) {}
    explicit SpectralCache(const EffectiveChain& chain) : SpectralCache(chain.matrix()) {}

    int dim() const { return static_cast<int>(evals_.size()); }
    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    const Eigen::MatrixXcd& eigenvectors() const { return evecs_; }

    QuantumState evolve(const QuantumState& psi0, double t) const {
        const Eigen::VectorXcd c = evecs_.adjoint() * psi0;
        return evecs_ * (Eigen::exp(Complex(0, -t) * evals_.array().cast<Complex>()) * c.array()).matrix();
    }

    /// Spectral coefficients of psi0, for repeated amplitude queries.
    Eigen::VectorXcd coefficients(const QuantumState& psi0) const { return evecs_.adjoint() * psi0; }

    /// Amplitude <row| psi(t)> given coefficients c = V^dag psi0. O(D).
    Complex amplitude(int row, const Eigen::VectorXcd& c, double t) const {
        Complex a = 0.0;
        for (int k = 0; k < dim(); ++k)
            a += evecs_(row, k) * std::exp(Complex(0, -t * evals_(k))) * c(k);
        return a;
    }

private:
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

inline QuantumState evolve(const SpectralCache& cache, const QuantumState& psi0, double t) {
    return cache.evolve(psi0, t);
}

inline QuantumState bound_state(const FockBasis& basis, int site) {
    QuantumState psi = QuantumState::Zero(basis.dim());
    psi(basis.bound_index(site)) = 1.0;
    return psi;
}

/// Probability of the multiset occupation pattern given by `sites` (1-based,
/// |sites| = M). With the symmetry-normalized definition this is exactly the
/// squared amplitude of the matching Fock state.
inline double joint_probability(const QuantumState& psi, const FockBasis& basis,
                                const std::vector<int>& sites) {
    if (static_cast<int>(sites.size()) != basis.particles())
        throw std::invalid_argument("joint_probability: need exactly M site labels");
    std::vector<int> occ(static_cast<std::size_t>(basis.sites()), 0);
    for (int s : sites) {
        basis.check_site(s);
        ++occ[static_cast<std::size_t>(s - 1)];
    }
    return std::norm(psi(basis.index_of(occ)));
}

/// Time and value of the global maximum of `objective` on [0, t_max]:
/// dense scan refined by golden section, earliest tie wins.
inline std::pair<double, double> scan_peak(const std::function<double(double)>& objective,
                                           double t_max, int scan_points = 2000) {
    if (t_max <= 0) throw std::invalid_argument("scan_peak: empty window");
    const double dt = t_max / scan_points;
    int best = 0;
    double best_val = objective(0.0);
    for (int i = 1; i <= scan_points; ++i) {
        const double v = objective(i * dt);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = std::max(0.0, (best - 1) * dt);
    const double hi = std::min(t_max, (best + 1) * dt);
    auto [t_star, val] = golden_section_max(objective, lo, hi, dt * 1e-6);
    if (best_val >= val) return {best * dt, best_val};
    return {t_star, val};
}

/// Earliest local maximum of `objective` on [0, t_max] whose height is at
/// least `rel_threshold` of the global maximum, golden-refined. This is the
/// first-arrival time of a wave packet: with a splitting barrier the global
/// maximum sits on a later multi-pass revival, not on the arrival peak.
inline std::pair<double, double> first_arrival_peak(const std::function<double(double)>& objective,
                                                    double t_max, int scan_points = 2000,
                                                    double rel_threshold = 0.25) {
    if (t_max <= 0) throw std::invalid_argument("first_arrival_peak: empty window");
    const double dt = t_max / scan_points;
    std::vector<double> f(static_cast<std::size_t>(scan_points) + 1);
    double global = 0.0;
    for (int i = 0; i <= scan_points; ++i) {
        f[static_cast<std::size_t>(i)] = objective(i * dt);
        global = std::max(global, f[static_cast<std::size_t>(i)]);
    }
    // a candidate must dominate a neighborhood wide enough to span the fast
    // interaction-scale ripples riding on the wave-packet envelope
    const int w = std::max(1, scan_points / 50);
    for (int i = 1; i < scan_points; ++i) {
        const double v = f[static_cast<std::size_t>(i)];
        if (v < rel_threshold * global) continue;
        bool dominant = true;
        for (int k = std::max(0, i - w); k <= std::min(scan_points, i + w); ++k)
            if (f[static_cast<std::size_t>(k)] > v) {
                dominant = false;
                break;
            }
        if (dominant) {
            auto [t_star, val] =
                golden_section_max(objective, std::max(0.0, (i - 1) * dt),
                                   std::min(t_max, (i + 1) * dt), dt * 1e-6);
            if (v >= val) return {i * dt, v};
            return {t_star, val};
        }
    }
    // monotone tail: the maximum sits at the window edge
    return {t_max, f.back()};
}

/// Transfer time: maximum of |<target| psi(t)>|^2 over [0, t_max].
inline std::pair<double, double> transfer_time(const SpectralCache& cache, const QuantumState& psi0,
                                               int target_index, double t_max,
                                               int scan_points = 2000) {
    const Eigen::VectorXcd c = cache.coefficients(psi0);
    auto obj = [&](double t) { return std::norm(cache.amplitude(target_index, c, t)); };
    return scan_peak(obj, t_max, scan_points);
}

/// First-arrival analog of transfer_time (see first_arrival_peak).
inline std::pair<double, double> arrival_time(const SpectralCache& cache, const QuantumState& psi0,
                                              int target_index, double t_max,
                                              int scan_points = 2000) {
    const Eigen::VectorXcd c = cache.coefficients(psi0);
    auto obj = [&](double t) { return std::norm(cache.amplitude(target_index, c, t)); };
    return first_arrival_peak(obj, t_max, scan_points);
}

}  // namespace boundwalk
