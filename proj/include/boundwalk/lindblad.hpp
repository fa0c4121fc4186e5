#pragma once

#include "boundwalk/fock.hpp"
#include "boundwalk/dynamics.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <stdexcept>
#include <vector>

namespace boundwalk {

using DensityMatrix = Eigen::MatrixXcd;

inline void validate_density(const DensityMatrix& rho, double tol = 1e-8) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    if ((rho - rho.adjoint()).norm() > tol * std::max(1.0, rho.norm()))
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-6)
        throw std::invalid_argument("density matrix trace is not 1");
}

inline DensityMatrix pure_density(const QuantumState& psi) { return psi * psi.adjoint(); }

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Column-major flattening: vec(rho)_{(k-1)D+j} = rho_{jk}.
inline Eigen::VectorXcd vectorize(const DensityMatrix& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

inline DensityMatrix devectorize(const Eigen::VectorXcd& v) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != v.size()) throw std::invalid_argument("devectorize: length is not a perfect square");
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

constexpr int kDenseLiouvillianLimit = 60;

/// Dense superoperator of the dephasing master equation:
/// L = -i(1 (x) H - H^t (x) 1) + Gamma sum_j [n_j^t (x) n_j - (1 (x) n_j^2 + (n_j^2)^t (x) 1)/2].
inline Eigen::MatrixXcd build_liouvillian(const SectorOperator& H, double gamma,
                                          const FockBasis& basis) {
    const int D = basis.dim();
    if (H.rows() != D || H.cols() != D)
        throw std::invalid_argument("build_liouvillian: dimension mismatch");
    if (D > kDenseLiouvillianLimit)
        throw std::invalid_argument(
            "build_liouvillian: sector too large for a dense superoperator; use "
            "evolve_density's matrix-free path");
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(D, D);
    Eigen::MatrixXcd Lv = Complex(0, -1) * (kron(id, H) - kron(H.transpose(), id));
    for (int j = 1; j <= basis.sites(); ++j) {
        const SectorOperator n = number_operator(basis, j);
        const SectorOperator n2 = n * n;
        Lv += gamma * (kron(n.transpose(), n) - 0.5 * kron(id, n2) - 0.5 * kron(n2.transpose(), id));
    }
    return Lv;
}

namespace detail {

/// Right-hand side of the master equation applied directly to rho. The
/// dissipator is elementwise because every n_j is diagonal:
/// (D rho)_{ab} = -Gamma/2 sum_j (n_j(a) - n_j(b))^2 rho_{ab}.
class LindbladRhs {
public:
    LindbladRhs(const SectorOperator& H, double gamma, const FockBasis& basis)
        : H_(H) {
        const int D = basis.dim();
        damp_.resize(D, D);
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) {
                double s = 0.0;
                for (int j = 0; j < basis.sites(); ++j) {
                    const double diff = basis.state(a).occupations[static_cast<std::size_t>(j)] -
                                        basis.state(b).occupations[static_cast<std::size_t>(j)];
                    s += diff * diff;
                }
                damp_(a, b) = -0.5 * gamma * s;
            }
    }

    DensityMatrix operator()(const DensityMatrix& rho) const {
        DensityMatrix out = Complex(0, -1) * (H_ * rho - rho * H_);
        out.array() += damp_.array() * rho.array();
        return out;
    }

private:
    SectorOperator H_;
    Eigen::MatrixXd damp_;
};

/// Adaptive Dormand-Prince RK45 on density matrices.
inline DensityMatrix integrate_rk45(const LindbladRhs& rhs, DensityMatrix rho, double t_end,
                                    double rel_tol = 1e-8) {
    if (t_end == 0.0) return rho;
    static const double c[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1., 1.};
    static const double a[7][6] = {
        {},
        {1. / 5},
        {3. / 40, 9. / 40},
        {44. / 45, -56. / 15, 32. / 9},
        {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
        {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
        {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
    static const double b5[7] = {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84, 0.};
    static const double b4[7] = {5179. / 57600, 0.,           7571. / 16695, 393. / 640,
                                 -92097. / 339200, 187. / 2100, 1. / 40};
    (void)c;

    double t = 0.0;
    double h = t_end / 100.0;
    const double h_min = t_end * 1e-14;
    const double atol = 1e-12;
    DensityMatrix k[7];
    while (t < t_end) {
        if (t + h > t_end) h = t_end - t;
        k[0] = rhs(rho);
        for (int s = 1; s < 7; ++s) {
            DensityMatrix y = rho;
            for (int q = 0; q < s; ++q)
                if (a[s][q] != 0.0) y += (h * a[s][q]) * k[q];
            k[s] = rhs(y);
        }
        DensityMatrix y5 = rho;
        DensityMatrix err = DensityMatrix::Zero(rho.rows(), rho.cols());
        for (int s = 0; s < 7; ++s) {
            if (b5[s] != 0.0) y5 += (h * b5[s]) * k[s];
            const double d = b5[s] - b4[s];
            if (d != 0.0) err += (h * d) * k[s];
        }
        const double scale = atol + rel_tol * std::max(rho.norm(), y5.norm());
        const double e = err.norm() / scale;
        if (e <= 1.0) {
            t += h;
            rho = std::move(y5);
        }
        const double factor = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, factor));
        if (h < h_min)
            throw std::runtime_error("evolve_density: integrator step-size underflow");
    }
    return rho;
}

}  // namespace detail

/// Solves the dephasing master equation for rho(t). Dense-superoperator
/// exponential for D <= 60, matrix-free adaptive integration otherwise.
inline DensityMatrix evolve_density(const SectorOperator& H, double gamma, const FockBasis& basis,
                                    const DensityMatrix& rho0, double t, double rel_tol = 1e-8) {
    validate_density(rho0);
    if (t == 0.0) return rho0;
    const int D = basis.dim();
    if (D <= kDenseLiouvillianLimit) {
        const Eigen::MatrixXcd Lv = build_liouvillian(H, gamma, basis);
        const Eigen::MatrixXcd propagator = (t * Lv).exp();
        return devectorize(propagator * vectorize(rho0));
    }
    return detail::integrate_rk45(detail::LindbladRhs(H, gamma, basis), rho0, t, rel_tol);
}

/// Matrix-free trajectory regardless of dimension (for dual-path checks).
inline DensityMatrix evolve_density_matrixfree(const SectorOperator& H, double gamma,
                                               const FockBasis& basis, const DensityMatrix& rho0,
                                               double t, double rel_tol = 1e-8) {
    validate_density(rho0);
    return detail::integrate_rk45(detail::LindbladRhs(H, gamma, basis), rho0, t, rel_tol);
}

struct DephasingPoint {
    double gamma = 0.0;
    double p_target = 0.0;
    double relative_variation = 0.0;
};

/// Sweeps the dephasing rate at the fixed Gamma = 0 transfer time t_star and
/// reports |P(Gamma) - P(0)| / P(0) for the target bound-state population.
inline std::vector<DephasingPoint> dephasing_sweep(const SectorOperator& H, const FockBasis& basis,
                                                   const QuantumState& psi0, int target_index,
                                                   double t_star,
                                                   const std::vector<double>& gamma_list) {
    const DensityMatrix rho0 = pure_density(psi0);
    std::vector<DephasingPoint> out;
    const DensityMatrix base = evolve_density(H, 0.0, basis, rho0, t_star);
    const double p0 = base(target_index, target_index).real();
    for (double g : gamma_list) {
        if (g < 0) throw std::invalid_argument("dephasing_sweep: negative rate");
        DephasingPoint pt;
        pt.gamma = g;
        if (g == 0.0) {
            pt.p_target = p0;
            pt.relative_variation = 0.0;
        } else {
            const DensityMatrix rho = evolve_density(H, g, basis, rho0, t_star);
            pt.p_target = rho(target_index, target_index).real();
            pt.relative_variation = std::abs(pt.p_target - p0) / p0;
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace boundwalk
