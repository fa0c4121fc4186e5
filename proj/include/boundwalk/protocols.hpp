#pragma once

#include "boundwalk/dynamics.hpp"
#include "boundwalk/effective.hpp"
#include "boundwalk/fock.hpp"
#include "boundwalk/lattice.hpp"
#include "boundwalk/lindblad.hpp"
#include "boundwalk/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace boundwalk {

struct ExperimentConfig {
    int L = 5;
    int M = 2;
    double J = 1.0;
    double U = 5.0;
    std::vector<SchemeDescriptor> schemes;
    double gamma = 0.0;
    double window_factor = 2.0;  // scan window = factor * L / J_eff
    int scan_points = 2000;
    OnsiteConvention convention = OnsiteConvention::NMinusOne;
    bool literal_phase_segment = false;  // run the frozen-lattice segment instead
    double beta_L = 1.0;                 // endpoint field of the frozen segment

    void validate() const {
        if (L < 2) throw std::invalid_argument("config: L must be >= 2");
        if (M < 1 || M > 3) throw std::invalid_argument("config: M must be in {1,2,3}");
        if (J < 0) throw std::invalid_argument("config: J must be >= 0");
        if (M > 1 && U <= 0) throw std::invalid_argument("config: U must be > 0 for bound states");
    }
};

/// Closed-form effective hopping scale used for time windows.
inline double effective_hopping_scale(int M, double J, double U) {
    if (M == 1) return 0.5 * J;  // single-particle off-diagonal is J/2
    if (M == 2) return J * J / (2.0 * U);
    if (M == 3) return 3.0 * J * J * J / (16.0 * U * U);
    throw std::invalid_argument("effective_hopping_scale: M outside {1,2,3}");
}

inline double scan_window(const ExperimentConfig& cfg) {
    return cfg.window_factor * cfg.L / effective_hopping_scale(cfg.M, cfg.J, cfg.U);
}

/// Assembled sector problem shared by the protocol drivers.
struct Assembled {
    FockBasis basis;
    LatticeParams params;
    SectorOperator H;
    SpectralCache cache;
    QuantumState psi0;  // |{M}, 1>

    Assembled(const ExperimentConfig& cfg, const std::vector<SchemeDescriptor>& schemes)
        : basis(cfg.L, cfg.M),
          params(apply_scheme(LatticeParams::uniform(cfg.L, cfg.J, cfg.U), schemes)),
          H(build_hamiltonian(basis, params, cfg.convention)),
          cache(H),
          psi0(bound_state(basis, 1)) {}
    explicit Assembled(const ExperimentConfig& cfg) : Assembled(cfg, cfg.schemes) {}
};

inline std::vector<int> repeated_site(int site, int M) { return std::vector<int>(static_cast<std::size_t>(M), site); }

struct TransferSample {
    double t = 0.0;
    double p_first = 0.0;
    double p_last = 0.0;
};

struct TransferReport {
    double t_star = 0.0;
    double p_first = 0.0;  // P_{1..1}(t*)
    double p_last = 0.0;   // P_{L..L}(t*)
    std::vector<TransferSample> series;
};

/// Bound-particle transfer from site 1: locates the arrival peak of
/// P_{L..L}(t) and records the endpoint time series.
inline TransferReport run_transfer(const ExperimentConfig& cfg) {
    cfg.validate();
    Assembled sys(cfg);
    const int first = sys.basis.bound_index(1);
    const int last = sys.basis.bound_index(cfg.L);
    const Eigen::VectorXcd c = sys.cache.coefficients(sys.psi0);

    const double window = scan_window(cfg);
    auto [t_star, p_last] =
        transfer_time(sys.cache, sys.psi0, last, window, cfg.scan_points);

    TransferReport rep;
    rep.t_star = t_star;
    rep.p_last = p_last;
    rep.p_first = std::norm(sys.cache.amplitude(first, c, t_star));
    rep.series.reserve(static_cast<std::size_t>(cfg.scan_points) + 1);
    for (int i = 0; i <= cfg.scan_points; ++i) {
        const double t = window * i / cfg.scan_points;
        rep.series.push_back({t, std::norm(sys.cache.amplitude(first, c, t)),
                              std::norm(sys.cache.amplitude(last, c, t))});
    }
    return rep;
}

struct EdgeFieldResult {
    double beta_prime = 0.0;
    double p_target = 0.0;
    bool degenerate = false;  // flat objective (no dynamics to optimize)
};

/// Numerically maximizes P_{L..L}(t*) over the edge field, re-scanning t* per
/// candidate. The config's scheme stack must not already contain edge fields.
inline EdgeFieldResult optimize_edge_field(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.M != 2 && cfg.M != 3)
        throw std::invalid_argument("optimize_edge_field: M outside {2,3}");
    const double window = scan_window(cfg);
    double seen_min = 1.0;
    double seen_max = 0.0;
    auto objective = [&](double beta_prime) {
        auto schemes = cfg.schemes;
        schemes.push_back(SchemeDescriptor::edge_unlocked(beta_prime));
        Assembled sys(cfg, schemes);
        auto [t_star, p] = transfer_time(sys.cache, sys.psi0, sys.basis.bound_index(cfg.L),
                                         window, cfg.scan_points);
        (void)t_star;
        seen_min = std::min(seen_min, p);
        seen_max = std::max(seen_max, p);
        return p;
    };
    const double hi = cfg.J * cfg.J / cfg.U;
    EdgeFieldResult res;
    if (hi <= 0.0) {
        res.degenerate = true;
        res.p_target = objective(0.0);
        return res;
    }
    auto [beta, p] = golden_section_max(objective, 0.0, hi, 1e-3 * hi);
    res.beta_prime = beta;
    res.p_target = p;
    res.degenerate = (seen_max - seen_min) < 1e-12;
    return res;
}

struct SplitFieldResult {
    double beta = 0.0;
    double balance_residual = 0.0;  // P_first - P_last at the returned beta
    double t_star = 0.0;
};

/// Balance residual P_{1..1}(t*) - P_{L..L}(t*) for a given mid-chain field,
/// with t* the arrival peak of P_{L..L}.
inline double split_balance_residual(const ExperimentConfig& cfg, double beta,
                                     double* t_star_out = nullptr) {
    auto schemes = cfg.schemes;
    schemes.push_back(SchemeDescriptor::split_impurity(beta));
    Assembled sys(cfg, schemes);
    const int first = sys.basis.bound_index(1);
    const int last = sys.basis.bound_index(cfg.L);
    auto [t_star, p_last] =
        arrival_time(sys.cache, sys.psi0, last, scan_window(cfg), cfg.scan_points);
    const Eigen::VectorXcd c = sys.cache.coefficients(sys.psi0);
    const double p_first = std::norm(sys.cache.amplitude(first, c, t_star));
    if (t_star_out) *t_star_out = t_star;
    return p_first - p_last;
}

/// Finds the balanced splitting field by bisection on the balance residual.
/// Unlocking fields must already be part of the config's scheme stack.
inline SplitFieldResult optimize_split_field(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.M != 2 && cfg.M != 3)
        throw std::invalid_argument("optimize_split_field: M outside {2,3}");
    const double scale = cfg.M == 2 ? cfg.J * cfg.J / cfg.U
                                    : cfg.J * cfg.J * cfg.J / (cfg.U * cfg.U);
    auto residual = [&](double beta) { return split_balance_residual(cfg, beta); };
    const double lo = 1e-4 * scale;
    const double hi = 2.0 * scale;
    const double beta = scan_and_bisect(residual, lo, hi, 24, 1e-4 * scale);
    SplitFieldResult res;
    res.beta = beta;
    res.balance_residual = split_balance_residual(cfg, beta, &res.t_star);
    return res;
}

/// Least-squares coefficient alpha of beta^{50/50} = alpha J^M / U^{M-1}
/// across the given interaction values.
inline double fit_splitting_coefficient(const ExperimentConfig& base,
                                        const std::vector<double>& u_values) {
    double num = 0.0;
    double den = 0.0;
    for (double u : u_values) {
        ExperimentConfig cfg = base;
        cfg.U = u;
        cfg.schemes.clear();
        cfg.schemes.push_back(
            SchemeDescriptor::edge_unlocked(edge_unlock_field(cfg.M, cfg.J, cfg.U)));
        const double beta = optimize_split_field(cfg).beta;
        const double x = std::pow(cfg.J, cfg.M) / std::pow(u, cfg.M - 1);
        num += beta * x;
        den += x * x;
    }
    return num / den;
}

struct SplitReport {
    double beta = 0.0;
    double t_star = 0.0;
    double p_first = 0.0;
    double p_last = 0.0;
    double balance_residual = 0.0;
    std::vector<std::pair<std::string, double>> mixed;  // endpoint mixed terms at t*
    std::vector<double> times;
    std::vector<std::vector<double>> series;  // columns: first, last, mixed...
    std::vector<std::string> labels;
};

/// NOON generation run: evolves through the splitter and reports endpoint and
/// mixed-term probabilities at the arrival time.
inline SplitReport run_noon(const ExperimentConfig& cfg) {
    cfg.validate();
    Assembled sys(cfg);
    const int L = cfg.L;
    SplitReport rep;
    for (const auto& s : cfg.schemes)
        if (s.kind == SchemeKind::SplitImpurity) rep.beta = s.beta;

    // endpoint multisets: (M,0), (0,M) and the mixed occupations of sites 1, L
    std::vector<std::vector<int>> patterns;
    std::vector<std::string> labels;
    for (int k = cfg.M; k >= 0; --k) {
        std::vector<int> occ(static_cast<std::size_t>(L), 0);
        occ[0] = k;
        occ[static_cast<std::size_t>(L - 1)] = cfg.M - k;
        patterns.push_back(occ);
        std::string lab = "P_";
        for (int i = 0; i < k; ++i) lab += "1";
        for (int i = 0; i < cfg.M - k; ++i) lab += "L";
        labels.push_back(lab);
    }
    std::vector<int> idx;
    for (const auto& occ : patterns) idx.push_back(sys.basis.index_of(occ));

    const double window = scan_window(cfg);
    auto [t_star, p_last] =
        arrival_time(sys.cache, sys.psi0, sys.basis.bound_index(L), window, cfg.scan_points);
    const Eigen::VectorXcd c = sys.cache.coefficients(sys.psi0);

    rep.t_star = t_star;
    rep.p_first = std::norm(sys.cache.amplitude(idx.front(), c, t_star));
    rep.p_last = p_last;
    rep.balance_residual = rep.p_first - rep.p_last;
    for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        rep.mixed.emplace_back(labels[k], std::norm(sys.cache.amplitude(idx[k], c, t_star)));

    rep.labels = labels;
    for (int i = 0; i <= cfg.scan_points; ++i) {
        const double t = window * i / cfg.scan_points;
        rep.times.push_back(t);
        std::vector<double> row;
        for (int j : idx) row.push_back(std::norm(sys.cache.amplitude(j, c, t)));
        rep.series.push_back(row);
    }
    return rep;
}

/// Endpoint phase unitary: multiplies each amplitude by exp(i n_L phi),
/// the diagonal action of the frozen-lattice segment H' with phi = beta_L t'.
inline QuantumState apply_endpoint_phase(const QuantumState& psi, const FockBasis& basis,
                                         double phi) {
    QuantumState out = psi;
    const std::size_t last = static_cast<std::size_t>(basis.sites() - 1);
    for (int i = 0; i < basis.dim(); ++i) {
        const int nL = basis.state(i).occupations[last];
        out(i) *= std::exp(Complex(0, phi * nL));
    }
    return out;
}

/// Literal frozen-lattice phase segment: evolution under the diagonal
/// H' = sum_j U n_j(n_j - 1) - beta_L n_L for t' = phi / beta_L. On the
/// endpoint subspace this reduces to apply_endpoint_phase up to a phase
/// common to |M,0> and |0,M>.
inline QuantumState apply_frozen_segment(const QuantumState& psi, const FockBasis& basis,
                                         double phi, double U, double beta_L) {
    if (beta_L == 0.0) throw std::invalid_argument("apply_frozen_segment: beta_L must be nonzero");
    const double t_prime = phi / beta_L;
    QuantumState out = psi;
    const std::size_t last = static_cast<std::size_t>(basis.sites() - 1);
    for (int i = 0; i < basis.dim(); ++i) {
        double diag = 0.0;
        for (int n : basis.state(i).occupations) diag += U * n * (n - 1.0);
        diag -= beta_L * basis.state(i).occupations[last];
        out(i) *= std::exp(Complex(0, -t_prime * diag));
    }
    return out;
}

inline QuantumState apply_phase(const QuantumState& psi, const FockBasis& basis, double phi,
                                const ExperimentConfig& cfg) {
    return cfg.literal_phase_segment
               ? apply_frozen_segment(psi, basis, phi, cfg.U, cfg.beta_L)
               : apply_endpoint_phase(psi, basis, phi);
}

/// Probability of finding k of the M particles at the input port of an ideal
/// 50/50 beam splitter fed with all M particles in one port: C(M,k) / 2^M.
inline std::vector<double> ideal_splitter_distribution(int M) {
    std::vector<double> p;
    double c = 1.0;
    for (int k = 0; k <= M; ++k) {
        p.push_back(c / std::pow(2.0, M));
        c = c * (M - k) / (k + 1);
    }
    std::reverse(p.begin(), p.end());  // order: k = M particles at port 1 first
    return p;
}

struct FringeScan {
    std::vector<double> phi;
    std::vector<double> probability;
    std::vector<double> ideal;
    double t_star = 0.0;
    double t_second = 0.0;  // second-pass duration
};

inline double ideal_mach_zehnder(double phi, int N) {
    const double s = std::sin(0.5 * N * phi);
    return s * s;  // |1 - e^{iN phi}|^2 / 4
}

/// Ideal lossless curve for the interaction-quench readout.
inline double ideal_quench_curve(double phi, int N) {
    const double s = std::sin(N * phi);
    return 2.0 * (s - 1.0) / (s - 3.0);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
}

/// Mach-Zehnder fringes: split for t*, endpoint phase, second pass of equal
/// duration, then P_{1..1} per phase value.
inline FringeScan mach_zehnder_fringes(const ExperimentConfig& cfg,
                                       const std::vector<double>& phi_grid) {
    cfg.validate();
    Assembled sys(cfg);
    const int first = sys.basis.bound_index(1);
    auto [t_star, p_last] = arrival_time(sys.cache, sys.psi0, sys.basis.bound_index(cfg.L),
                                         scan_window(cfg), cfg.scan_points);
    (void)p_last;
    const QuantumState psi_split = sys.cache.evolve(sys.psi0, t_star);

    FringeScan scan;
    scan.phi = phi_grid;
    scan.t_star = t_star;
    scan.t_second = t_star;
    for (double phi : phi_grid) {
        const QuantumState shifted = apply_phase(psi_split, sys.basis, phi, cfg);
        const Eigen::VectorXcd c = sys.cache.coefficients(shifted);
        scan.probability.push_back(std::norm(sys.cache.amplitude(first, c, t_star)));
        scan.ideal.push_back(ideal_mach_zehnder(phi, cfg.M));
    }
    return scan;
}

/// Balanced splitting barrier for a single free particle on an L-site chain
/// with hopping J (effective beam splitter of the quenched readout).
inline double free_particle_balanced_barrier(int L, double J, int scan_points = 2000) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
    for (int j = 0; j < L - 1; ++j) H(j, j + 1) = H(j + 1, j) = -0.5 * J;
    const int mid = split_site(L) - 1;
    auto residual = [&](double beta) {
        Eigen::MatrixXd Hb = H;
        Hb(mid, mid) += beta;  // mu = -beta  =>  +beta n
        SpectralCache cache(Hb);
        QuantumState psi0 = QuantumState::Zero(L);
        psi0(0) = 1.0;
        auto [t_star, pL] = arrival_time(cache, psi0, L - 1, 4.0 * L / J, scan_points);
        const Eigen::VectorXcd c = cache.coefficients(psi0);
        return std::norm(cache.amplitude(0, c, t_star)) - pL;
    };
    return scan_and_bisect(residual, 1e-3 * J, 2.0 * J, 24, 1e-5 * J);
}

/// Interaction-quench detection (M = 2): split, endpoint phase, then free
/// propagation (U = 0) through a barrier re-balanced for free particles;
/// reports P_1L at the free arrival time against the ideal curve.
inline FringeScan quench_detection(const ExperimentConfig& cfg,
                                   const std::vector<double>& phi_grid) {
    cfg.validate();
    if (cfg.M != 2) throw std::invalid_argument("quench_detection: requires M = 2");
    Assembled sys(cfg);
    auto [t_star, p_last] = arrival_time(sys.cache, sys.psi0, sys.basis.bound_index(cfg.L),
                                         scan_window(cfg), cfg.scan_points);
    (void)p_last;
    const QuantumState psi_split = sys.cache.evolve(sys.psi0, t_star);

    // free second pass: U = 0, same J, barrier balanced for free particles
    const double beta_free = free_particle_balanced_barrier(cfg.L, cfg.J, cfg.scan_points);
    LatticeParams free_params = LatticeParams::uniform(cfg.L, cfg.J, 0.0);
    free_params = apply_scheme(free_params, SchemeDescriptor::split_impurity(beta_free));
    const SectorOperator H_free = build_hamiltonian(sys.basis, free_params, cfg.convention);
    SpectralCache free_cache(H_free);

    std::vector<int> occ_11(static_cast<std::size_t>(cfg.L), 0);
    occ_11[0] = 1;
    occ_11[static_cast<std::size_t>(cfg.L - 1)] = 1;
    const int idx_11 = sys.basis.index_of(occ_11);

    // arrival time from the reference phases where the ideal curve peaks
    auto endpoint_pair = [&](double phi, double t) {
        const QuantumState shifted = apply_phase(psi_split, sys.basis, phi, cfg);
        const Eigen::VectorXcd c = free_cache.coefficients(shifted);
        return std::norm(free_cache.amplitude(idx_11, c, t));
    };
    const double pi = std::acos(-1.0);
    auto [t2, peak] = first_arrival_peak(
        [&](double t) { return endpoint_pair(-pi / 4, t) + endpoint_pair(pi / 4, t); },
        4.0 * cfg.L / cfg.J, cfg.scan_points);
    (void)peak;

    FringeScan scan;
    scan.phi = phi_grid;
    scan.t_star = t_star;
    scan.t_second = t2;
    for (double phi : phi_grid) {
        scan.probability.push_back(endpoint_pair(phi, t2));
        scan.ideal.push_back(ideal_quench_curve(phi, cfg.M));
    }
    return scan;
}

struct FisherReport {
    double f_q = 0.0;
    double delta_phi = 0.0;
    double classical_bound = 0.0;  // 1/sqrt(M)
    double quantum_bound = 0.0;    // 1/M
    double t_star = 0.0;
};

inline double fisher_from_variance(const QuantumState& psi, const FockBasis& basis) {
    const std::size_t last = static_cast<std::size_t>(basis.sites() - 1);
    double m1 = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < basis.dim(); ++i) {
        const double n = basis.state(i).occupations[last];
        const double p = std::norm(psi(i));
        m1 += p * n;
        m2 += p * n * n;
    }
    return 4.0 * (m2 - m1 * m1);
}

/// Quantum Fisher information from the overlap-derivative definition, by
/// central finite differences of psi(phi) = exp(i n_L phi) psi.
inline double fisher_from_derivative(const QuantumState& psi, const FockBasis& basis, double phi,
                                     double step = 1e-5) {
    const QuantumState plus = apply_endpoint_phase(psi, basis, phi + step);
    const QuantumState minus = apply_endpoint_phase(psi, basis, phi - step);
    const QuantumState centre = apply_endpoint_phase(psi, basis, phi);
    const QuantumState deriv = (plus - minus) / (2.0 * step);
    const double norm2 = deriv.squaredNorm();
    const Complex overlap = deriv.dot(centre);  // <deriv|centre>
    return 4.0 * (norm2 - std::norm(overlap));
}

/// Phase-estimation figure of merit of the generated NOON state. The phase
/// value does not change F_Q (the phase generator commutes with n_L) but is
/// accepted to define psi(phi) for the derivative route.
inline FisherReport fisher_information(const ExperimentConfig& cfg, double phi = 0.0) {
    cfg.validate();
    Assembled sys(cfg);
    auto [t_star, p_last] = arrival_time(sys.cache, sys.psi0, sys.basis.bound_index(cfg.L),
                                         scan_window(cfg), cfg.scan_points);
    (void)p_last;
    const QuantumState psi = apply_endpoint_phase(sys.cache.evolve(sys.psi0, t_star), sys.basis, phi);
    FisherReport rep;
    rep.t_star = t_star;
    rep.f_q = fisher_from_variance(psi, sys.basis);
    rep.delta_phi = rep.f_q > 0 ? 1.0 / std::sqrt(rep.f_q) : std::numeric_limits<double>::infinity();
    rep.classical_bound = 1.0 / std::sqrt(static_cast<double>(cfg.M));
    rep.quantum_bound = 1.0 / static_cast<double>(cfg.M);
    return rep;
}

/// Scheme stack for the standard NOON pipeline: unlocking fields plus the
/// L = 5 finite-size balanced splitter fit.
inline std::vector<SchemeDescriptor> noon_schemes(int M, double J, double U,
                                                  std::optional<double> beta = std::nullopt) {
    std::vector<SchemeDescriptor> s;
    s.push_back(SchemeDescriptor::edge_unlocked(edge_unlock_field(M, J, U)));
    const double b = beta ? *beta
                          : splitting_fit_coefficient(M) * std::pow(J, M) / std::pow(U, M - 1);
    s.push_back(SchemeDescriptor::split_impurity(b));
    return s;
}

/// Dephasing robustness of the transfer protocol: gamma values are given in
/// units of the closed-form J_eff; t* is fixed from the Gamma = 0 run.
inline std::vector<DephasingPoint> run_dephasing_sweep(const ExperimentConfig& cfg,
                                                       const std::vector<double>& gamma_over_jeff) {
    cfg.validate();
    Assembled sys(cfg);
    const int last = sys.basis.bound_index(cfg.L);
    auto [t_star, p] = transfer_time(sys.cache, sys.psi0, last, scan_window(cfg), cfg.scan_points);
    (void)p;
    const double jeff = effective_hopping_scale(cfg.M, cfg.J, cfg.U);
    std::vector<double> gammas;
    for (double g : gamma_over_jeff) gammas.push_back(g * jeff);
    auto pts = dephasing_sweep(sys.H, sys.basis, sys.psi0, last, t_star, gammas);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i].gamma = gamma_over_jeff[i];
    return pts;
}

/// Optimal boundary-to-bulk coupling ratio J0_eff/J_eff of the minimal
/// engineering scheme, from single-particle transfer on the effective chain.
inline double optimal_minimal_coupling_ratio(int L, int scan_points = 2000) {
    auto fidelity = [&](double ratio) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
        for (int j = 0; j < L - 1; ++j) {
            const double Jb = (j == 0 || j == L - 2) ? ratio : 1.0;
            H(j, j + 1) = H(j + 1, j) = Jb;
        }
        SpectralCache cache(H);
        QuantumState psi0 = QuantumState::Zero(L);
        psi0(0) = 1.0;
        return transfer_time(cache, psi0, L - 1, 2.0 * L, scan_points).second;
    };
    return golden_section_max(fidelity, 0.05, 1.5, 1e-4).first;
}

}  // namespace boundwalk
