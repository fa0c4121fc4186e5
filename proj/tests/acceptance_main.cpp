// Acceptance gate: one pass/fail line per criterion, exit nonzero on any
// failure. Tolerances are pinned here.

#include "boundwalk/io.hpp"
#include "boundwalk/protocols.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace boundwalk;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& what, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

void run_criterion(int number, const std::string& what, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(number, what, ok, detail);
}

std::string fmt(double x) { return format_number(x); }

// -------- criterion 9 helpers: extrema of a sampled curve ----------------

struct Extremum {
    double x;
    bool is_max;
};

std::vector<Extremum> find_extrema(const std::function<double(double)>& f, double lo, double hi,
                                   int n) {
    std::vector<double> xs(static_cast<std::size_t>(n) + 1), ys(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
        ys[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
    }
    double ymin = ys[0], ymax = ys[0];
    for (double y : ys) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double mid = 0.5 * (ymin + ymax);
    const int w = std::max(1, n / 100);
    std::vector<Extremum> out;
    for (int i = w; i + w <= n; ++i) {
        bool is_max = ys[static_cast<std::size_t>(i)] > mid;
        bool dominant = true;
        for (int k = i - w; k <= i + w; ++k) {
            const double a = ys[static_cast<std::size_t>(i)];
            const double b = ys[static_cast<std::size_t>(k)];
            if (is_max ? (b > a) : (b < a)) {
                dominant = false;
                break;
            }
        }
        if (!dominant) continue;
        // keep only the central sample of a flat run
        if (!out.empty() && out.back().is_max == is_max &&
            std::abs(out.back().x - xs[static_cast<std::size_t>(i)]) < (hi - lo) * 2.0 * w / n)
            continue;
        out.push_back({xs[static_cast<std::size_t>(i)], is_max});
    }
    return out;
}

// largest distance from each sampled extremum to the nearest analytic one
double extrema_mismatch(const std::vector<Extremum>& found,
                        const std::function<double(double, bool)>& nearest_ideal) {
    double worst = 0.0;
    for (const auto& e : found) worst = std::max(worst, std::abs(e.x - nearest_ideal(e.x, e.is_max)));
    return worst;
}

// -------- criterion 12 helpers -------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& args) {
    const std::string cmd = std::string(BOUNDWALK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

}  // namespace

int main() {
    const double pi = std::acos(-1.0);

    run_criterion(1, "sector dimension law for L <= 8, M <= 4", [](std::string& detail) {
        for (int L = 1; L <= 8; ++L)
            for (int M = 0; M <= 4; ++M) {
                std::int64_t expected = 1;
                for (int k = 1; k <= M; ++k) expected = expected * (L - 1 + k) / k;
                if (FockBasis(L, M).dim() != expected) {
                    detail = "mismatch at L=" + std::to_string(L) + " M=" + std::to_string(M);
                    return false;
                }
            }
        return true;
    });

    run_criterion(2, "effective theory matches perturbation-theory oracle and closed-form J_eff",
                  [](std::string& detail) {
        for (int L : {3, 4, 5}) {
            const double U = 50.0;
            const FockBasis basis(L, 2);
            const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(L, 1.0, U));
            const BlockSplit blocks = split_blocks(H, basis);
            const DysonSolution sol = solve_sylvester_dyson(blocks, U, 1);
            const Eigen::MatrixXcd raw = blocks.H_p - blocks.V * sol.W;
            const Eigen::MatrixXcd sym = 0.5 * (raw + raw.adjoint());
            const double err = (sym - degenerate_pt_oracle(blocks)).cwiseAbs().maxCoeff();
            if (err > 1e-10 * U) {
                detail = "oracle deviation " + fmt(err) + " at L=" + std::to_string(L);
                return false;
            }
        }
        const double U = 20.0;
        const FockBasis basis(5, 2);
        const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(5, 1.0, U));
        const BlockSplit blocks = split_blocks(H, basis);
        const EffectiveChain chain =
            effective_hamiltonian(blocks, solve_sylvester_dyson(blocks, U, 1)).chain;
        for (int j = 0; j < 4; ++j) {
            const double rel = std::abs(chain.hopping(j) - 1.0 / (2 * U)) * 2 * U;
            if (rel > 0.10) {
                detail = "J_eff off by " + fmt(rel * 100) + "% on bond " + std::to_string(j + 1);
                return false;
            }
        }
        detail = "J_eff = " + fmt(chain.hopping(1)) + " vs J^2/2U = " + fmt(1.0 / (2 * U));
        return true;
    });

    run_criterion(3, "exact vs effective endpoint dynamics within 0.02", [](std::string& detail) {
        const int L = 5;
        const double U = 20.0;
        const FockBasis basis(L, 2);
        const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(L, 1.0, U));
        const SpectralCache exact(H);
        const QuantumState psi0 = bound_state(basis, 1);
        const Eigen::VectorXcd c = exact.coefficients(psi0);
        const int target = basis.bound_index(L);

        const BlockSplit blocks = split_blocks(H, basis);
        const EffectiveChain chain =
            effective_hamiltonian(blocks, solve_sylvester_dyson(blocks, U, 1)).chain;
        const SpectralCache eff(chain);
        QuantumState e1 = QuantumState::Zero(L);
        e1(0) = 1.0;
        const Eigen::VectorXcd ce = eff.coefficients(e1);

        auto [t_star, p] = transfer_time(exact, psi0, target, 2.0 * L / chain.hopping(1));
        (void)p;
        double worst = 0.0;
        for (int i = 0; i <= 800; ++i) {
            const double t = 2.0 * t_star * i / 800;
            const double p_exact = std::norm(exact.amplitude(target, c, t));
            const double p_eff = std::norm(eff.amplitude(L - 1, ce, t));
            worst = std::max(worst, std::abs(p_exact - p_eff));
        }
        detail = "max deviation " + fmt(worst) + " over [0, 2 t*]";
        return worst <= 0.02;
    });

    run_criterion(4, "edge-field optimizer within 10% of the closed form", [](std::string& detail) {
        for (int M : {2, 3})
            for (int L : {5, 7})
                for (double U : {5.0, 10.0}) {
                    ExperimentConfig cfg;
                    cfg.L = L;
                    cfg.M = M;
                    cfg.J = 1.0;
                    cfg.U = U;
                    const double found = optimize_edge_field(cfg).beta_prime;
                    const double closed = edge_unlock_field(M, 1.0, U);
                    const double rel = std::abs(found - closed) / closed;
                    if (rel > 0.10) {
                        detail = "M=" + std::to_string(M) + " L=" + std::to_string(L) +
                                 " U=" + fmt(U) + ": beta' = " + fmt(found) + " vs " + fmt(closed) +
                                 " (" + fmt(rel * 100) + "%)";
                        return false;
                    }
                }
        return true;
    });

    const std::vector<double> u_sweep = {5.0, 8.0, 10.0, 15.0, 20.0};

    run_criterion(5, "splitting-field fit alpha = 0.395 +/- 0.02 (pairs)", [&](std::string& detail) {
        ExperimentConfig base;
        base.L = 5;
        base.M = 2;
        base.J = 1.0;
        const double alpha = fit_splitting_coefficient(base, u_sweep);
        detail = "alpha = " + fmt(alpha);
        return std::abs(alpha - 0.395) <= 0.02;
    });

    run_criterion(6, "splitting-field fit alpha = 0.099 +/- 0.01 (triples)", [&](std::string& detail) {
        ExperimentConfig base;
        base.L = 5;
        base.M = 3;
        base.J = 1.0;
        const double alpha = fit_splitting_coefficient(base, u_sweep);
        detail = "alpha = " + fmt(alpha);
        return std::abs(alpha - 0.099) <= 0.01;
    });

    run_criterion(7, "NOON signature: mixed endpoint terms suppressed", [](std::string& detail) {
        ExperimentConfig m2;
        m2.L = 5;
        m2.M = 2;
        m2.J = 1.0;
        m2.U = 5.0;
        m2.schemes = noon_schemes(2, 1.0, 5.0, 0.789 / (2.0 * 5.0));
        const SplitReport r2 = run_noon(m2);
        const double p1l = r2.mixed.at(0).second;
        if (p1l > 0.05) {
            detail = "P_1L = " + fmt(p1l);
            return false;
        }
        ExperimentConfig m3;
        m3.L = 5;
        m3.M = 3;
        m3.J = 1.0;
        m3.U = 5.0;
        m3.schemes = noon_schemes(3, 1.0, 5.0);
        const SplitReport r3 = run_noon(m3);
        const double p11l = r3.mixed.at(0).second;
        const double p1ll = r3.mixed.at(1).second;
        detail = "P_1L = " + fmt(p1l) + ", P_1LL = " + fmt(p1ll) +
                 ", |P_1LL - P_11L| = " + fmt(std::abs(p1ll - p11l));
        return p1ll <= 0.05 && std::abs(p1ll - p11l) <= 1e-3;
    });

    run_criterion(8, "ideal splitter combinatorics (1/8, 1/8, 3/8, 3/8)", [](std::string& detail) {
        const auto p = ideal_splitter_distribution(3);
        detail = fmt(p[0]) + ", " + fmt(p[3]) + ", " + fmt(p[1]) + ", " + fmt(p[2]);
        return p[0] == 0.125 && p[3] == 0.125 && p[1] == 0.375 && p[2] == 0.375;
    });

    run_criterion(9, "fringe period and extrema positions (both detection variants)",
                  [&](std::string& detail) {
        // ideal curve period 2 pi / N
        for (int N : {2, 3})
            for (double phi : {0.17, 1.3})
                if (std::abs(ideal_mach_zehnder(phi + 2 * pi / N, N) - ideal_mach_zehnder(phi, N)) >
                    1e-12) {
                    detail = "ideal curve not 2 pi / N periodic";
                    return false;
                }
        if (std::abs(ideal_quench_curve(-5 * pi / 4, 2) - 1.0) > 1e-12) {
            detail = "lossless quench curve at phi = -5 pi/4 is not 1";
            return false;
        }

        ExperimentConfig cfg;
        cfg.L = 5;
        cfg.M = 2;
        cfg.J = 1.0;
        cfg.U = 5.0;
        cfg.schemes = noon_schemes(2, 1.0, 5.0);
        const int N = 2;

        const auto grid = linspace(-2 * pi, 2 * pi, 2001);
        const FringeScan mz = mach_zehnder_fringes(cfg, grid);
        auto sampled_mz = [&](double phi) {
            const std::size_t i = static_cast<std::size_t>(
                std::llround((phi + 2 * pi) / (4 * pi) * 2000));
            return mz.probability[i];
        };
        // analytic extrema: maxima at N phi = pi (mod 2 pi), minima at N phi = 0 (mod 2 pi)
        auto nearest_mz = [&](double x, bool is_max) {
            const double offset = is_max ? pi / N : 0.0;
            const double period = 2 * pi / N;
            return offset + period * std::round((x - offset) / period);
        };
        const double mz_err =
            extrema_mismatch(find_extrema(sampled_mz, -2 * pi, 2 * pi, 2000), nearest_mz);
        if (mz_err > 0.1) {
            detail = "interferometer extrema off by " + fmt(mz_err) + " rad";
            return false;
        }

        const FringeScan quench = quench_detection(cfg, grid);
        auto sampled_q = [&](double phi) {
            const std::size_t i = static_cast<std::size_t>(
                std::llround((phi + 2 * pi) / (4 * pi) * 2000));
            return quench.probability[i];
        };
        // lossless curve: maxima at sin(N phi) = -1, minima at sin(N phi) = +1
        auto nearest_q = [&](double x, bool is_max) {
            const double offset = (is_max ? -pi / 2 : pi / 2) / N;
            const double period = 2 * pi / N;
            return offset + period * std::round((x - offset) / period);
        };
        const double q_err =
            extrema_mismatch(find_extrema(sampled_q, -2 * pi, 2 * pi, 2000), nearest_q);
        detail = "interferometer extrema within " + fmt(mz_err) + " rad, quench within " +
                 fmt(q_err) + " rad";
        return q_err <= 0.1;
    });

    run_criterion(10, "Fisher information: ideal value, gradient check, precision window",
                  [&](std::string& detail) {
        for (int M : {2, 3}) {
            const FockBasis basis(5, M);
            QuantumState noon = QuantumState::Zero(basis.dim());
            noon(basis.bound_index(1)) = Complex(1 / std::sqrt(2.0), 0);
            noon(basis.bound_index(5)) = Complex(0, 1 / std::sqrt(2.0));
            if (std::abs(fisher_from_variance(noon, basis) - M * M) > 1e-12) {
                detail = "ideal NOON F_Q != M^2 for M=" + std::to_string(M);
                return false;
            }
        }
        for (int M : {2, 3})
            for (double U : u_sweep) {
                if (M == 3 && U > 10.0) continue;  // J_eff ~ J^3/U^2 slows M=3 beyond U/J = 10
                ExperimentConfig cfg;
                cfg.L = 5;
                cfg.M = M;
                cfg.J = 1.0;
                cfg.U = U;
                cfg.schemes = noon_schemes(M, 1.0, U);
                const FisherReport rep = fisher_information(cfg);
                if (rep.delta_phi < rep.quantum_bound - 1e-9 ||
                    rep.delta_phi > rep.classical_bound + 1e-9) {
                    detail = "M=" + std::to_string(M) + " U=" + fmt(U) +
                             ": delta_phi = " + fmt(rep.delta_phi) + " outside [" +
                             fmt(rep.quantum_bound) + ", " + fmt(rep.classical_bound) + "]";
                    return false;
                }
                // Eq.-(11)-by-finite-difference gradient check against the variance form
                Assembled sys(cfg);
                auto [t_star, p] = arrival_time(sys.cache, sys.psi0, sys.basis.bound_index(5),
                                                scan_window(cfg), cfg.scan_points);
                (void)p;
                const QuantumState psi = sys.cache.evolve(sys.psi0, t_star);
                const double fv = fisher_from_variance(psi, sys.basis);
                const double fd = fisher_from_derivative(psi, sys.basis, 0.0, 1e-5);
                if (std::abs(fd - fv) > 1e-4 * fv) {
                    detail = "gradient check " + fmt(fd) + " vs " + fmt(fv);
                    return false;
                }
            }
        return true;
    });

    run_criterion(11, "open-system validity and dephasing robustness", [](std::string& detail) {
        const FockBasis basis(5, 2);
        const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(5, 1.0, 3.0));
        const SpectralCache cache(H);
        const QuantumState psi0 = bound_state(basis, 1);
        auto [t_star, p] = transfer_time(cache, psi0, basis.bound_index(5), 60.0);
        (void)p;
        const DensityMatrix rho_closed = evolve_density(H, 0.0, basis, pure_density(psi0), t_star);
        const double td = trace_distance(rho_closed, pure_density(cache.evolve(psi0, t_star)));
        if (td > 1e-8) {
            detail = "closed-system trace distance " + fmt(td);
            return false;
        }
        const DensityMatrix rho_open = evolve_density(H, 0.01, basis, pure_density(psi0), t_star);
        if (std::abs(rho_open.trace().real() - 1.0) > 1e-9 ||
            (rho_open - rho_open.adjoint()).norm() > 1e-9) {
            detail = "trace/Hermiticity drift";
            return false;
        }
        ExperimentConfig m2;
        m2.L = 5;
        m2.M = 2;
        m2.J = 1.0;
        m2.U = 3.0;
        m2.schemes = {SchemeDescriptor::edge_unlocked(edge_unlock_field(2, 1.0, 3.0))};
        const auto sweep2 = run_dephasing_sweep(m2, {1e-3});
        ExperimentConfig m3;
        m3.L = 5;
        m3.M = 3;
        m3.J = 1.0;
        m3.U = 2.0;
        m3.schemes = {SchemeDescriptor::edge_unlocked(edge_unlock_field(3, 1.0, 2.0))};
        const auto sweep3 = run_dephasing_sweep(m3, {1e-4});
        detail = "closed-system trace distance " + fmt(td) + "; variations " +
                 fmt(sweep2.at(0).relative_variation) + " (pairs), " +
                 fmt(sweep3.at(0).relative_variation) + " (triples)";
        return sweep2.at(0).relative_variation < 0.05 && sweep3.at(0).relative_variation < 0.05;
    });

    run_criterion(12, "CLI preset re-runs are bit-identical", [](std::string& detail) {
        const std::vector<std::pair<std::string, std::string>> jobs = {
            {"transfer", "fig2"},        {"transfer", "fig2_locked"}, {"noon", "fig5"},
            {"split-opt", "fig6"},       {"noon", "fig7"},            {"split-opt", "fig8"},
            {"fringes", "fig9"},         {"quench-fringes", "fig9"},  {"fisher", "fig10"},
            {"fisher", "fig10_m3"},      {"dephasing-sweep", "deco_m2"},
            {"dephasing-sweep", "deco_m3"}, {"effective-dump", "fig2"}, {"unlock-opt", "fig2_locked"}};
        const fs::path root = fs::temp_directory_path() / "boundwalk_acceptance";
        fs::remove_all(root);
        for (const auto& [cmd, preset] : jobs) {
            const fs::path a = root / (cmd + "_" + preset + "_a");
            const fs::path b = root / (cmd + "_" + preset + "_b");
            for (const fs::path& dir : {a, b}) {
                fs::create_directories(dir);
                if (!run_cli(cmd + " --preset " + preset + " --out " + dir.string())) {
                    detail = cmd + " --preset " + preset + " failed";
                    return false;
                }
            }
            for (const auto& entry : fs::directory_iterator(a)) {
                if (entry.path().extension() != ".csv") continue;
                if (slurp(entry.path()) != slurp(b / entry.path().filename())) {
                    detail = preset + "/" + entry.path().filename().string() + " differs between runs";
                    return false;
                }
            }
        }
        fs::remove_all(root);
        return true;
    });

    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
