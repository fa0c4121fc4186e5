#include <catch2/catch_amalgamated.hpp>

#include "boundwalk/dynamics.hpp"
#include "boundwalk/lattice.hpp"
#include "boundwalk/optimize.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace boundwalk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("golden section finds the maximum of a smooth function") {
    auto [x, v] = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
    CHECK_THAT(x, WithinAbs(0.3, 1e-8));
    CHECK_THAT(v, WithinAbs(0.0, 1e-14));
}

TEST_CASE("bisection and scan-and-bisect locate roots") {
    auto f = [](double x) { return std::cos(x); };
    CHECK_THAT(bisect_root(f, 1.0, 2.0, 1e-12), WithinAbs(std::acos(-1.0) / 2, 1e-10));
    CHECK_THROWS_AS(bisect_root(f, 0.1, 0.5, 1e-12), std::runtime_error);
    CHECK_THAT(scan_and_bisect(f, 0.0, 10.0, 40, 1e-12), WithinAbs(std::acos(-1.0) / 2, 1e-10));
    CHECK_THROWS_AS(scan_and_bisect([](double) { return 1.0; }, 0.0, 1.0, 10, 1e-12),
                    std::runtime_error);
}

TEST_CASE("spectral cache rejects non-Hermitian input") {
    Eigen::MatrixXcd H(2, 2);
    H << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(SpectralCache(H), std::invalid_argument);
}

TEST_CASE("spectral evolution matches the direct matrix exponential") {
    const FockBasis basis(3, 2);
    const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(3, 1.0, 4.0));
    const SpectralCache cache(H);
    const QuantumState psi0 = bound_state(basis, 1);
    const double t = 2.7;
    const Eigen::MatrixXcd Ut = (Complex(0, -t) * H).exp();
    const QuantumState direct = Ut * psi0;
    const QuantumState spectral = cache.evolve(psi0, t);
    CHECK((direct - spectral).norm() < 1e-12);
    CHECK_THAT(spectral.norm(), WithinAbs(1.0, 1e-12));

    // O(D) amplitude path equals the full evolution componentwise
    const Eigen::VectorXcd c = cache.coefficients(psi0);
    for (int i = 0; i < basis.dim(); ++i)
        CHECK(std::abs(cache.amplitude(i, c, t) - spectral(i)) < 1e-12);
}

TEST_CASE("norm is preserved over long evolutions") {
    const FockBasis basis(5, 2);
    const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(5, 1.0, 5.0));
    const SpectralCache cache(H);
    QuantumState psi = bound_state(basis, 1);
    for (double t : {10.0, 100.0, 1000.0})
        CHECK_THAT(cache.evolve(psi, t).norm(), WithinAbs(1.0, 1e-10));
}

TEST_CASE("joint probability is the squared amplitude of the matching configuration") {
    const FockBasis basis(4, 2);
    QuantumState psi = QuantumState::Zero(basis.dim());
    psi(basis.index_of({1, 0, 0, 1})) = Complex(0.6, 0.0);
    psi(basis.index_of({0, 2, 0, 0})) = Complex(0.0, 0.8);
    CHECK_THAT(joint_probability(psi, basis, {1, 4}), WithinAbs(0.36, 1e-14));
    CHECK_THAT(joint_probability(psi, basis, {4, 1}), WithinAbs(0.36, 1e-14));  // multiset order
    CHECK_THAT(joint_probability(psi, basis, {2, 2}), WithinAbs(0.64, 1e-14));
    CHECK_THAT(joint_probability(psi, basis, {1, 2}), WithinAbs(0.0, 1e-14));
    CHECK_THROWS_AS(joint_probability(psi, basis, {1}), std::invalid_argument);
}

TEST_CASE("joint probabilities over all multisets sum to one") {
    const FockBasis basis(4, 3);
    const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(4, 1.0, 3.0));
    const SpectralCache cache(H);
    const QuantumState psi = cache.evolve(bound_state(basis, 2), 5.0);
    double total = 0.0;
    for (int i = 0; i < basis.dim(); ++i) {
        std::vector<int> sites;
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < basis.state(i).occupations[static_cast<std::size_t>(j)]; ++k)
                sites.push_back(j + 1);
        total += joint_probability(psi, basis, sites);
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
}

TEST_CASE("scan peak finds the global maximum, earliest tie first") {
    auto [t1, v1] = scan_peak([](double t) { return std::sin(t); }, 20.0, 4000);
    CHECK_THAT(t1, WithinAbs(std::acos(-1.0) / 2, 1e-4));
    CHECK_THAT(v1, WithinAbs(1.0, 1e-10));
    CHECK_THROWS_AS(scan_peak([](double) { return 0.0; }, 0.0), std::invalid_argument);
}

TEST_CASE("first arrival peak skips later, larger revivals") {
    // envelope: small early peak at t=2 (0.6), large late peak at t=8 (1.0)
    auto f = [](double t) {
        const double a = 0.6 * std::exp(-(t - 2) * (t - 2));
        const double b = std::exp(-(t - 8) * (t - 8));
        return a + b;
    };
    auto [t_first, v_first] = first_arrival_peak(f, 10.0, 2000);
    CHECK_THAT(t_first, WithinAbs(2.0, 1e-3));
    CHECK_THAT(v_first, WithinAbs(0.6, 1e-6));
    // below the prominence threshold the late peak wins
    auto g = [](double t) {
        return 0.1 * std::exp(-(t - 2) * (t - 2)) + std::exp(-(t - 8) * (t - 8));
    };
    auto [t_late, v_late] = first_arrival_peak(g, 10.0, 2000);
    CHECK_THAT(t_late, WithinAbs(8.0, 1e-3));
    CHECK(v_late > 0.9);
}

TEST_CASE("mirror symmetry: transfer from either end is identical") {
    const FockBasis basis(5, 2);
    const SectorOperator H = build_hamiltonian(
        basis, apply_scheme(LatticeParams::uniform(5, 1.0, 5.0),
                            SchemeDescriptor::edge_unlocked(0.05)));
    const SpectralCache cache(H);
    auto [t_lr, p_lr] = transfer_time(cache, bound_state(basis, 1), basis.bound_index(5), 100.0);
    auto [t_rl, p_rl] = transfer_time(cache, bound_state(basis, 5), basis.bound_index(1), 100.0);
    CHECK_THAT(t_lr, WithinRel(t_rl, 1e-9));
    CHECK_THAT(p_lr, WithinRel(p_rl, 1e-9));
}

TEST_CASE("single-particle transfer time scales like L/J") {
    const int L = 5;
    const FockBasis basis(L, 1);
    const SectorOperator H = build_hamiltonian(basis, LatticeParams::uniform(L, 1.0, 0.0));
    const SpectralCache cache(H);
    auto [t_star, p] = transfer_time(cache, bound_state(basis, 1), basis.bound_index(L), 20.0);
    CHECK(t_star > 0.5 * L);
    CHECK(t_star < 3.0 * L);
    CHECK(p > 0.5);
}
