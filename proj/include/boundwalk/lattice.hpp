#pragma once

#include "boundwalk/fock.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace boundwalk {

/// Eq.-of-motion convention for the onsite term: U/2 n(n-1) is the standard
/// Bose-Hubbard form; n(n+1) differs by a sector constant for uniform U.
enum class OnsiteConvention { NMinusOne, NPlusOne };

/// Site-dependent Bose-Hubbard parameters: hoppings J_j (L-1 bonds),
/// interactions U_j and chemical potentials mu_j (L sites).
struct LatticeParams {
    std::vector<double> hopping;      // J_j, j = 1..L-1
    std::vector<double> interaction;  // U_j, j = 1..L
    std::vector<double> potential;    // mu_j, j = 1..L

    int sites() const { return static_cast<int>(interaction.size()); }

    static LatticeParams uniform(int L, double J, double U, double mu = 0.0) {
        LatticeParams p;
        p.hopping.assign(static_cast<std::size_t>(L - 1), J);
        p.interaction.assign(static_cast<std::size_t>(L), U);
        p.potential.assign(static_cast<std::size_t>(L), mu);
        return p;
    }

    void validate() const {
        const std::size_t L = interaction.size();
        if (L < 1 || potential.size() != L || hopping.size() + 1 != L)
            throw std::invalid_argument("LatticeParams: inconsistent array lengths");
    }
};

enum class SchemeKind { Uniform, EdgeUnlocked, MinimalEngineered, SplitImpurity, EvenChain };

/// One impurity/engineering scheme. Chemical-potential fields are additive;
/// bond engineering replaces the designated hoppings.
struct SchemeDescriptor {
    SchemeKind kind = SchemeKind::Uniform;
    double beta_prime = 0.0;  // edge fields (EdgeUnlocked)
    double beta1 = 0.0;       // endpoint fields (MinimalEngineered / EvenChain)
    double beta2 = 0.0;       // next-to-endpoint fields
    double beta = 0.0;        // mid-chain splitting field (SplitImpurity)
    double J0 = 0.0;          // boundary hopping (MinimalEngineered)
    double J_mid = 0.0;       // central hopping (EvenChain)

    static SchemeDescriptor edge_unlocked(double beta_prime) {
        SchemeDescriptor s;
        s.kind = SchemeKind::EdgeUnlocked;
        s.beta_prime = beta_prime;
        return s;
    }
    static SchemeDescriptor minimal_engineered(double J0, double beta1, double beta2) {
        SchemeDescriptor s;
        s.kind = SchemeKind::MinimalEngineered;
        s.J0 = J0;
        s.beta1 = beta1;
        s.beta2 = beta2;
        return s;
    }
    static SchemeDescriptor split_impurity(double beta) {
        SchemeDescriptor s;
        s.kind = SchemeKind::SplitImpurity;
        s.beta = beta;
        return s;
    }
    static SchemeDescriptor even_chain(double J_mid, double beta1, double beta2) {
        SchemeDescriptor s;
        s.kind = SchemeKind::EvenChain;
        s.J_mid = J_mid;
        s.beta1 = beta1;
        s.beta2 = beta2;
        return s;
    }
};

/// Boundary field cancelling the edge/bulk effective-energy gap.
inline double edge_unlock_field(int M, double J, double U) {
    if (U <= 0) throw std::invalid_argument("edge_unlock_field: U must be positive");
    if (M == 2) return J * J / (4.0 * U);
    if (M == 3) return J * J / (8.0 * U);
    throw std::invalid_argument("edge_unlock_field: no closed form for M outside {2,3}");
}

/// Compensating endpoint fields (beta1, beta2) for the minimal-engineering
/// scheme J_1 = J_{L-1} = J0. With mu_j = -beta_j these flatten the
/// effective onsite profile exactly: M beta_1 closes the one-bond edge
/// deficit and M beta_2 the next-to-edge deficit, each kappa_M (2J^2 -
/// J0^2)/U resp. kappa_M (J^2 - J0^2)/U with kappa_2 = 1/2, kappa_3 = 3/8.
inline std::pair<double, double> minimal_engineering_fields(int M, double J, double J0, double U) {
    if (U <= 0) throw std::invalid_argument("minimal_engineering_fields: U must be positive");
    if (M == 2) return {(2.0 * J * J - J0 * J0) / (4.0 * U), (J * J - J0 * J0) / (4.0 * U)};
    if (M == 3) return {(2.0 * J * J - J0 * J0) / (8.0 * U), (J * J - J0 * J0) / (8.0 * U)};
    throw std::invalid_argument("minimal_engineering_fields: M outside {2,3}");
}

/// Asymptotic (L >> 1) balanced splitting field beta^{50/50}.
inline double splitting_field_asymptotic(int M, double J, double U) {
    if (U <= 0) throw std::invalid_argument("splitting_field_asymptotic: U must be positive");
    if (M == 2) return J * J / (2.0 * U);
    if (M == 3) return J * J * J / (8.0 * U * U);
    throw std::invalid_argument("splitting_field_asymptotic: M outside {2,3}");
}

/// Finite-size fit coefficient for beta^{50/50} = alpha J^M / U^{M-1} at L = 5.
inline double splitting_fit_coefficient(int M) {
    if (M == 2) return 0.395;
    if (M == 3) return 0.099;
    throw std::invalid_argument("splitting_fit_coefficient: M outside {2,3}");
}

/// Even-chain (M = 2) scheme values, stored exactly as printed. The beta
/// formulas carry one power of J where every comparable field carries two;
/// see even_chain_scheme_corrected for the J^2 working hypothesis.
inline std::tuple<double, double, double> even_chain_scheme(double J, double U) {
    if (U <= 0) throw std::invalid_argument("even_chain_scheme: U must be positive");
    const double J_mid = J * std::sqrt(std::sqrt(2.0) - 1.0);
    return {J_mid, J / (4.0 * U), J * (2.0 - std::sqrt(2.0)) / (4.0 * U)};
}

/// Dimensionally consistent variant with J^2 in place of J in the fields.
inline std::tuple<double, double, double> even_chain_scheme_corrected(double J, double U) {
    if (U <= 0) throw std::invalid_argument("even_chain_scheme_corrected: U must be positive");
    const double J_mid = J * std::sqrt(std::sqrt(2.0) - 1.0);
    return {J_mid, J * J / (4.0 * U), J * J * (2.0 - std::sqrt(2.0)) / (4.0 * U)};
}

/// Splitting impurity position: site L/2 + 1 (1-based).
inline int split_site(int L) { return L / 2 + 1; }

namespace detail {

inline void add_field(LatticeParams& p, int site, double beta) {
    // mu_j = -beta delta_{j,site}
    if (site < 1 || site > p.sites())
        throw std::out_of_range("apply_scheme: field site out of range");
    p.potential[static_cast<std::size_t>(site - 1)] -= beta;
}

inline void replace_bond(LatticeParams& p, std::set<int>& replaced, int bond, double J) {
    if (bond < 1 || bond > p.sites() - 1)
        throw std::out_of_range("apply_scheme: bond index out of range");
    if (!replaced.insert(bond).second)
        throw std::invalid_argument("apply_scheme: conflicting bond replacement");
    p.hopping[static_cast<std::size_t>(bond - 1)] = J;
}

}  // namespace detail

/// Returns a new parameter set with the scheme stack applied; the input is
/// left unmodified. Field additions commute; a bond may be replaced once.
inline LatticeParams apply_scheme(const LatticeParams& params,
                                  const std::vector<SchemeDescriptor>& schemes) {
    params.validate();
    LatticeParams out = params;
    const int L = out.sites();
    std::set<int> replaced;
    for (const auto& s : schemes) {
        switch (s.kind) {
            case SchemeKind::Uniform:
                break;
            case SchemeKind::EdgeUnlocked:
                detail::add_field(out, 1, s.beta_prime);
                detail::add_field(out, L, s.beta_prime);
                break;
            case SchemeKind::MinimalEngineered:
                detail::replace_bond(out, replaced, 1, s.J0);
                detail::replace_bond(out, replaced, L - 1, s.J0);
                detail::add_field(out, 1, s.beta1);
                detail::add_field(out, L, s.beta1);
                detail::add_field(out, 2, s.beta2);
                detail::add_field(out, L - 1, s.beta2);
                break;
            case SchemeKind::SplitImpurity:
                detail::add_field(out, split_site(L), s.beta);
                break;
            case SchemeKind::EvenChain:
                detail::replace_bond(out, replaced, L / 2, s.J_mid);
                detail::add_field(out, 1, s.beta1);
                detail::add_field(out, L, s.beta1);
                detail::add_field(out, 2, s.beta2);
                detail::add_field(out, L - 1, s.beta2);
                break;
        }
    }
    return out;
}

inline LatticeParams apply_scheme(const LatticeParams& params, const SchemeDescriptor& scheme) {
    return apply_scheme(params, std::vector<SchemeDescriptor>{scheme});
}

/// H = -sum_j J_j/2 (a_j a^dag_{j+1} + h.c.) + sum_j U_j/2 n_j(n_j-1) - sum_j mu_j n_j.
inline SectorOperator build_hamiltonian(const FockBasis& basis, const LatticeParams& params,
                                        OnsiteConvention convention = OnsiteConvention::NMinusOne) {
    params.validate();
    if (params.sites() != basis.sites())
        throw std::invalid_argument("build_hamiltonian: params/basis length mismatch");
    const int d = basis.dim();
    const int L = basis.sites();
    SectorOperator H = SectorOperator::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const auto& occ = basis.state(i).occupations;
        double diag = 0.0;
        for (int j = 0; j < L; ++j) {
            const double n = occ[static_cast<std::size_t>(j)];
            const double pair = convention == OnsiteConvention::NMinusOne ? n * (n - 1.0) : n * (n + 1.0);
            diag += 0.5 * params.interaction[static_cast<std::size_t>(j)] * pair;
            diag -= params.potential[static_cast<std::size_t>(j)] * n;
        }
        H(i, i) = diag;
        for (int b = 0; b < L - 1; ++b) {
            const std::size_t j = static_cast<std::size_t>(b);
            if (occ[j] > 0) {
                std::vector<int> target = occ;
                --target[j];
                ++target[j + 1];
                const double amp =
                    -0.5 * params.hopping[j] * std::sqrt(static_cast<double>(occ[j]) * (occ[j + 1] + 1));
                const int k = basis.index_of(target);
                H(k, i) += amp;
                H(i, k) += amp;
            }
        }
    }
    return H;
}

}  // namespace boundwalk
