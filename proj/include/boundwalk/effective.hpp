#pragma once

#include "boundwalk/fock.hpp"
#include "boundwalk/lattice.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

namespace boundwalk {

/// Block decomposition of a sector Hamiltonian into the bound-particle
/// subspace (p) and its complement (q).
struct BlockSplit {
    std::vector<int> p_indices;  // bound states |{M}, j>, ordered by site j = 1..L
    std::vector<int> q_indices;  // complement, in basis order
    Eigen::MatrixXcd H_p;        // L x L
    Eigen::MatrixXcd H_q;        // (D-L) x (D-L)
    Eigen::MatrixXcd V;          // L x (D-L)
    Eigen::VectorXd hp_large;    // interaction diagonal on p, per unit U
    Eigen::VectorXd hq_large;    // interaction diagonal on q, per unit U
};

inline double interaction_pairs(const FockState& s) {
    double v = 0.0;
    for (int n : s.occupations) v += 0.5 * n * (n - 1.0);
    return v;
}

inline BlockSplit split_blocks(const SectorOperator& H, const FockBasis& basis) {
    const int D = basis.dim();
    const int L = basis.sites();
    if (H.rows() != D || H.cols() != D)
        throw std::invalid_argument("split_blocks: operator does not act on this sector");
    BlockSplit bs;
    bs.p_indices.reserve(static_cast<std::size_t>(L));
    for (int j = 1; j <= L; ++j) bs.p_indices.push_back(basis.bound_index(j));
    std::vector<bool> is_p(static_cast<std::size_t>(D), false);
    for (int i : bs.p_indices) is_p[static_cast<std::size_t>(i)] = true;
    for (int i = 0; i < D; ++i)
        if (!is_p[static_cast<std::size_t>(i)]) bs.q_indices.push_back(i);

    const int Dq = D - L;
    bs.H_p.resize(L, L);
    bs.H_q.resize(Dq, Dq);
    bs.V.resize(L, Dq);
    bs.hp_large.resize(L);
    bs.hq_large.resize(Dq);
    for (int a = 0; a < L; ++a) {
        bs.hp_large(a) = interaction_pairs(basis.state(bs.p_indices[static_cast<std::size_t>(a)]));
        for (int b = 0; b < L; ++b)
            bs.H_p(a, b) = H(bs.p_indices[static_cast<std::size_t>(a)], bs.p_indices[static_cast<std::size_t>(b)]);
        for (int b = 0; b < Dq; ++b)
            bs.V(a, b) = H(bs.p_indices[static_cast<std::size_t>(a)], bs.q_indices[static_cast<std::size_t>(b)]);
    }
    for (int a = 0; a < Dq; ++a) {
        bs.hq_large(a) = interaction_pairs(basis.state(bs.q_indices[static_cast<std::size_t>(a)]));
        for (int b = 0; b < Dq; ++b)
            bs.H_q(a, b) = H(bs.q_indices[static_cast<std::size_t>(a)], bs.q_indices[static_cast<std::size_t>(b)]);
    }
    return bs;
}

/// Truncated solution of the Sylvester equation H_q W - W H_p = V^dag via the
/// Dyson expansion in 1/U.
struct DysonSolution {
    Eigen::MatrixXcd W;  // (D-L) x L
    int order = 0;
    double residual = 0.0;  // operator norm of H_q W - W H_p - V^dag
};

inline DysonSolution solve_sylvester_dyson(const BlockSplit& blocks, double U_scale, int order) {
    if (order < 0) throw std::invalid_argument("solve_sylvester_dyson: order must be >= 0");
    const int L = static_cast<int>(blocks.H_p.rows());
    const int Dq = static_cast<int>(blocks.H_q.rows());

    // G^large is diagonal in the paired index: d(q,p) = U (hq_large - hp_large)
    Eigen::MatrixXd denom(Dq, L);
    for (int q = 0; q < Dq; ++q)
        for (int p = 0; p < L; ++p) {
            const double d = U_scale * (blocks.hq_large(q) - blocks.hp_large(p));
            if (d == 0.0)
                throw std::runtime_error("solve_sylvester_dyson: singular G^large entry");
            denom(q, p) = d;
        }
    auto apply_large_inverse = [&](const Eigen::MatrixXcd& X) {
        return (X.array() / denom.array()).matrix().eval();
    };

    const Eigen::MatrixXcd Hq_small =
        blocks.H_q - (U_scale * blocks.hq_large).cast<Complex>().asDiagonal().toDenseMatrix();
    const Eigen::MatrixXcd Hp_small =
        blocks.H_p - (U_scale * blocks.hp_large).cast<Complex>().asDiagonal().toDenseMatrix();
    auto apply_small = [&](const Eigen::MatrixXcd& X) {
        return (Hq_small * X - X * Hp_small).eval();
    };

    const Eigen::MatrixXcd Vd = blocks.V.adjoint();
    Eigen::MatrixXcd term = apply_large_inverse(Vd);
    Eigen::MatrixXcd W = term;
    for (int k = 1; k <= order; ++k) {
        term = -apply_large_inverse(apply_small(term));
        W += term;
    }

    DysonSolution sol;
    sol.W = W;
    sol.order = order;
    const Eigen::MatrixXcd res = blocks.H_q * W - W * blocks.H_p - Vd;
    sol.residual = res.jacobiSvd().singularValues()(0);
    return sol;
}

/// Tridiagonal effective chain: onsite energies B_eff (L) and hoppings
/// J_eff (L-1).
struct EffectiveChain {
    Eigen::VectorXd onsite;   // B_eff_j
    Eigen::VectorXd hopping;  // J_eff_j

    int sites() const { return static_cast<int>(onsite.size()); }

    Eigen::MatrixXd matrix() const {
        const int L = sites();
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
        for (int j = 0; j < L; ++j) H(j, j) = onsite(j);
        for (int j = 0; j < L - 1; ++j) H(j, j + 1) = H(j + 1, j) = hopping(j);
        return H;
    }

    /// Subtracts the interior onsite mean (the global gauge B_bulk = 0).
    EffectiveChain gauged() const {
        EffectiveChain out = *this;
        const int L = sites();
        double bulk = 0.0;
        int count = 0;
        for (int j = 1; j + 1 < L; ++j) {
            bulk += onsite(j);
            ++count;
        }
        if (count == 0) bulk = onsite.mean() * static_cast<double>(L);
        else bulk /= static_cast<double>(count);
        out.onsite.array() -= bulk;
        return out;
    }
};

struct EffectiveReduction {
    EffectiveChain chain;
    double discarded_weight = 0.0;  // largest dropped longer-range element
};

/// H_eff = H_p - V W, symmetrized and truncated to tridiagonal form.
inline EffectiveReduction effective_hamiltonian(const BlockSplit& blocks, const DysonSolution& sol,
                                                double truncation_threshold = 1e-3) {
    const Eigen::MatrixXcd raw = blocks.H_p - blocks.V * sol.W;
    const Eigen::MatrixXcd sym = 0.5 * (raw + raw.adjoint());
    const int L = static_cast<int>(sym.rows());

    EffectiveReduction out;
    out.chain.onsite.resize(L);
    out.chain.hopping.resize(L - 1);
    for (int j = 0; j < L; ++j) out.chain.onsite(j) = sym(j, j).real();
    // The off-diagonal sign alternation is a gauge freedom on an open chain
    // (site-local phase flips), so the chain stores magnitudes.
    for (int j = 0; j < L - 1; ++j) out.chain.hopping(j) = std::abs(sym(j, j + 1).real());

    double max_hop = 0.0;
    for (int j = 0; j < L - 1; ++j) max_hop = std::max(max_hop, std::abs(out.chain.hopping(j)));
    for (int a = 0; a < L; ++a)
        for (int b = a + 2; b < L; ++b)
            out.discarded_weight = std::max(out.discarded_weight, std::abs(sym(a, b)));
    if (max_hop > 0.0 && out.discarded_weight >= truncation_threshold * max_hop)
        throw std::runtime_error(
            "effective_hamiltonian: longer-range terms above threshold (U/J too small for a "
            "tridiagonal effective model)");
    return out;
}

/// The paper-level analytic effective chain for M = 2, 3. Requires uniform U;
/// the hopping profile may be uniform or minimally engineered (any J_j profile
/// enters per bond). Chemical potentials contribute -M mu_j to B_eff_j.
inline EffectiveChain closed_form_effective(int M, const LatticeParams& params) {
    params.validate();
    if (M != 2 && M != 3)
        throw std::invalid_argument("closed_form_effective: M outside {2,3}");
    const int L = params.sites();
    const double U = params.interaction[0];
    for (double u : params.interaction)
        if (u != U) throw std::invalid_argument("closed_form_effective: requires uniform U");
    if (U <= 0) throw std::invalid_argument("closed_form_effective: U must be positive");

    // per-bond virtual-hopping contributions
    const double kappa = M == 2 ? 0.5 : 3.0 / 8.0;  // onsite shift kappa J_b^2 / U per bond
    EffectiveChain c;
    c.onsite.resize(L);
    c.hopping.resize(L - 1);
    for (int j = 0; j < L - 1; ++j) {
        const double Jb = params.hopping[static_cast<std::size_t>(j)];
        c.hopping(j) = M == 2 ? Jb * Jb / (2.0 * U) : 3.0 * Jb * Jb * Jb / (16.0 * U * U);
    }
    for (int j = 0; j < L; ++j) {
        double b = 0.5 * U * M * (M - 1) - M * params.potential[static_cast<std::size_t>(j)];
        if (j > 0) {
            const double Jb = params.hopping[static_cast<std::size_t>(j - 1)];
            b += kappa * Jb * Jb / U;
        }
        if (j < L - 1) {
            const double Jb = params.hopping[static_cast<std::size_t>(j)];
            b += kappa * Jb * Jb / U;
        }
        c.onsite(j) = b;
    }
    return c;
}

/// Second-order degenerate perturbation theory on the bound subspace:
/// an oracle for the Dyson route when H_p is proportional to the identity.
inline Eigen::MatrixXcd degenerate_pt_oracle(const BlockSplit& blocks) {
    const int L = static_cast<int>(blocks.H_p.rows());
    const int Dq = static_cast<int>(blocks.H_q.rows());
    const double E0 = blocks.H_p(0, 0).real();
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            const double want = a == b ? E0 : 0.0;
            if (std::abs(blocks.H_p(a, b) - want) > 1e-12 * std::max(1.0, std::abs(E0)))
                throw std::invalid_argument("degenerate_pt_oracle: H_p is not degenerate");
        }
    Eigen::MatrixXcd out = blocks.H_p;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            Complex sum = 0.0;
            for (int m = 0; m < Dq; ++m) {
                const double Em = blocks.H_q(m, m).real();
                sum += blocks.V(a, m) * std::conj(blocks.V(b, m)) / (E0 - Em);
            }
            out(a, b) += sum;
        }
    return out;
}

}  // namespace boundwalk
