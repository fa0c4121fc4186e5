#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace boundwalk {

using Complex = std::complex<double>;
using SectorOperator = Eigen::MatrixXcd;

/// Occupation-number configuration of a chain: n[j] particles on site j+1.
struct FockState {
    std::vector<int> occupations;

    int total() const {
        int s = 0;
        for (int n : occupations) s += n;
        return s;
    }
    bool operator==(const FockState& o) const { return occupations == o.occupations; }
};

inline std::int64_t sector_dimension(int sites, int particles) {
    // (M+L-1)! / (M! (L-1)!), computed multiplicatively
    std::int64_t d = 1;
    for (int k = 1; k <= particles; ++k)
        d = d * (sites - 1 + k) / k;
    return d;
}

/// Ordered basis of the fixed-(L, M) bosonic sector.
///
/// States are enumerated in lexicographically decreasing order of the
/// occupation vector, so |M,0,...,0> has index 0 and |0,...,0,M> has
/// index D-1. The bound state with all M particles on site j is
/// bound_index(j).
class FockBasis {
public:
    FockBasis(int sites, int particles) : sites_(sites), particles_(particles) {
        if (sites < 1) throw std::invalid_argument("FockBasis: need at least one site");
        if (particles < 0) throw std::invalid_argument("FockBasis: negative particle number");
        std::vector<int> n(static_cast<std::size_t>(sites), 0);
        n[0] = particles;
        while (true) {
            states_.push_back(FockState{n});
            index_.emplace(n, static_cast<int>(states_.size()) - 1);
            // next composition in decreasing lexicographic order
            int i = sites - 2;
            while (i >= 0 && n[static_cast<std::size_t>(i)] == 0) --i;
            if (i < 0) break;
            int tail = 0;
            for (int k = i + 1; k < sites; ++k) {
                tail += n[static_cast<std::size_t>(k)];
                n[static_cast<std::size_t>(k)] = 0;
            }
            --n[static_cast<std::size_t>(i)];
            n[static_cast<std::size_t>(i + 1)] = tail + 1;
        }
    }

    int sites() const { return sites_; }
    int particles() const { return particles_; }
    int dim() const { return static_cast<int>(states_.size()); }

    const FockState& state(int i) const { return states_.at(static_cast<std::size_t>(i)); }
    const std::vector<FockState>& states() const { return states_; }

    int index_of(const std::vector<int>& occ) const {
        auto it = index_.find(occ);
        if (it == index_.end()) throw std::out_of_range("FockBasis: state not in sector");
        return it->second;
    }
    int index_of(const FockState& s) const { return index_of(s.occupations); }

    /// Index of |{M}, site> (all particles on one site, 1-based site label).
    int bound_index(int site) const {
        check_site(site);
        std::vector<int> occ(static_cast<std::size_t>(sites_), 0);
        occ[static_cast<std::size_t>(site - 1)] = particles_;
        return index_of(occ);
    }

    void check_site(int site) const {
        if (site < 1 || site > sites_)
            throw std::out_of_range("FockBasis: site index out of range");
    }
    void check_bond(int bond) const {
        if (bond < 1 || bond > sites_ - 1)
            throw std::out_of_range("FockBasis: bond index out of range");
    }

private:
    int sites_;
    int particles_;
    std::vector<FockState> states_;
    std::map<std::vector<int>, int> index_;
};

inline FockBasis enumerate_basis(int sites, int particles) { return FockBasis(sites, particles); }

/// n_j as a diagonal sector matrix (1-based site label).
inline SectorOperator number_operator(const FockBasis& basis, int site) {
    basis.check_site(site);
    const int d = basis.dim();
    SectorOperator op = SectorOperator::Zero(d, d);
    for (int i = 0; i < d; ++i)
        op(i, i) = static_cast<double>(basis.state(i).occupations[static_cast<std::size_t>(site - 1)]);
    return op;
}

/// a_j a^dag_{j+1} + a^dag_j a_{j+1} on bond j (1-based bond label).
inline SectorOperator hop_operator(const FockBasis& basis, int bond) {
    basis.check_bond(bond);
    const int d = basis.dim();
    const std::size_t j = static_cast<std::size_t>(bond - 1);
    SectorOperator op = SectorOperator::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const auto& occ = basis.state(i).occupations;
        if (occ[j] > 0) {
            // a_j a^dag_{j+1}: amplitude sqrt(n_j (n_{j+1}+1))
            std::vector<int> target = occ;
            --target[j];
            ++target[j + 1];
            const double amp = std::sqrt(static_cast<double>(occ[j]) * (occ[j + 1] + 1));
            const int k = basis.index_of(target);
            op(k, i) += amp;
            op(i, k) += amp;  // Hermitian conjugate
        }
    }
    return op;
}

}  // namespace boundwalk
