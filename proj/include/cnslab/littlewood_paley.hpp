// SPDX-License-Identifier: Apache-2.0
//
// Discrete Littlewood-Paley machinery: a C^inf radial bump partition of
// unity on dyadic annuli, block operators, low-frequency cutoffs, and
// homogeneous Besov norms with third index 1.
//
// Profile: theta(r) = 1 for r <= 1, 0 for r >= 2, smooth exp(-1/t) smoothstep
// in between. Block j multiplies by phi(2^-j |xi|) with phi(r) = theta(r) -
// theta(2r), supported in 1/2 <= r <= 2. Telescoping gives an exact partition
// on the closed resolved range 2^j_min <= |xi| <= 2^j_max; spectral mass
// outside it is reported separately, never extrapolated.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cnslab/spectral.hpp"

namespace cnslab {

namespace detail {
inline double bump_h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
// Smooth 0->1 step on [0,1].
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = bump_h(t);
    return a / (a + bump_h(1.0 - t));
}
}  // namespace detail

// Low-pass radial profile: 1 on [0,1], 0 on [2,inf).
inline double lowpass_profile(double r) { return detail::smoothstep(2.0 - r); }
// Annulus profile phi(r) = theta(r) - theta(2r), supported in [1/2, 2].
inline double annulus_profile(double r) { return lowpass_profile(r) - lowpass_profile(2.0 * r); }

struct BesovIndex {
    double s;
    double p;

    BesovIndex(double s_, double p_, int dim) : s(s_), p(p_) {
        if (!(p > 1.0) || !(p < std::numeric_limits<double>::infinity()))
            throw std::invalid_argument("BesovIndex: p must lie in (1,inf)");
        if (s > static_cast<double>(dim) / p + 1e-12)
            throw std::invalid_argument("BesovIndex: admissibility requires s <= n/p");
    }
};

class DyadicFilterBank {
public:
    DyadicFilterBank(TorusGrid grid, int j_min, int j_max)
        : grid_(std::move(grid)), j_min_(j_min), j_max_(j_max) {
        if (!(j_min <= 0 && 0 <= j_max))
            throw std::invalid_argument("DyadicFilterBank: need j_min <= 0 <= j_max");
        if (std::ldexp(1.0, j_max + 1) > grid_.nyquist_radius() + 1e-12)
            throw std::invalid_argument("DyadicFilterBank: band exceeds grid Nyquist radius");
        const std::size_t npts = grid_.total_points();
        phi_hat_.assign(static_cast<std::size_t>(j_max_ - j_min_ + 1), std::vector<double>(npts, 0.0));
        covered_.assign(npts, 0.0);
        for (std::size_t p = 0; p < npts; ++p) {
            const double r = grid_.freq_radius(p);
            if (r == 0.0) continue;
            for (int j = j_min_; j <= j_max_; ++j) {
                const double w = annulus_profile(std::ldexp(r, -j));
                phi_hat_[static_cast<std::size_t>(j - j_min_)][p] = w;
                covered_[p] += w;
            }
        }
    }

    const TorusGrid& grid() const { return grid_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    bool in_range(int j) const { return j >= j_min_ && j <= j_max_; }
    // Tabulated phi(2^-j xi) on the lattice.
    const std::vector<double>& block_weights(int j) const {
        if (!in_range(j)) throw std::out_of_range("DyadicFilterBank: block index out of range");
        return phi_hat_[static_cast<std::size_t>(j - j_min_)];
    }
    // Sum of all tabulated block weights at lattice bin p (1 on the resolved band).
    double covered(std::size_t p) const { return covered_[p]; }
    // Low-pass multiplier Phi(2^-m xi) at lattice bin p.
    double lowpass_weight(int m, std::size_t p) const {
        return lowpass_profile(std::ldexp(grid_.freq_radius(p), -m));
    }
    // Frequencies with 2^j_min <= |xi| <= 2^j_max carry an exact partition.
    bool resolved(std::size_t p) const {
        const double r = grid_.freq_radius(p);
        return r >= std::ldexp(1.0, j_min_) - 1e-12 && r <= std::ldexp(1.0, j_max_) + 1e-12;
    }

private:
    TorusGrid grid_;
    int j_min_;
    int j_max_;
    std::vector<std::vector<double>> phi_hat_;
    std::vector<double> covered_;
};

inline DyadicFilterBank build_filter_bank(const TorusGrid& grid, int j_min, int j_max) {
    return DyadicFilterBank(grid, j_min, j_max);
}

// Widest bank the grid resolves: blocks up to 2^(j_max+1) <= Nyquist radius.
inline DyadicFilterBank default_filter_bank(const TorusGrid& grid) {
    const int j_max = static_cast<int>(std::floor(std::log2(grid.nyquist_radius()) + 1e-12)) - 1;
    int j_min = static_cast<int>(std::floor(std::log2(grid.min_wavenumber()) + 1e-12));
    j_min = std::min(j_min, 0);
    return DyadicFilterBank(grid, j_min, j_max);
}

namespace detail {
inline GridField apply_multiplier(const GridField& f, std::span<const double> w) {
    GridField fs = to_spectral(f);
    for (int c = 0; c < fs.components(); ++c) {
        auto& data = fs.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) data[p] *= w[p];
    }
    return inverse_transform(fs);
}
}  // namespace detail

inline GridField dyadic_block(const GridField& f, int j, const DyadicFilterBank& bank) {
    return detail::apply_multiplier(f, bank.block_weights(j));
}

inline GridField low_freq_cutoff(const GridField& f, int m, const DyadicFilterBank& bank) {
    GridField fs = to_spectral(f);
    for (int c = 0; c < fs.components(); ++c) {
        auto& data = fs.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) data[p] *= bank.lowpass_weight(m, p);
    }
    return inverse_transform(fs);
}

inline GridField high_freq_remainder(const GridField& f, int m, const DyadicFilterBank& bank) {
    GridField fs = to_spectral(f);
    for (int c = 0; c < fs.components(); ++c) {
        auto& data = fs.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) data[p] *= 1.0 - bank.lowpass_weight(m, p);
    }
    return inverse_transform(fs);
}

struct BesovResult {
    double norm = 0.0;           // sum_j 2^{js} ||block_j f||_Lp over the resolved band
    double truncation_mass = 0.0;  // L^p mass the bank does not cover (incl. zero mode)
    double mean_mass = 0.0;        // |zero mode| separately (absent in homogeneous norms)
};

inline BesovResult besov_norm_full_joint(std::span<const GridField> fields, const BesovIndex& idx,
                                         const DyadicFilterBank& bank) {
    BesovResult r;
    std::vector<GridField> blocks;
    for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
        blocks.clear();
        for (const GridField& f : fields) blocks.push_back(dyadic_block(f, j, bank));
        r.norm += std::pow(2.0, idx.s * j) *
                  lp_norm_joint(std::span<const GridField>(blocks.data(), blocks.size()), idx.p);
    }
    // Uncovered remainder: multiplier (1 - sum_j phi_j).
    blocks.clear();
    for (const GridField& f : fields) {
        GridField fs = to_spectral(f);
        for (int c = 0; c < fs.components(); ++c) {
            auto& data = fs.spec_data(c);
            r.mean_mass += std::abs(data[0]);
            for (std::size_t p = 0; p < data.size(); ++p) data[p] *= 1.0 - bank.covered(p);
        }
        blocks.push_back(inverse_transform(fs));
    }
    r.truncation_mass = lp_norm_joint(std::span<const GridField>(blocks.data(), blocks.size()), idx.p);
    return r;
}

inline BesovResult besov_norm_full(const GridField& f, const BesovIndex& idx,
                                   const DyadicFilterBank& bank) {
    return besov_norm_full_joint(std::span<const GridField>(&f, 1), idx, bank);
}

inline double besov_norm(const GridField& f, const BesovIndex& idx, const DyadicFilterBank& bank) {
    return besov_norm_full(f, idx, bank).norm;
}

inline double besov_norm_joint(std::span<const GridField> fields, const BesovIndex& idx,
                               const DyadicFilterBank& bank) {
    return besov_norm_full_joint(fields, idx, bank).norm;
}

}  // namespace cnslab
