// SPDX-License-Identifier: Apache-2.0
//
// Randomized numerical checks of the harmonic-analysis inequalities the
// solver leans on: product law, composition, two commutator estimates, and
// the dyadic Bernstein property. Each suite reports the observed left/right
// ratio per trial (the empirical constant); it never asserts a specific
// constant, only finiteness and stability across trials and resolutions.

#pragma once

#include <string>

#include "cnslab/rng.hpp"
#include "cnslab/time_norms.hpp"

namespace cnslab {

enum class EstimateKind { product, composition, commutator_comm1, commutator_comm2, bernstein };

inline const char* to_string(EstimateKind k) {
    switch (k) {
        case EstimateKind::product: return "product";
        case EstimateKind::composition: return "composition";
        case EstimateKind::commutator_comm1: return "commutator_comm1";
        case EstimateKind::commutator_comm2: return "commutator_comm2";
        case EstimateKind::bernstein: return "bernstein";
    }
    return "?";
}

struct EstimateParams {
    double sigma = 0.0;  // target regularity (s for composition)
    double nu = 0.0;
    double p = 2.0;
    int band = 8;        // absolute band of the random fields, resolution-independent
    double amplitude = 0.1;
};

struct RatioRow {
    std::string kind;
    int trial;
    int resolution;
    double lhs;
    double rhs;
    double ratio;
};

struct RatioReport {
    std::vector<RatioRow> rows;
    double max_ratio = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();

    void add(RatioRow row) {
        if (row.rhs != 0.0) {
            max_ratio = std::max(max_ratio, row.ratio);
            min_ratio = std::min(min_ratio, row.ratio);
        }
        rows.push_back(std::move(row));
    }
};

namespace detail {

inline void check_estimate_indices(EstimateKind kind, const EstimateParams& prm, int n) {
    const double np = n / prm.p;
    const double npp = n - np;  // n/p'
    switch (kind) {
        case EstimateKind::product:
            if (prm.nu < 0.0 || prm.sigma <= -std::min(np, npp) || prm.sigma > np - prm.nu + 1e-12)
                throw std::invalid_argument("product law requires nu>=0, -min(n/p,n/p') < sigma <= n/p - nu");
            break;
        case EstimateKind::composition:
            if (prm.sigma <= 0.0) throw std::invalid_argument("composition requires s > 0");
            break;
        case EstimateKind::commutator_comm1:
            if (prm.nu < 0.0 || prm.nu > np || prm.sigma <= -std::min(np, npp) - 1.0 ||
                prm.sigma > np - prm.nu + 1e-12)
                throw std::invalid_argument("comm1 requires 0<=nu<=n/p, -min(n/p,n/p')-1 < sigma <= n/p - nu");
            break;
        case EstimateKind::commutator_comm2:
            if (prm.nu < 0.0 || prm.sigma <= -std::min(np, npp) - 1.0 || prm.sigma > np - prm.nu + 1e-12)
                throw std::invalid_argument("comm2 requires nu>=0, -min(n/p,n/p')-1 < sigma <= n/p - nu");
            break;
        case EstimateKind::bernstein:
            break;
    }
}

// Degree-0 Fourier multiplier xi_1 xi_2 / |xi|^2 (a Riesz-type operator).
inline GridField riesz_multiplier(const GridField& f) {
    GridField fs = to_spectral(f);
    const TorusGrid& g = f.grid();
    for (int c = 0; c < fs.components(); ++c) {
        auto& data = fs.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto k = g.freq_indices(p);
            const double k1 = kTwoPi / g.period(0) * k[0];
            const double k2 = kTwoPi / g.period(1) * k[1];
            double r2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const double w = kTwoPi / g.period(d) * k[static_cast<std::size_t>(d)];
                r2 += w * w;
            }
            data[p] = r2 == 0.0 ? cplx(0.0, 0.0) : data[p] * (k1 * k2 / r2);
        }
    }
    return inverse_transform(fs);
}

}  // namespace detail

// Sampled operator norm of h -> f*h on the Besov space: the supremum of
// ||f h|| / ||h|| over seeded random band-limited test fields. A surrogate
// for the multiplier-space norm, which is not computable exactly.
inline double multiplier_norm_sample(const GridField& f, const BesovIndex& idx,
                                     const DyadicFilterBank& bank, int trials, std::uint64_t seed,
                                     int band = 8) {
    double sup = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t key = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(trial);
        GridField h = random_band_limited_keyed(f.grid(), Rank::scalar, band, 1.0, key ^ 0xAB);
        const double den = besov_norm(h, idx, bank);
        if (den < 1e-14) continue;
        sup = std::max(sup, besov_norm(dealias_phys(multiply(f, h)), idx, bank) / den);
    }
    return sup;
}

inline RatioReport verify_estimates(EstimateKind kind, int trials, const EstimateParams& prm,
                                    const DyadicFilterBank& bank, std::uint64_t seed) {
    const TorusGrid& g = bank.grid();
    const int n = g.dim();
    detail::check_estimate_indices(kind, prm, n);
    const int res = g.points_per_axis();
    RatioReport rep;

    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t key = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(trial);
        switch (kind) {
            case EstimateKind::product: {
                const BesovIndex iu(n / prm.p - prm.nu, prm.p, n);
                const BesovIndex iv(prm.sigma + prm.nu, prm.p, n);
                const BesovIndex is(prm.sigma, prm.p, n);
                GridField u = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x11, prm.amplitude);
                GridField v = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x22, prm.amplitude);
                const double lhs = besov_norm(dealias_phys(multiply(u, v)), is, bank);
                const double rhs = besov_norm(u, iu, bank) * besov_norm(v, iv, bank);
                rep.add({to_string(kind), trial, res, lhs, rhs, rhs == 0.0 ? 0.0 : lhs / rhs});
                break;
            }
            case EstimateKind::composition: {
                const BesovIndex is(prm.sigma, prm.p, n);
                GridField a = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x33, prm.amplitude);
                GridField fa = dealias_phys(multiply(a, a));  // F(a) = a^2, F(0) = 0
                const double lhs = besov_norm(fa, is, bank);
                const double rhs = besov_norm(a, is, bank);
                rep.add({to_string(kind), trial, res, lhs, rhs, rhs == 0.0 ? 0.0 : lhs / rhs});
                break;
            }
            case EstimateKind::commutator_comm1: {
                const BesovIndex ia(n / prm.p - prm.nu, prm.p, n);
                const BesovIndex iw(prm.sigma + prm.nu, prm.p, n);
                GridField a = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x44, prm.amplitude);
                GridField w = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x55, prm.amplitude);
                GridField aw = dealias_phys(multiply(a, w));
                double lhs = 0.0;
                for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
                    GridField comm = multiply(a, dyadic_block(w, j, bank));
                    comm -= dyadic_block(aw, j, bank);
                    double worst_k = 0.0;
                    for (int kdir = 0; kdir < n; ++kdir) {
                        GridField dcomm = inverse_transform(partial_derivative(comm, 0, kdir));
                        worst_k = std::max(worst_k, lp_norm(dcomm, prm.p));
                    }
                    lhs += std::pow(2.0, prm.sigma * j) * worst_k;
                }
                const double rhs = besov_norm(gradient(a), ia, bank) * besov_norm(w, iw, bank);
                rep.add({to_string(kind), trial, res, lhs, rhs, rhs == 0.0 ? 0.0 : lhs / rhs});
                break;
            }
            case EstimateKind::commutator_comm2: {
                const BesovIndex iq(n / prm.p - prm.nu, prm.p, n);
                const BesovIndex iw(prm.sigma + prm.nu, prm.p, n);
                const BesovIndex is1(prm.sigma + 1.0, prm.p, n);
                GridField q = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x66, prm.amplitude);
                GridField w = random_band_limited_keyed(g, Rank::scalar, prm.band, 1.5, key ^ 0x77, prm.amplitude);
                GridField comm = detail::riesz_multiplier(dealias_phys(multiply(q, w)));
                comm -= dealias_phys(multiply(q, detail::riesz_multiplier(w)));
                comm *= -1.0;  // [A(D), q] w = A(D)(qw) - q A(D)w, sign irrelevant for norms
                const double lhs = besov_norm(comm, is1, bank);
                const double rhs = besov_norm(gradient(q), iq, bank) * besov_norm(w, iw, bank);
                rep.add({to_string(kind), trial, res, lhs, rhs, rhs == 0.0 ? 0.0 : lhs / rhs});
                break;
            }
            case EstimateKind::bernstein: {
                GridField u = random_band_limited_keyed(g, Rank::scalar,
                                                        static_cast<int>(std::ldexp(1.0, bank.j_max())),
                                                        0.2, key ^ 0x88, prm.amplitude);
                for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
                    GridField bj = dyadic_block(u, j, bank);
                    const double den = std::pow(2.0, j) * lp_norm(bj, prm.p);
                    if (den < 1e-14) continue;
                    const double num = lp_norm(gradient(bj), prm.p);
                    rep.add({to_string(kind), trial, res, num, den, num / den});
                }
                break;
            }
        }
    }
    return rep;
}

}  // namespace cnslab
