// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random streams. Hand-rolled splitmix64 so that seeded runs
// are byte-identical across platforms and standard-library versions.

#pragma once

#include <array>
#include <cstdint>

#include "cnslab/field.hpp"
#include "cnslab/spectral.hpp"

namespace cnslab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix_u64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
// Stateless hash of (key, component, frequency vector) -> uniform in [0,1).
inline double keyed_uniform(std::uint64_t key, int comp, const std::array<int, 3>& k, int slot) {
    std::uint64_t h = key;
    h = mix_u64(h ^ (0x100000001b3ULL * static_cast<std::uint64_t>(comp + 7)));
    for (int d = 0; d < 3; ++d)
        h = mix_u64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(k[static_cast<std::size_t>(d)]) + 0x7fffffff));
    h = mix_u64(h ^ static_cast<std::uint64_t>(slot + 13));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}
}  // namespace detail

// Random real field band-limited to |k|_axis <= max_index, with coefficient
// magnitudes ~ (1+|k|)^(-decay); zero mean.
inline GridField random_band_limited(const TorusGrid& g, Rank rank, int max_index, double decay,
                                     Rng& rng, double amplitude = 1.0) {
    GridField out(g, rank, Repr::spectral);
    const int n = g.points_per_axis();
    for (int c = 0; c < out.components(); ++c) {
        auto& data = out.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto k = g.freq_indices(p);
            bool in_band = true;
            double r2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const int kd = k[static_cast<std::size_t>(d)];
                if (std::abs(kd) > max_index || kd == -n / 2) in_band = false;
                r2 += static_cast<double>(kd) * kd;
            }
            if (!in_band || r2 == 0.0) continue;
            const double mag = amplitude * std::pow(1.0 + std::sqrt(r2), -decay);
            data[p] = cplx(rng.uniform(-mag, mag), rng.uniform(-mag, mag));
        }
    }
    // Symmetrize so the field is real: f(k) <- (f(k) + conj(f(-k)))/2.
    for (int c = 0; c < out.components(); ++c) {
        auto& data = out.spec_data(c);
        std::vector<cplx> sym(data.size());
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto idx = g.unflatten(p);
            std::array<int, 3> neg{0, 0, 0};
            for (int d = 0; d < g.dim(); ++d)
                neg[static_cast<std::size_t>(d)] = (n - idx[static_cast<std::size_t>(d)]) % n;
            sym[p] = 0.5 * (data[p] + std::conj(data[g.flatten(neg)]));
        }
        data = std::move(sym);
    }
    return inverse_transform(out);
}

// Same distribution as random_band_limited but every coefficient is a pure
// function of (key, component, frequency vector): the same continuous field
// is reproduced at any resolution that resolves the band.
inline GridField random_band_limited_keyed(const TorusGrid& g, Rank rank, int max_index,
                                           double decay, std::uint64_t key, double amplitude = 1.0) {
    GridField out(g, rank, Repr::spectral);
    const int n = g.points_per_axis();
    for (int c = 0; c < out.components(); ++c) {
        auto& data = out.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto k = g.freq_indices(p);
            bool in_band = true;
            double r2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const int kd = k[static_cast<std::size_t>(d)];
                if (std::abs(kd) > max_index || kd == -n / 2) in_band = false;
                r2 += static_cast<double>(kd) * kd;
            }
            if (!in_band || r2 == 0.0) continue;
            if (g.dim() == 2) k[2] = 0;
            const double mag = amplitude * std::pow(1.0 + std::sqrt(r2), -decay);
            const double u0 = detail::keyed_uniform(key, c, k, 0);
            const double u1 = detail::keyed_uniform(key, c, k, 1);
            data[p] = cplx(mag * (2.0 * u0 - 1.0), mag * (2.0 * u1 - 1.0));
        }
    }
    for (int c = 0; c < out.components(); ++c) {
        auto& data = out.spec_data(c);
        std::vector<cplx> sym(data.size());
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto idx = g.unflatten(p);
            std::array<int, 3> neg{0, 0, 0};
            for (int d = 0; d < g.dim(); ++d)
                neg[static_cast<std::size_t>(d)] = (n - idx[static_cast<std::size_t>(d)]) % n;
            sym[p] = 0.5 * (data[p] + std::conj(data[g.flatten(neg)]));
        }
        data = std::move(sym);
    }
    return inverse_transform(out);
}

}  // namespace cnslab
