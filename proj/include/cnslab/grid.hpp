// SPDX-License-Identifier: Apache-2.0
//
// Periodic isotropic collocation grid: n in {2,3}, power-of-two points per
// axis, symmetric integer frequency lattice.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnslab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class TorusGrid {
public:
    TorusGrid(int dim, int points_per_axis, double period = kTwoPi)
        : dim_(dim), n_(points_per_axis) {
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("TorusGrid: dim must be 2 or 3");
        if (n_ < 16 || (n_ & (n_ - 1)) != 0)
            throw std::invalid_argument("TorusGrid: points_per_axis must be a power of two >= 16");
        if (!(period > 0.0))
            throw std::invalid_argument("TorusGrid: period must be positive");
        period_.assign(static_cast<std::size_t>(dim_), period);
        total_ = 1;
        for (int d = 0; d < dim_; ++d) total_ *= static_cast<std::size_t>(n_);
    }

    int dim() const { return dim_; }
    int points_per_axis() const { return n_; }
    double period(int axis = 0) const { return period_[static_cast<std::size_t>(axis)]; }
    std::size_t total_points() const { return total_; }
    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < dim_; ++d) v *= period_[static_cast<std::size_t>(d)] / n_;
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (int d = 0; d < dim_; ++d) v *= period_[static_cast<std::size_t>(d)];
        return v;
    }
    double spacing(int axis = 0) const { return period(axis) / n_; }

    // Signed integer frequency index for FFT bin i on one axis, in [-N/2, N/2).
    int freq_index(int i) const { return i < n_ / 2 ? i : i - n_; }
    // Physical wavenumber for bin i on `axis`.
    double wavenumber(int i, int axis) const {
        return kTwoPi / period(axis) * freq_index(i);
    }
    int nyquist_index() const { return n_ / 2; }
    // Smallest nonzero |xi| on the lattice.
    double min_wavenumber() const {
        double m = kTwoPi / period(0);
        for (int d = 1; d < dim_; ++d) m = std::min(m, kTwoPi / period(d));
        return m;
    }
    // Largest axis wavenumber magnitude (Nyquist).
    double nyquist_radius() const {
        double m = kTwoPi / period(0) * (n_ / 2);
        for (int d = 1; d < dim_; ++d) m = std::min(m, kTwoPi / period(d) * (n_ / 2));
        return m;
    }

    // Row-major flattening, last axis fastest (FFTW layout).
    std::size_t flatten(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int d = 0; d < dim_; ++d) f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
        return f;
    }
    std::array<int, 3> unflatten(std::size_t f) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int d = dim_ - 1; d >= 0; --d) {
            idx[static_cast<std::size_t>(d)] = static_cast<int>(f % static_cast<std::size_t>(n_));
            f /= static_cast<std::size_t>(n_);
        }
        return idx;
    }
    // Physical coordinate of node idx.
    std::array<double, 3> coord(const std::array<int, 3>& idx) const {
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d)
            x[static_cast<std::size_t>(d)] = spacing(d) * idx[static_cast<std::size_t>(d)];
        return x;
    }
    // Signed frequency indices of spectral bin f.
    std::array<int, 3> freq_indices(std::size_t f) const {
        auto idx = unflatten(f);
        for (int d = 0; d < dim_; ++d) idx[static_cast<std::size_t>(d)] = freq_index(idx[static_cast<std::size_t>(d)]);
        return idx;
    }
    // |xi| of spectral bin f.
    double freq_radius(std::size_t f) const {
        auto k = freq_indices(f);
        double r2 = 0.0;
        for (int d = 0; d < dim_; ++d) {
            double w = kTwoPi / period(d) * k[static_cast<std::size_t>(d)];
            r2 += w * w;
        }
        return std::sqrt(r2);
    }

    bool operator==(const TorusGrid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && period_ == o.period_;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

private:
    int dim_;
    int n_;
    std::vector<double> period_;
    std::size_t total_ = 0;
};

}  // namespace cnslab
