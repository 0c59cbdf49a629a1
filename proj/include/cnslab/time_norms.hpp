// SPDX-License-Identifier: Apache-2.0
//
// Trajectories of fields on a uniform time grid and the solution-space norm
//   ||(v,psi)|| = sup_t B^{n/p-1}(v) + int_0^T [B^{n/p-1}(dt v) + B^{n/p-1}(hess v)]
//               + sup_t B^{n/p-2}(psi) + int_0^T [B^{n/p-2}(dt psi) + B^{n/p-2}(hess psi)]
// with second-order finite differences in time and trapezoidal quadrature.

#pragma once

#include <optional>

#include "cnslab/littlewood_paley.hpp"

namespace cnslab {

struct Timeline {
    std::vector<double> times;
    std::vector<GridField> fields;

    std::size_t steps() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double dt() const {
        if (times.size() < 2) throw std::logic_error("Timeline: need at least two samples");
        return times[1] - times[0];
    }
    double span() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    const GridField& at(std::size_t i) const { return fields.at(i); }

    void push(double t, GridField f) {
        if (!times.empty()) {
            if (t <= times.back()) throw std::logic_error("Timeline: times must increase");
            if (times.size() >= 2) {
                const double d0 = times[1] - times[0];
                if (std::abs((t - times.back()) - d0) > 1e-10 * std::max(1.0, d0))
                    throw std::logic_error("Timeline: non-uniform step");
            }
            fields.front().require_same_grid(f);
        }
        times.push_back(t);
        fields.push_back(std::move(f));
    }

    void require_same_times(const Timeline& o) const {
        if (times.size() != o.times.size()) throw std::logic_error("Timeline: mismatched time grids");
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - o.times[i]) > 1e-12 * std::max(1.0, std::abs(times[i])))
                throw std::logic_error("Timeline: mismatched time grids");
    }
};

inline Timeline difference(const Timeline& a, const Timeline& b) {
    a.require_same_times(b);
    Timeline d;
    d.times = a.times;
    d.fields.reserve(a.fields.size());
    for (std::size_t i = 0; i < a.fields.size(); ++i) d.fields.push_back(a.fields[i] - b.fields[i]);
    return d;
}

// Second-order time derivative samples (central inside, one-sided at ends).
inline Timeline time_derivative(const Timeline& tl) {
    if (tl.steps() < 3) throw std::logic_error("time_derivative: need >= 3 samples");
    const double dt = tl.dt();
    Timeline out;
    out.times = tl.times;
    out.fields.reserve(tl.steps());
    const std::size_t m = tl.steps() - 1;
    for (std::size_t i = 0; i <= m; ++i) {
        GridField d(tl.fields[0].grid(), tl.fields[0].rank(), tl.fields[0].repr());
        if (i == 0) {
            d.axpy(-1.5 / dt, tl.fields[0]);
            d.axpy(2.0 / dt, tl.fields[1]);
            d.axpy(-0.5 / dt, tl.fields[2]);
        } else if (i == m) {
            d.axpy(1.5 / dt, tl.fields[m]);
            d.axpy(-2.0 / dt, tl.fields[m - 1]);
            d.axpy(0.5 / dt, tl.fields[m - 2]);
        } else {
            d.axpy(0.5 / dt, tl.fields[i + 1]);
            d.axpy(-0.5 / dt, tl.fields[i - 1]);
        }
        out.fields.push_back(std::move(d));
    }
    return out;
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (t[i + 1] - t[i]) * (v[i] + v[i + 1]);
    return s;
}

struct EpNormBreakdown {
    double sup_u = 0.0;
    double int_dt_u = 0.0;
    double int_hess_u = 0.0;
    double sup_K = 0.0;
    double int_dt_K = 0.0;
    double int_hess_K = 0.0;
    double total() const { return sup_u + int_dt_u + int_hess_u + sup_K + int_dt_K + int_hess_K; }
};

namespace detail {
inline double besov_of_hessian(const GridField& f, const BesovIndex& idx, const DyadicFilterBank& bank) {
    std::vector<GridField> h = hessian(f);
    return besov_norm_joint(std::span<const GridField>(h.data(), h.size()), idx, bank);
}
}  // namespace detail

inline EpNormBreakdown ep_norm_full(const Timeline& u, const Timeline& K, double p,
                                    const DyadicFilterBank& bank) {
    u.require_same_times(K);
    const int n = bank.grid().dim();
    const BesovIndex su(static_cast<double>(n) / p - 1.0, p, n);
    const BesovIndex sK(static_cast<double>(n) / p - 2.0, p, n);
    EpNormBreakdown r;
    std::vector<double> bu, bK, hu, hK;
    for (std::size_t i = 0; i < u.steps(); ++i) {
        r.sup_u = std::max(r.sup_u, besov_norm(u.fields[i], su, bank));
        r.sup_K = std::max(r.sup_K, besov_norm(K.fields[i], sK, bank));
        hu.push_back(detail::besov_of_hessian(u.fields[i], su, bank));
        hK.push_back(detail::besov_of_hessian(K.fields[i], sK, bank));
    }
    Timeline du = time_derivative(u);
    Timeline dK = time_derivative(K);
    for (std::size_t i = 0; i < u.steps(); ++i) {
        bu.push_back(besov_norm(du.fields[i], su, bank));
        bK.push_back(besov_norm(dK.fields[i], sK, bank));
    }
    r.int_dt_u = trapezoid(u.times, bu);
    r.int_dt_K = trapezoid(K.times, bK);
    r.int_hess_u = trapezoid(u.times, hu);
    r.int_hess_K = trapezoid(K.times, hK);
    return r;
}

inline double ep_norm(const Timeline& u, const Timeline& K, double p, const DyadicFilterBank& bank) {
    return ep_norm_full(u, K, p, bank).total();
}

// int_0^T || D v ||_{B^{n/p}_{p,1}} dt, the flow smallness monitor.
inline double smallness_integral(const Timeline& v, double p, const DyadicFilterBank& bank) {
    const int n = bank.grid().dim();
    const BesovIndex s(static_cast<double>(n) / p, p, n);
    std::vector<double> vals;
    for (const GridField& f : v.fields) vals.push_back(besov_norm(jacobian(f), s, bank));
    return trapezoid(v.times, vals);
}

}  // namespace cnslab
