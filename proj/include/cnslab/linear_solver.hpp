// SPDX-License-Identifier: Apache-2.0
//
// The linear parabolic system behind the fixed-point map:
//
//   d_t u - rho0^-1 div(2 mu(rho0) D(u) + lambda(rho0) div u Id)
//        + rho0^-1 grad(rho0^-1 pi1(rho0) K) = f
//   d_t K - div(k(rho0) grad(rho0^-1 K)) = g
//
// solved K-equation first (it is autonomous), then the velocity equation with
// the pressure coupling as a known source. Time stepping is second-order
// IMEX: Crank-Nicolson on the constant-coefficient principal part (built from
// mean coefficients, diagonal per Fourier mode), Adams-Bashforth-2 on the
// variable-coefficient remainder, trapezoid on the known sources; the first
// step runs a predictor-corrector pass to stay second order.
//
// Internally the velocity equation advances the momentum density w = rho0*u,
// whose right side is a sum of exact spectral divergences and
// constant-coefficient operators; integrals of w and K are then conserved to
// roundoff regardless of the splitting. For rho0 = 1 this coincides with
// advancing u itself.

#pragma once

#include "cnslab/constitutive.hpp"
#include "cnslab/time_norms.hpp"

namespace cnslab {

struct solver_instability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time-independent fields and means derived from (rho0, law).
struct LinearCoefficients {
    GridField rho0;
    GridField inv_rho0;   // pointwise 1/rho0
    GridField mu_f;       // mu(rho0), dealiased
    GridField lambda_f;
    GridField k_f;
    GridField pi_c;       // rho0^-1 pi1(rho0), dealiased
    GridField c_f;        // dealiased 1/rho0 (heat-equation coefficient)
    double abar = 1.0;    // mean 1/rho0
    double mubar = 1.0;
    double lambdabar = 0.0;
    double kcbar = 1.0;   // mean k(rho0) * mean 1/rho0
    EllipticityConstants ellip{1.0, 1.0};
};

inline LinearCoefficients make_linear_coefficients(const GridField& rho0, const ConstitutiveLaw& law) {
    law.require_admissible(rho0);
    for (double v : rho0.real_data(0))
        if (!(v > 0.0)) throw vacuum_error("make_linear_coefficients: inf rho0 must be positive");
    LinearCoefficients co{rho0,
                          apply_pointwise(rho0, [](double r) { return 1.0 / r; }),
                          evaluate_coefficient(law, Coefficient::mu, rho0),
                          evaluate_coefficient(law, Coefficient::lambda, rho0),
                          evaluate_coefficient(law, Coefficient::k, rho0),
                          scalar_field(rho0.grid()),
                          scalar_field(rho0.grid())};
    co.pi_c = dealias_phys(apply_pointwise(rho0, [&](double r) { return law.pi1(r) / r; }));
    co.c_f = dealias_phys(co.inv_rho0);
    co.abar = mean(co.inv_rho0);
    co.mubar = mean(co.mu_f);
    co.lambdabar = mean(co.lambda_f);
    co.kcbar = mean(co.k_f) * co.abar;
    co.ellip = ellipticity_constants(law, rho0);
    if (!(co.ellip.alpha > 0.0) || !(co.ellip.beta > 0.0))
        throw std::invalid_argument("make_linear_coefficients: ellipticity constants must be positive");
    return co;
}

// Viscous stress 2 mu(rho0) D(u) + lambda(rho0) div u Id, dealiased.
inline GridField viscous_stress(const GridField& u, const LinearCoefficients& co) {
    GridField T = multiply(co.mu_f, deformation(u));
    T *= 2.0;
    GridField s = multiply(co.lambda_f, divergence(u));
    const int n = u.grid().dim();
    for (int i = 0; i < n; ++i) {
        auto& d = T.real_mat(i, i);
        const auto& sv = s.real_data(0);
        for (std::size_t p = 0; p < d.size(); ++p) d[p] += sv[p];
    }
    return dealias_phys(T);
}

// Heat flux k(rho0) grad(rho0^-1 K), dealiased.
inline GridField heat_flux(const GridField& K, const LinearCoefficients& co) {
    GridField cK = dealias_phys(multiply(co.c_f, K));
    return dealias_phys(multiply(co.k_f, gradient(cK)));
}

// Spatial part of L_{rho0}: -rho0^-1 div(2 mu D(u) + lambda div u Id).
inline GridField apply_L(const GridField& u, const GridField& rho0, const ConstitutiveLaw& law) {
    LinearCoefficients co = make_linear_coefficients(rho0, law);
    GridField out = multiply(co.inv_rho0, divergence(viscous_stress(u, co)));
    out *= -1.0;
    return dealias_phys(out);
}

// Spatial part of H_{rho0}: -div(k(rho0) grad(rho0^-1 K)).
inline GridField apply_H(const GridField& K, const GridField& rho0, const ConstitutiveLaw& law) {
    LinearCoefficients co = make_linear_coefficients(rho0, law);
    GridField out = divergence(heat_flux(K, co));
    out *= -1.0;
    return out;
}

namespace detail {

// Per-mode data for the implicit solves.
struct ModeTables {
    std::vector<double> xi2;                   // |xi|^2
    std::vector<std::array<double, 3>> xi;     // wavenumber vector
    explicit ModeTables(const TorusGrid& g) : xi2(g.total_points(), 0.0), xi(g.total_points()) {
        for (std::size_t p = 0; p < xi2.size(); ++p) {
            auto k = g.freq_indices(p);
            double s = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const double w = kTwoPi / g.period(d) * k[static_cast<std::size_t>(d)];
                xi[p][static_cast<std::size_t>(d)] = w;
                s += w * w;
            }
            xi2[p] = s;
        }
    }
};

// (1 + c*kappa*|xi|^2)^-1 applied spectrally (scalar CN solve).
inline GridField cn_solve_scalar(const GridField& rhs_phys, double c_kappa, const ModeTables& mt) {
    GridField rhs = forward_transform(rhs_phys);
    auto& data = rhs.spec_data(0);
    for (std::size_t p = 0; p < data.size(); ++p) data[p] /= 1.0 + c_kappa * mt.xi2[p];
    return inverse_transform(rhs);
}

// (Id + c*(mubar |xi|^2 Id + (mubar+lambdabar) xi xi^T))^-1 via the
// transverse/longitudinal projector split.
inline GridField cn_solve_vector(const GridField& rhs_phys, double c_mu, double c_visc2,
                                 const ModeTables& mt) {
    GridField rhs = forward_transform(rhs_phys);
    const int n = rhs.grid().dim();
    const std::size_t npts = rhs.size();
    for (std::size_t p = 0; p < npts; ++p) {
        cplx dot(0.0, 0.0);
        for (int d = 0; d < n; ++d) dot += rhs.spec_data(d)[p] * mt.xi[p][static_cast<std::size_t>(d)];
        const double x2 = mt.xi2[p];
        const double dent = 1.0 + c_mu * x2;
        const double denl = 1.0 + c_visc2 * x2;
        for (int d = 0; d < n; ++d) {
            const cplx v = rhs.spec_data(d)[p];
            const cplx vl = x2 == 0.0 ? cplx(0.0, 0.0) : dot * (mt.xi[p][static_cast<std::size_t>(d)] / x2);
            rhs.spec_data(d)[p] = (v - vl) / dent + vl / denl;
        }
    }
    return inverse_transform(rhs);
}

// abar*(mubar lap w + (mubar+lambdabar) grad div w), the implicit operator.
inline GridField lame_const(const GridField& w, double abar, double mubar, double lambdabar,
                            const ModeTables& mt) {
    GridField ws = forward_transform(w);
    const int n = w.grid().dim();
    const std::size_t npts = w.size();
    GridField out(w.grid(), Rank::vector, Repr::spectral);
    for (std::size_t p = 0; p < npts; ++p) {
        cplx dot(0.0, 0.0);
        for (int d = 0; d < n; ++d) dot += ws.spec_data(d)[p] * mt.xi[p][static_cast<std::size_t>(d)];
        for (int d = 0; d < n; ++d)
            out.spec_data(d)[p] = -abar * (mubar * mt.xi2[p] * ws.spec_data(d)[p] +
                                           (mubar + lambdabar) * dot * mt.xi[p][static_cast<std::size_t>(d)]);
    }
    return inverse_transform(out);
}

// Instability detector: a single step growing 10x, or cumulative geometric
// growth far beyond the data/source scale (slow CFL-type blowups never grow
// 10x in one implicit-damped step).
inline void check_step_growth(double now, double before, double explicit_part, double ref_scale,
                              const char* what) {
    if (now > 10.0 * (before + explicit_part) + 1e-300 || now > 1e8 * (ref_scale + 1e-300))
        throw solver_instability(std::string("time step unstable in the ") + what +
                                 " equation (norm growth exceeds the stability guard); reduce dt");
}

}  // namespace detail

struct LinearSolution {
    Timeline u;  // velocity trajectory
    Timeline K;  // total-energy trajectory
};

// f may be empty (zero forcing); otherwise it must be sampled at t_i = i*dt,
// i = 0..M with M = round(T/dt). Same for g.
inline LinearSolution solve_linear_LMK(const GridField& u0, const GridField& K0, const Timeline& f,
                                       const Timeline& g, const GridField& rho0,
                                       const ConstitutiveLaw& law, double dt, double T) {
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("solve_linear_LMK: need dt > 0, T >= dt");
    const TorusGrid& grid = rho0.grid();
    const int steps = static_cast<int>(std::llround(T / dt));
    if (std::abs(steps * dt - T) > 1e-9 * T)
        throw std::invalid_argument("solve_linear_LMK: T must be a multiple of dt");
    auto check_sources = [&](const Timeline& s) {
        if (s.empty()) return;
        if (static_cast<int>(s.steps()) != steps + 1)
            throw std::invalid_argument("solve_linear_LMK: source timeline does not match the step grid");
    };
    check_sources(f);
    check_sources(g);

    LinearCoefficients co = make_linear_coefficients(rho0, law);
    detail::ModeTables mt(grid);

    auto source_g = [&](int i) {
        return g.empty() ? scalar_field(grid) : g.fields[static_cast<std::size_t>(i)];
    };
    // Momentum-form velocity source rho0*f plus the pressure coupling
    // -grad(rho0^-1 pi1(rho0) K), all exact divergences/gradients.
    auto source_w = [&](int i, const GridField& K_at_i) {
        GridField s = gradient(dealias_phys(multiply(co.pi_c, K_at_i)));
        s *= -1.0;
        if (!f.empty()) s += dealias_phys(multiply(co.rho0, f.fields[static_cast<std::size_t>(i)]));
        return s;
    };

    // --- K equation first -----------------------------------------------
    auto remainder_K = [&](const GridField& K) {
        GridField r = divergence(heat_flux(K, co));
        GridField lap = laplacian(K);
        r.axpy(-co.kcbar, lap);
        return r;
    };
    Timeline K_traj;
    K_traj.push(0.0, dealias_phys(K0));
    {
        GridField K_prev = K_traj.fields[0];
        GridField R_prev = remainder_K(K_prev);
        const double ck = 0.5 * dt * co.kcbar;
        double ref_scale = K_prev.max_abs();
        for (int i = 0; i < steps; ++i) {
            GridField base = K_prev;
            base.axpy(0.5 * dt * co.kcbar, laplacian(K_prev));
            GridField gsum = source_g(i);
            gsum += source_g(i + 1);
            base.axpy(0.5 * dt, gsum);
            GridField R_now = (i == 0) ? R_prev : remainder_K(K_prev);
            GridField K_next(grid, Rank::scalar, Repr::physical);
            if (i == 0) {
                GridField rhs = base;
                rhs.axpy(dt, R_now);                      // predictor (IMEX Euler on remainder)
                GridField K_pred = detail::cn_solve_scalar(rhs, ck, mt);
                GridField rhs2 = base;                    // corrector (trapezoid on remainder)
                rhs2.axpy(0.5 * dt, R_now);
                rhs2.axpy(0.5 * dt, remainder_K(K_pred));
                K_next = detail::cn_solve_scalar(rhs2, ck, mt);
            } else {
                GridField rhs = base;
                rhs.axpy(1.5 * dt, R_now);
                rhs.axpy(-0.5 * dt, R_prev);
                K_next = detail::cn_solve_scalar(rhs, ck, mt);
            }
            const double gmax = dt * (source_g(i).max_abs() + source_g(i + 1).max_abs());
            ref_scale += gmax;
            detail::check_step_growth(K_next.max_abs(), K_prev.max_abs(), gmax, ref_scale, "energy");
            R_prev = std::move(R_now);  // remainder at step i, the AB2 history for step i+1
            K_prev = K_next;
            K_traj.push(dt * (i + 1), std::move(K_next));
        }
    }

    // --- velocity equation with the pressure coupling known --------------
    auto u_from_w = [&](const GridField& w) { return dealias_phys(multiply(co.inv_rho0, w)); };
    auto remainder_w = [&](const GridField& w) {
        GridField r = divergence(viscous_stress(u_from_w(w), co));
        r -= detail::lame_const(w, co.abar, co.mubar, co.lambdabar, mt);
        return r;
    };
    const double c_mu = 0.5 * dt * co.abar * co.mubar;
    const double c_visc2 = 0.5 * dt * co.abar * (2.0 * co.mubar + co.lambdabar);
    Timeline u_traj;
    u_traj.push(0.0, dealias_phys(u0));
    {
        GridField w_prev = dealias_phys(multiply(co.rho0, u_traj.fields[0]));
        GridField R_prev = remainder_w(w_prev);
        double ref_scale = w_prev.max_abs();
        for (int i = 0; i < steps; ++i) {
            GridField base = w_prev;
            base.axpy(0.5 * dt, detail::lame_const(w_prev, co.abar, co.mubar, co.lambdabar, mt));
            GridField ssum = source_w(i, K_traj.fields[static_cast<std::size_t>(i)]);
            ssum += source_w(i + 1, K_traj.fields[static_cast<std::size_t>(i + 1)]);
            base.axpy(0.5 * dt, ssum);
            GridField R_now = (i == 0) ? R_prev : remainder_w(w_prev);
            GridField w_next(grid, Rank::vector, Repr::physical);
            if (i == 0) {
                GridField rhs = base;
                rhs.axpy(dt, R_now);
                GridField w_pred = detail::cn_solve_vector(rhs, c_mu, c_visc2, mt);
                GridField rhs2 = base;
                rhs2.axpy(0.5 * dt, R_now);
                rhs2.axpy(0.5 * dt, remainder_w(w_pred));
                w_next = detail::cn_solve_vector(rhs2, c_mu, c_visc2, mt);
            } else {
                GridField rhs = base;
                rhs.axpy(1.5 * dt, R_now);
                rhs.axpy(-0.5 * dt, R_prev);
                w_next = detail::cn_solve_vector(rhs, c_mu, c_visc2, mt);
            }
            const double smax = dt * ssum.max_abs();
            ref_scale += smax;
            detail::check_step_growth(w_next.max_abs(), w_prev.max_abs(), smax, ref_scale, "velocity");
            R_prev = std::move(R_now);
            u_traj.push(dt * (i + 1), u_from_w(w_next));
            w_prev = std::move(w_next);
        }
    }
    return {std::move(u_traj), std::move(K_traj)};
}

}  // namespace cnslab
