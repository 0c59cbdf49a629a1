// SPDX-License-Identifier: Apache-2.0
//
// Direct Eulerian solver for the total-energy formulation, used to
// cross-validate the Lagrangian path. The evolved variables are the conserved
// triple (rho, m = rho u, E): every right-side term is an exact spectral
// divergence, so the discrete integrals of all three are conserved to
// roundoff. Time stepping matches the Lagrangian solver's IMEX class
// (Crank-Nicolson on mean-coefficient diffusion, AB2 on the rest).

#pragma once

#include "cnslab/picard.hpp"

namespace cnslab {

struct EulerianState {
    GridField rho;
    GridField u;
    GridField E;
    double t = 0.0;

    GridField theta() const {
        GridField th = divide(E, rho);
        th.axpy(-0.5, vec_dot(u, u));
        return th;
    }
    void validate() const {
        for (double v : rho.real_data(0))
            if (!(v > 0.0)) throw vacuum_error("EulerianState: vacuum or negative density");
    }
};

struct EulerianRhs {
    GridField drho;  // d_t rho
    GridField dmom;  // d_t (rho u)
    GridField dE;    // d_t E
};

namespace detail {

inline GridField viscous_stress_of(const GridField& u, const GridField& rho,
                                   const ConstitutiveLaw& law) {
    GridField mu_f = dealias_phys(apply_pointwise(rho, law.mu));
    GridField lam_f = dealias_phys(apply_pointwise(rho, law.lambda));
    GridField T = multiply(mu_f, deformation(u));
    T *= 2.0;
    T += scalar_times_identity(multiply(lam_f, divergence(u)));
    return dealias_phys(T);
}

inline GridField outer_product(const GridField& a, const GridField& b) {
    const int n = a.grid().dim();
    GridField out(a.grid(), Rank::matrix, Repr::physical);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto& d = out.real_mat(i, j);
            const auto& ai = a.real_data(i);
            const auto& bj = b.real_data(j);
            for (std::size_t p = 0; p < d.size(); ++p) d[p] = ai[p] * bj[p];
        }
    return out;
}

}  // namespace detail

// Right side of the conserved-variable system, all products dealiased.
inline EulerianRhs eulerian_rhs(const EulerianState& s, const ConstitutiveLaw& law) {
    s.validate();
    law.require_admissible(s.rho);
    const TorusGrid& g = s.rho.grid();
    GridField m = dealias_phys(multiply(s.rho, s.u));
    GridField theta = dealias_phys(s.theta());

    EulerianRhs rhs{scalar_field(g), vector_field(g), scalar_field(g)};
    rhs.drho = divergence(m);
    rhs.drho *= -1.0;

    GridField tau = detail::viscous_stress_of(s.u, s.rho, law);
    GridField P = pressure_eulerian(law, s.rho, theta);
    rhs.dmom = divergence(dealias_phys(detail::outer_product(m, s.u)));
    rhs.dmom *= -1.0;
    rhs.dmom -= gradient(P);
    rhs.dmom += divergence(tau);

    // E flux: k grad(E/rho) + tau.u - k grad(|u|^2/2) - u pi0 - u theta pi1 - u E
    GridField k_f = dealias_phys(apply_pointwise(s.rho, law.k));
    GridField flux = dealias_phys(multiply(k_f, gradient(dealias_phys(divide(s.E, s.rho)))));
    GridField usq = vec_dot(s.u, s.u);
    usq *= 0.5;
    flux -= dealias_phys(multiply(k_f, gradient(dealias_phys(usq))));
    flux += dealias_phys(mat_vec(tau, s.u));
    flux -= dealias_phys(multiply(dealias_phys(apply_pointwise(s.rho, law.pi0)), s.u));
    GridField theta_pi1 = dealias_phys(multiply(theta, apply_pointwise(s.rho, law.pi1)));
    flux -= dealias_phys(multiply(theta_pi1, s.u));
    flux -= dealias_phys(multiply(s.E, s.u));
    rhs.dE = divergence(flux);
    return rhs;
}

// Temperature-form right side d_t theta of the same system, kept as an
// algebraic cross-check of the energy bookkeeping (never integrated).
inline GridField theta_form_rhs(const EulerianState& s, const ConstitutiveLaw& law) {
    s.validate();
    GridField theta = dealias_phys(s.theta());
    GridField k_f = dealias_phys(apply_pointwise(s.rho, law.k));
    GridField heat = divergence(dealias_phys(multiply(k_f, gradient(theta))));
    GridField tau = detail::viscous_stress_of(s.u, s.rho, law);
    GridField dissipation = dealias_phys(trace_contract(tau, jacobian(s.u)));
    GridField P = pressure_eulerian(law, s.rho, theta);
    GridField compression = dealias_phys(multiply(P, divergence(s.u)));

    GridField adv = scalar_field(s.rho.grid());
    GridField gtheta = gradient(theta);
    adv = vec_dot(s.u, gtheta);
    GridField out = heat;
    out -= compression;
    out += dissipation;
    out = dealias_phys(divide(out, s.rho));
    out -= dealias_phys(adv);
    return out;
}

struct EulerianTrajectory {
    Timeline rho;
    Timeline u;
    Timeline E;
};

inline EulerianTrajectory integrate_eulerian(const EulerianState& initial,
                                             const ConstitutiveLaw& law, double T, double dt) {
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("integrate_eulerian: need dt>0, T>=dt");
    const int steps = static_cast<int>(std::llround(T / dt));
    if (std::abs(steps * dt - T) > 1e-9 * T)
        throw std::invalid_argument("integrate_eulerian: T must be a multiple of dt");
    initial.validate();
    const TorusGrid& g = initial.rho.grid();
    detail::ModeTables mt(g);

    // mean-coefficient implicit operators frozen at the initial state
    const double abar = mean(apply_pointwise(initial.rho, [](double r) { return 1.0 / r; }));
    const double mubar = mean(dealias_phys(apply_pointwise(initial.rho, law.mu)));
    const double lambar = mean(dealias_phys(apply_pointwise(initial.rho, law.lambda)));
    const double kcbar = mean(dealias_phys(apply_pointwise(initial.rho, law.k))) * abar;
    const double c_mu = 0.5 * dt * abar * mubar;
    const double c_visc2 = 0.5 * dt * abar * (2.0 * mubar + lambar);
    const double ck = 0.5 * dt * kcbar;

    struct Conserved {
        GridField rho, m, E;
    };
    auto to_state = [&](const Conserved& c, double t) {
        EulerianState s{c.rho, dealias_phys(divide(c.m, c.rho)), c.E, t};
        return s;
    };
    // explicit remainders (full rhs minus the implicit constant-coefficient parts)
    auto remainders = [&](const Conserved& c, double t) {
        EulerianState s = to_state(c, t);
        EulerianRhs rhs = eulerian_rhs(s, law);
        Conserved r{rhs.drho, rhs.dmom, rhs.dE};
        r.m -= detail::lame_const(c.m, abar, mubar, lambar, mt);
        r.E.axpy(-kcbar, laplacian(c.E));
        return r;
    };
    auto cn_step = [&](const Conserved& c, const Conserved& r_now, const Conserved& r_prev,
                       bool startup) {
        Conserved next{c.rho, c.m, c.E};
        auto combo = [&](const GridField& rn, const GridField& rp) {
            GridField x = rn;
            if (startup) {
                x *= 0.5;
                x.axpy(0.5, rp);  // trapezoid corrector weights
            } else {
                x *= 1.5;
                x.axpy(-0.5, rp);
            }
            return x;
        };
        next.rho.axpy(dt, combo(r_now.rho, r_prev.rho));
        GridField rhs_m = c.m;
        rhs_m.axpy(0.5 * dt, detail::lame_const(c.m, abar, mubar, lambar, mt));
        rhs_m.axpy(dt, combo(r_now.m, r_prev.m));
        next.m = detail::cn_solve_vector(rhs_m, c_mu, c_visc2, mt);
        GridField rhs_E = c.E;
        rhs_E.axpy(0.5 * dt * kcbar, laplacian(c.E));
        rhs_E.axpy(dt, combo(r_now.E, r_prev.E));
        next.E = detail::cn_solve_scalar(rhs_E, ck, mt);
        return next;
    };

    EulerianTrajectory traj;
    Conserved state{dealias_phys(initial.rho), dealias_phys(multiply(initial.rho, initial.u)),
                    dealias_phys(initial.E)};
    traj.rho.push(0.0, state.rho);
    traj.u.push(0.0, dealias_phys(initial.u));
    traj.E.push(0.0, state.E);

    Conserved R_prev = remainders(state, 0.0);
    const double scale0 = state.m.max_abs() + state.E.max_abs() + state.rho.max_abs();
    for (int i = 0; i < steps; ++i) {
        const double t = dt * i;
        Conserved R_now = (i == 0) ? R_prev : remainders(state, t);
        Conserved next{state.rho, state.m, state.E};
        if (i == 0) {
            // predictor (Euler on remainders: trapezoid weights with itself),
            // then corrector (trapezoid with the predicted remainder)
            Conserved pred = cn_step(state, R_now, R_now, true);
            Conserved R_pred = remainders(pred, t + dt);
            next = cn_step(state, R_pred, R_now, true);
        } else {
            next = cn_step(state, R_now, R_prev, false);
        }
        for (double v : next.rho.real_data(0))
            if (!(v > 0.0))
                throw vacuum_error("integrate_eulerian: vacuum at t=" + std::to_string(t + dt));
        const double norm_now = next.m.max_abs() + next.E.max_abs();
        const double norm_before = state.m.max_abs() + state.E.max_abs();
        detail::check_step_growth(norm_now, norm_before, 0.0, scale0, "eulerian");
        R_prev = std::move(R_now);
        state = std::move(next);
        EulerianState s = to_state(state, t + dt);
        traj.rho.push(t + dt, state.rho);
        traj.u.push(t + dt, s.u);
        traj.E.push(t + dt, state.E);
    }
    return traj;
}

// --- Eulerian vs Lagrangian cross-validation --------------------------------

struct EquivalenceRow {
    double time;
    std::string field;  // rho | u | E
    double max_diff;
    double besov_diff;
    int resolution;
};

struct EquivalenceReport {
    std::vector<EquivalenceRow> rows;
    bool lagrangian_converged = false;
    std::string lagrangian_error;
    std::string eulerian_error;
    double smallness_lagrangian = 0.0;  // int ||D u_bar||
    double smallness_eulerian = 0.0;    // int ||grad u||
    bool smallness_ok = true;
    bool functional_range_ok = true;    // 1 < p < n with n >= 3 (annotation only)
    double max_discrepancy = 0.0;
    double T = 0.0;

    double max_diff_of(const std::string& field) const {
        double m = 0.0;
        for (const auto& r : rows)
            if (r.field == field) m = std::max(m, r.max_diff);
        return m;
    }
};

// Runs both solvers from the same (rho0, u0, theta0), pushes the Lagrangian
// solution forward through X^-1, and reports per-field discrepancies at a
// fixed set of output times.
inline EquivalenceReport equivalence_experiment(const GridField& rho0, const GridField& u0,
                                                const GridField& theta0, const ConstitutiveLaw& law,
                                                const SolverConfig& cfg, const DyadicFilterBank& bank,
                                                int output_times = 4) {
    const TorusGrid& g = rho0.grid();
    const int n = g.dim();
    EquivalenceReport rep;
    rep.functional_range_ok = cfg.p < static_cast<double>(n) && n >= 3;

    GridField K0 = vec_dot(u0, u0);
    K0 *= 0.5;
    K0 += theta0;
    K0 = dealias_phys(multiply(rho0, K0));

    std::optional<PicardResult> lagr;
    try {
        lagr = picard_solve(rho0, u0, K0, law, cfg, bank);
        rep.lagrangian_converged = lagr->report.converged;
        rep.smallness_lagrangian = smallness_integral(lagr->u, cfg.p, bank);
    } catch (const std::exception& e) {
        rep.lagrangian_error = e.what();
    }
    const double T_run = lagr ? lagr->u.times.back() : cfg.T;
    rep.T = T_run;

    std::optional<EulerianTrajectory> euler;
    try {
        euler = integrate_eulerian({rho0, u0, K0, 0.0}, law, T_run, cfg.dt);
        rep.smallness_eulerian = smallness_integral(euler->u, cfg.p, bank);
    } catch (const std::exception& e) {
        rep.eulerian_error = e.what();
    }
    rep.smallness_ok = std::max(rep.smallness_eulerian, rep.smallness_lagrangian) <= cfg.smallness_c;
    if (!lagr || !euler) return rep;  // partial report

    const BesovIndex idx_rho(static_cast<double>(n) / cfg.p, cfg.p, n);
    const BesovIndex idx_u(static_cast<double>(n) / cfg.p - 1.0, cfg.p, n);
    const BesovIndex idx_E(static_cast<double>(n) / cfg.p - 2.0, cfg.p, n);
    std::vector<GridField> disp = cumulative_displacement(lagr->u);
    const std::size_t steps = lagr->u.steps() - 1;
    std::vector<std::size_t> picks;
    for (int q = 1; q <= output_times; ++q) {
        const std::size_t i = std::max<std::size_t>(1, steps * static_cast<std::size_t>(q) / output_times);
        if (picks.empty() || picks.back() != i) picks.push_back(i);
    }
    for (std::size_t i : picks) {
        const double t = lagr->u.times[i];
        FlowMap X = flow_map_from_displacement(disp[i], t);
        GridField inv = invert_flow(X);
        GridField rho_L = pushforward(divide(rho0, X.J), inv);
        GridField u_L = pushforward(lagr->u.fields[i], inv);
        GridField E_L = pushforward(divide(lagr->K.fields[i], X.J), inv);
        GridField d_rho = rho_L - euler->rho.fields[i];
        GridField d_u = u_L - euler->u.fields[i];
        GridField d_E = E_L - euler->E.fields[i];
        rep.rows.push_back({t, "rho", d_rho.max_abs(), besov_norm(d_rho, idx_rho, bank),
                            g.points_per_axis()});
        rep.rows.push_back({t, "u", d_u.max_abs(), besov_norm(d_u, idx_u, bank), g.points_per_axis()});
        rep.rows.push_back({t, "E", d_E.max_abs(), besov_norm(d_E, idx_E, bank), g.points_per_axis()});
        rep.max_discrepancy = std::max(
            {rep.max_discrepancy, d_rho.max_abs(), d_u.max_abs(), d_E.max_abs()});
    }
    return rep;
}

}  // namespace cnslab
