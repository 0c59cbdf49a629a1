// SPDX-License-Identifier: Apache-2.0
//
// The nonlinear fixed-point machinery: the eight coupling terms I1..I8 built
// from the flow of the current velocity iterate, the map
//   Phi : (v, psi) -> solution (u, K) of the linear system with right sides
//   rho0^-1 div(I1+I2+I3+I4) and div(I5+I6+I7+I8),
// Picard iteration from the free linear solution (u_L, K_L) with contraction
// diagnostics and restart-on-stagnation (halving the horizon), and density
// reconstruction rho_bar = J^-1 rho0.

#pragma once

#include "cnslab/flow.hpp"
#include "cnslab/linear_solver.hpp"

namespace cnslab {

struct no_convergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lagrangian velocity trajectories live on uniform time grids.
using VelocityTimeline = Timeline;

// One time slice of the Lagrangian solution with its derived density.
struct LagrangianState {
    GridField rho0;     // time-independent
    GridField a0;       // rho0 - 1
    GridField u_bar;
    GridField K_bar;
    GridField rho_bar;  // J^-1 rho0 (so J rho_bar = rho0 identically)
    double t = 0.0;

    void validate(double vacuum_floor = 0.0) const {
        for (double v : rho0.real_data(0))
            if (!(v > vacuum_floor)) throw vacuum_error("LagrangianState: inf rho0 at the vacuum floor");
        for (double v : rho_bar.real_data(0))
            if (!(v > 0.0)) throw vacuum_error("LagrangianState: transported density touches vacuum");
    }
};

struct SolverConfig {
    double dt = 1e-3;
    double T = 0.05;
    double picard_tol = 1e-8;  // relative E_p tolerance on successive differences
    int max_picard = 30;
    double smallness_c = 0.1;       // c-tilde threshold on int ||Dv||
    std::optional<int> cutoff_m;    // frequency-cutoff index; nullopt = auto scan
    double eta = 1e-2;              // cutoff smallness factor
    double p = 2.0;                 // Besov integrability for all monitors

    void validate() const {
        if (!(dt > 0.0) || !(T >= dt) || !(picard_tol > 0.0) || max_picard < 1)
            throw std::invalid_argument("SolverConfig: need dt>0, T>=dt, picard_tol>0, max_picard>=1");
    }
};

struct ITerms {
    GridField I1, I2, I3, I4;  // matrix-valued, feed the velocity equation
    GridField I5, I6, I7, I8;  // vector-valued, feed the energy equation
};

namespace detail {

// Everything about one time slice of the iterate's flow.
struct FlowSlice {
    FlowMap X;
    GridField rho_tilde;  // J^-1 rho0, pointwise
};

inline FlowSlice make_flow_slice(const GridField& disp, double t, const GridField& rho0) {
    FlowSlice s{flow_map_from_displacement(disp, t), scalar_field(rho0.grid())};
    s.rho_tilde = divide(rho0, s.X.J);
    return s;
}

inline GridField scalar_times_identity(const GridField& s) {
    const int n = s.grid().dim();
    GridField out(s.grid(), Rank::matrix, Repr::physical);
    for (int i = 0; i < n; ++i) out.real_mat(i, i) = s.real_data(0);
    return out;
}

inline ITerms compute_I_terms_at(const FlowSlice& fs, const GridField& v, const GridField& psi,
                                 const LinearCoefficients& co, const ConstitutiveLaw& law) {
    const TorusGrid& g = v.grid();
    law.require_admissible(fs.rho_tilde);
    GridField mu_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.mu));
    GridField lam_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.lambda));
    GridField k_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.k));

    GridField DA = twisted_deformation(v, fs.X.A);
    GridField divA = twisted_divergence(v, fs.X.A);
    GridField adj_m_id = add_identity(fs.X.adjDX, -1.0);

    // twisted stress with composed coefficients
    GridField stress = multiply(mu_t, DA);
    stress *= 2.0;
    stress += scalar_times_identity(multiply(lam_t, divA));
    stress = dealias_phys(stress);

    ITerms terms{GridField(g, Rank::matrix, Repr::physical), GridField(g, Rank::matrix, Repr::physical),
                 GridField(g, Rank::matrix, Repr::physical), GridField(g, Rank::matrix, Repr::physical),
                 GridField(g, Rank::vector, Repr::physical), GridField(g, Rank::vector, Repr::physical),
                 GridField(g, Rank::vector, Repr::physical), GridField(g, Rank::vector, Repr::physical)};

    terms.I1 = dealias_phys(mat_mat(adj_m_id, stress));

    GridField dmu = mu_t - co.mu_f;
    GridField dlam = lam_t - co.lambda_f;
    terms.I2 = multiply(dmu, DA);
    terms.I2 *= 2.0;
    terms.I2 += scalar_times_identity(multiply(dlam, divA));
    terms.I2 = dealias_phys(terms.I2);

    GridField D_plain = dealias_phys(deformation(v));
    GridField div_plain = dealias_phys(divergence(v));
    GridField Ddiff = DA - D_plain;
    GridField divdiff = divA - div_plain;
    terms.I3 = multiply(co.mu_f, Ddiff);
    terms.I3 *= 2.0;
    terms.I3 += scalar_times_identity(multiply(co.lambda_f, divdiff));
    terms.I3 = dealias_phys(terms.I3);

    GridField P = pressure_lagrangian(law, fs.rho_tilde, psi, co.rho0, v);
    terms.I4 = multiply(P, fs.X.adjDX);
    terms.I4 *= -1.0;
    terms.I4 += scalar_times_identity(dealias_phys(multiply(co.pi_c, psi)));
    terms.I4 = dealias_phys(terms.I4);

    GridField M = dealias_phys(mat_mat(fs.X.adjDX, transpose(fs.X.A)));  // adj(DX) tA
    GridField kM = dealias_phys(multiply(k_t, M));
    GridField grad_psi_c = gradient(dealias_phys(multiply(co.c_f, psi)));
    GridField kM_minus = kM;
    {
        const int n = g.dim();
        for (int i = 0; i < n; ++i) {
            auto& d = kM_minus.real_mat(i, i);
            const auto& k0 = co.k_f.real_data(0);
            for (std::size_t p = 0; p < d.size(); ++p) d[p] -= k0[p];
        }
    }
    terms.I5 = dealias_phys(mat_vec(kM_minus, grad_psi_c));

    // I6 and I7 carry minus signs: the energy flux is
    //   k tA grad(K/rho0) - k tA grad(|u|^2/2) + tau.u - u P
    // (the kinetic correction comes from k grad theta = k grad(E/rho) -
    // k grad(|u|^2/2), the pressure work from -div(uP)), and the energy
    // equation reads H K = div(I5+I6+I7+I8).
    GridField vsq = vec_dot(v, v);
    vsq *= 0.5;
    terms.I6 = dealias_phys(mat_vec(kM, gradient(dealias_phys(vsq))));
    terms.I6 *= -1.0;

    terms.I7 = dealias_phys(multiply(P, dealias_phys(mat_vec(fs.X.adjDX, v))));
    terms.I7 *= -1.0;

    terms.I8 = dealias_phys(mat_vec(dealias_phys(mat_mat(fs.X.adjDX, stress)), v));
    return terms;
}

}  // namespace detail

// The eight coupling tensors at one time instant of the iterate (v, psi).
inline ITerms compute_I_terms(const Timeline& v_traj, const Timeline& psi_traj,
                              const GridField& rho0, const ConstitutiveLaw& law, double t) {
    v_traj.require_same_times(psi_traj);
    LinearCoefficients co = make_linear_coefficients(rho0, law);
    detail::FlowSlice fs{integrate_flow(v_traj, t), scalar_field(rho0.grid())};
    fs.rho_tilde = divide(rho0, fs.X.J);
    // locate the sample at time t for (v, psi)
    std::size_t idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_traj.steps(); ++i) {
        const double d = std::abs(v_traj.times[i] - t);
        if (d < best) {
            best = d;
            idx = i;
        }
    }
    if (best > 1e-9) throw std::invalid_argument("compute_I_terms: t must be a trajectory sample time");
    return detail::compute_I_terms_at(fs, v_traj.fields[idx], psi_traj.fields[idx], co, law);
}

// One application of the fixed-point map: assembles the right sides from the
// iterate's flow and solves the linear system with the original data.
inline LinearSolution apply_Phi(const Timeline& v_traj, const Timeline& psi_traj,
                                const GridField& rho0, const GridField& u0, const GridField& K0,
                                const ConstitutiveLaw& law, const SolverConfig& cfg) {
    cfg.validate();
    v_traj.require_same_times(psi_traj);
    if (std::abs(v_traj.times.front()) > 1e-12)
        throw std::invalid_argument("apply_Phi: trajectories must start at t = 0");
    LinearCoefficients co = make_linear_coefficients(rho0, law);
    std::vector<GridField> disp = cumulative_displacement(v_traj);
    Timeline f, g;
    for (std::size_t i = 0; i < v_traj.steps(); ++i) {
        detail::FlowSlice fs = detail::make_flow_slice(disp[i], v_traj.times[i], rho0);
        ITerms terms = detail::compute_I_terms_at(fs, v_traj.fields[i], psi_traj.fields[i], co, law);
        GridField msum = terms.I1;
        msum += terms.I2;
        msum += terms.I3;
        msum += terms.I4;
        GridField fi = dealias_phys(multiply(co.inv_rho0, divergence(msum)));
        f.push(v_traj.times[i], std::move(fi));
        GridField vsum = terms.I5;
        vsum += terms.I6;
        vsum += terms.I7;
        vsum += terms.I8;
        g.push(v_traj.times[i], divergence(vsum));
    }
    const double T = v_traj.times.back();
    return solve_linear_LMK(u0, K0, f, g, rho0, law, v_traj.dt(), T);
}

struct PicardIterationRow {
    int iter = 0;
    double ep_diff = 0.0;      // ||z_k - z_{k-1}||_{E_p}
    double ratio = 0.0;        // ep_diff_k / ep_diff_{k-1} (0 when undefined)
    double smallness = 0.0;    // int ||D v|| of the iterate fed to Phi
    double mass_drift = 0.0;   // max |J rho_bar - rho0| over stored times
    double energy_drift = 0.0; // relative drift of int K over stored times
};

struct ConvergenceReport {
    std::vector<PicardIterationRow> rows;
    bool converged = false;
    int restarts = 0;
    double final_T = 0.0;
    double reference_norm = 0.0;     // E_p norm of the last iterate
    int cutoff_m = 0;
    bool cutoff_ok = false;
    bool smallness_ok = true;
};

struct PicardResult {
    Timeline u;
    Timeline K;
    ConvergenceReport report;
};

namespace detail {

inline double energy_drift_of(const Timeline& K) {
    const double e0 = integral(K.fields[0]);
    double scale = std::abs(e0);
    for (const GridField& f : K.fields) scale = std::max(scale, lp_norm(f, 1.0));
    double drift = 0.0;
    for (const GridField& f : K.fields) drift = std::max(drift, std::abs(integral(f) - e0));
    return scale > 0.0 ? drift / scale : drift;
}

inline double mass_identity_residual(const Timeline& u, const GridField& rho0) {
    std::vector<GridField> disp = cumulative_displacement(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.steps(); ++i) {
        FlowMap X = flow_map_from_displacement(disp[i], u.times[i]);
        GridField rho_bar = divide(rho0, X.J);
        worst = std::max(worst, max_abs_diff(multiply(X.J, rho_bar), rho0));
    }
    return worst;
}

}  // namespace detail

// Picard iteration z_{k+1} = Phi(z_k) from the free linear solution, with
// contraction ratios recorded and the horizon halved on stagnation.
inline PicardResult picard_solve(const GridField& rho0, const GridField& u0, const GridField& K0,
                                 const ConstitutiveLaw& law, const SolverConfig& cfg,
                                 const DyadicFilterBank& bank) {
    cfg.validate();
    for (double v : rho0.real_data(0))
        if (!(v > 0.0)) throw vacuum_error("picard_solve: inf rho0 must be positive");

    ConvergenceReport report;
    {
        if (cfg.cutoff_m.has_value()) {
            report.cutoff_m = *cfg.cutoff_m;
            report.cutoff_ok = cutoff_admissible(law, rho0, *cfg.cutoff_m, cfg.eta, bank, cfg.p).admissible;
        } else if (auto found = smallest_admissible_m(law, rho0, cfg.eta, bank, cfg.p)) {
            report.cutoff_m = found->m;
            report.cutoff_ok = true;
        }
    }

    GridField ones = constant_field(rho0.grid(), 1.0);
    double T = cfg.T;
    for (;;) {
        if (T < 4.0 * cfg.dt - 1e-12) {
            std::string msg = "picard_solve: horizon underflow (T=" + std::to_string(T) +
                              " < 4 dt) without contraction after " +
                              std::to_string(report.restarts) + " restart(s); last differences:";
            for (const auto& row : report.rows)
                msg += " " + std::to_string(row.ep_diff);
            throw no_convergence(msg);
        }
        report.rows.clear();
        report.final_T = T;
        // base point: free linear solution with constant-state coefficients
        LinearSolution z = solve_linear_LMK(u0, K0, Timeline{}, Timeline{}, ones, law, cfg.dt, T);
        double prev_diff = -1.0;
        bool stagnated = false;
        for (int k = 1; k <= cfg.max_picard; ++k) {
            const double smallness = smallness_integral(z.u, cfg.p, bank);
            report.smallness_ok = smallness <= cfg.smallness_c;
            LinearSolution z_new;
            try {
                z_new = apply_Phi(z.u, z.K, rho0, u0, K0, law, cfg);
            } catch (const diffeomorphism_loss&) {
                // the iterate's flow folded: the horizon is too long
                stagnated = true;
                break;
            } catch (const solver_instability&) {
                stagnated = true;
                break;
            }
            const double diff =
                ep_norm(difference(z_new.u, z.u), difference(z_new.K, z.K), cfg.p, bank);
            const double ref = ep_norm(z_new.u, z_new.K, cfg.p, bank);
            PicardIterationRow row;
            row.iter = k;
            row.ep_diff = diff;
            row.ratio = prev_diff > 0.0 ? diff / prev_diff : 0.0;
            row.smallness = smallness;
            row.mass_drift = detail::mass_identity_residual(z_new.u, rho0);
            row.energy_drift = detail::energy_drift_of(z_new.K);
            report.rows.push_back(row);
            report.reference_norm = ref;
            if (diff <= cfg.picard_tol * std::max(ref, 1e-300)) {
                report.converged = true;
                return {std::move(z_new.u), std::move(z_new.K), std::move(report)};
            }
            if (prev_diff > 0.0 && diff >= prev_diff) {
                stagnated = true;  // no contraction: the horizon is too long
                break;
            }
            prev_diff = diff;
            z = std::move(z_new);
        }
        if (!stagnated) {
            // max_picard exhausted while still contracting: report as-is
            return {std::move(z.u), std::move(z.K), std::move(report)};
        }
        T *= 0.5;
        ++report.restarts;
    }
}

struct DensityReconstruction {
    Timeline rho_bar;
    Timeline a;               // rho_bar - 1
    double max_mass_residual = 0.0;  // max |J rho_bar - rho0|
    double min_density = 0.0;
};

inline DensityReconstruction reconstruct_density(const Timeline& u_traj, const GridField& rho0) {
    DensityReconstruction out;
    out.min_density = std::numeric_limits<double>::infinity();
    std::vector<GridField> disp = cumulative_displacement(u_traj);
    for (std::size_t i = 0; i < u_traj.steps(); ++i) {
        FlowMap X = flow_map_from_displacement(disp[i], u_traj.times[i]);
        GridField rho_bar = divide(rho0, X.J);
        for (double v : rho_bar.real_data(0)) out.min_density = std::min(out.min_density, v);
        if (!(out.min_density > 0.0))
            throw vacuum_error("reconstruct_density: vacuum at t=" + std::to_string(u_traj.times[i]));
        out.max_mass_residual =
            std::max(out.max_mass_residual, max_abs_diff(multiply(X.J, rho_bar), rho0));
        GridField a = rho_bar;
        a += constant_field(rho0.grid(), -1.0);
        out.rho_bar.push(u_traj.times[i], std::move(rho_bar));
        out.a.push(u_traj.times[i], std::move(a));
    }
    return out;
}

// Strong-form residuals of the governing equations at the interior sample
// times: the converged trajectories are substituted into
//   rho0 d_t u - div(adj(DX)(2 mu D_A u + lambda div_A u - P Id))
//   d_t K - div(adj(DX)(k tA grad(K/rho0) - k tA grad(|u|^2/2) + stress.u - u P))
// with second-order central differences in time. Diagnostic only: the
// values sit at the O(dt^2) level of the time discretization.
struct StrongResidualReport {
    std::vector<double> times;
    std::vector<double> resid_u;  // max norm per time
    std::vector<double> resid_K;
    double max_u = 0.0;
    double max_K = 0.0;
};

inline StrongResidualReport strong_residual(const Timeline& u, const Timeline& K,
                                            const GridField& rho0, const ConstitutiveLaw& law) {
    u.require_same_times(K);
    if (u.steps() < 3) throw std::logic_error("strong_residual: need >= 3 samples");
    StrongResidualReport rep;
    LinearCoefficients co = make_linear_coefficients(rho0, law);
    std::vector<GridField> disp = cumulative_displacement(u);
    const double dt = u.dt();
    for (std::size_t i = 1; i + 1 < u.steps(); ++i) {
        detail::FlowSlice fs = detail::make_flow_slice(disp[i], u.times[i], rho0);
        const GridField& ui = u.fields[i];
        const GridField& Ki = K.fields[i];
        GridField mu_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.mu));
        GridField lam_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.lambda));
        GridField k_t = dealias_phys(apply_pointwise(fs.rho_tilde, law.k));
        GridField stress = multiply(mu_t, twisted_deformation(ui, fs.X.A));
        stress *= 2.0;
        stress += detail::scalar_times_identity(multiply(lam_t, twisted_divergence(ui, fs.X.A)));
        stress = dealias_phys(stress);
        GridField P = pressure_lagrangian(law, fs.rho_tilde, Ki, rho0, ui);

        GridField flux_u = dealias_phys(mat_mat(fs.X.adjDX, stress));
        flux_u -= dealias_phys(multiply(P, fs.X.adjDX));
        GridField dtu = u.fields[i + 1] - u.fields[i - 1];
        dtu *= 1.0 / (2.0 * dt);
        GridField res_u = multiply(rho0, dtu);
        res_u -= divergence(flux_u);
        rep.resid_u.push_back(res_u.max_abs());

        GridField M = dealias_phys(mat_mat(fs.X.adjDX, transpose(fs.X.A)));
        GridField kM = dealias_phys(multiply(k_t, M));
        GridField flux_K = dealias_phys(mat_vec(kM, gradient(dealias_phys(multiply(co.c_f, Ki)))));
        GridField usq = vec_dot(ui, ui);
        usq *= 0.5;
        flux_K -= dealias_phys(mat_vec(kM, gradient(dealias_phys(usq))));
        flux_K += dealias_phys(mat_vec(dealias_phys(mat_mat(fs.X.adjDX, stress)), ui));
        flux_K -= dealias_phys(multiply(P, dealias_phys(mat_vec(fs.X.adjDX, ui))));
        GridField dtK = K.fields[i + 1] - K.fields[i - 1];
        dtK *= 1.0 / (2.0 * dt);
        GridField res_K = dtK;
        res_K -= divergence(flux_K);
        rep.resid_K.push_back(res_K.max_abs());

        rep.times.push_back(u.times[i]);
        rep.max_u = std::max(rep.max_u, rep.resid_u.back());
        rep.max_K = std::max(rep.max_K, rep.resid_K.back());
    }
    return rep;
}

// Materializes the state at sample index i of a solved trajectory pair.
inline LagrangianState lagrangian_state_at(const Timeline& u, const Timeline& K,
                                           const GridField& rho0, std::size_t i) {
    u.require_same_times(K);
    std::vector<GridField> disp = cumulative_displacement(u);
    FlowMap X = flow_map_from_displacement(disp.at(i), u.times.at(i));
    GridField a0 = rho0;
    a0 += constant_field(rho0.grid(), -1.0);
    LagrangianState st{rho0, std::move(a0), u.fields[i], K.fields[i], divide(rho0, X.J),
                       u.times[i]};
    st.validate();
    return st;
}

// Criterion-style residual: one more application of the map measured in E_p.
inline double reapplication_residual(const PicardResult& sol, const GridField& rho0,
                                     const GridField& u0, const GridField& K0,
                                     const ConstitutiveLaw& law, const SolverConfig& cfg,
                                     const DyadicFilterBank& bank) {
    SolverConfig c = cfg;
    c.T = sol.u.times.back();
    LinearSolution again = apply_Phi(sol.u, sol.K, rho0, u0, K0, law, c);
    return ep_norm(difference(again.u, sol.u), difference(again.K, sol.K), c.p, bank);
}

}  // namespace cnslab
