// SPDX-License-Identifier: Apache-2.0
//
// Batch drivers behind the CLI: scenario runs with manifests, the aggregated
// verification suite across resolutions, and report generation from stored
// trajectory checkpoints.

#pragma once

#include <filesystem>

#include "cnslab/csv.hpp"
#include "cnslab/estimates.hpp"
#include "cnslab/field_io.hpp"
#include "cnslab/flow_checks.hpp"
#include "cnslab/scenario.hpp"

namespace cnslab {

// --- trajectory checkpoints --------------------------------------------------

inline void write_lagrangian_checkpoint(const std::string& path, const GridField& rho0,
                                        const Timeline& u, const Timeline& K) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os << "cnslab-traj lagrangian " << u.steps() << ' ' << csv_num(u.steps() > 1 ? u.dt() : 0.0) << '\n';
    os << "rho0\n";
    write_snapshot(os, rho0);
    for (std::size_t i = 0; i < u.steps(); ++i) {
        os << "t " << csv_num(u.times[i]) << '\n';
        write_snapshot(os, u.fields[i]);
        write_snapshot(os, K.fields[i]);
    }
}

struct LagrangianCheckpoint {
    GridField rho0;
    Timeline u;
    Timeline K;
};

inline LagrangianCheckpoint read_lagrangian_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string line;
    std::getline(is, line);
    std::istringstream hs(line);
    std::string magic, kind;
    std::size_t n_slices = 0;
    std::string dt_s;
    hs >> magic >> kind >> n_slices >> dt_s;
    if (magic != "cnslab-traj" || kind != "lagrangian")
        throw std::runtime_error("checkpoint: not a lagrangian trajectory: " + path);
    std::getline(is, line);
    if (line != "rho0") throw std::runtime_error("checkpoint: missing rho0 section");
    GridField rho0 = read_snapshot(is);
    Timeline u, K;
    for (std::size_t i = 0; i < n_slices; ++i) {
        std::getline(is, line);
        std::istringstream ts(line);
        std::string tag;
        double t = 0.0;
        ts >> tag >> t;
        if (tag != "t") throw std::runtime_error("checkpoint: malformed slice header");
        u.push(t, read_snapshot(is));
        K.push(t, read_snapshot(is));
    }
    return {std::move(rho0), std::move(u), std::move(K)};
}

// --- run manifests ------------------------------------------------------------

struct ManifestCheck {
    std::string name;
    bool pass;
    double value;
    double threshold;
};

struct RunManifest {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::vector<std::string> artifacts;  // relative paths, each written exactly once
    std::vector<ManifestCheck> checks;
    std::vector<std::string> errors;  // "stage: message" for stages that threw

    bool all_pass() const {
        return errors.empty() && std::all_of(checks.begin(), checks.end(),
                                             [](const ManifestCheck& c) { return c.pass; });
    }
    void check(std::string name, double value, double threshold, bool less_equal = true) {
        checks.push_back({std::move(name), less_equal ? value <= threshold : value >= threshold,
                          value, threshold});
    }
    void check_flag(std::string name, bool pass) {
        checks.push_back({std::move(name), pass, pass ? 1.0 : 0.0, 1.0});
    }
    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        os << "scenario " << scenario_name << '\n';
        os << "seed " << seed << '\n';
        for (const auto& a : artifacts) os << "artifact " << a << '\n';
        for (const auto& c : checks)
            os << "check " << c.name << ' ' << (c.pass ? "pass" : "fail") << ' ' << csv_num(c.value)
               << ' ' << csv_num(c.threshold) << '\n';
        for (const auto& e : errors) os << "error " << e << '\n';
        os << "result " << (all_pass() ? "pass" : "fail") << '\n';
    }
};

namespace detail {

inline void save_artifact(RunManifest& m, const std::string& rel, const CsvWriter& csv) {
    csv.save(m.output_dir + "/" + rel);
    m.artifacts.push_back(rel);
}

inline CsvWriter convergence_csv(const ConvergenceReport& rep) {
    CsvWriter csv("iter,ep_diff,ratio,smallness,mass_drift,energy_drift");
    for (const auto& r : rep.rows)
        csv.row(r.iter, r.ep_diff, r.ratio, r.smallness, r.mass_drift, r.energy_drift);
    return csv;
}

inline CsvWriter ratio_csv(const std::vector<RatioReport>& reports) {
    CsvWriter csv("kind,trial,resolution,lhs,rhs,ratio");
    for (const auto& rep : reports)
        for (const auto& r : rep.rows) csv.row(r.kind, r.trial, r.resolution, r.lhs, r.rhs, r.ratio);
    return csv;
}

// Conservation audit of a Lagrangian run: momentum/energy drift relative to
// the data scale, mass identity in max norm.
struct ConservationAudit {
    double mass_residual = 0.0;
    double momentum_drift = 0.0;
    double energy_drift = 0.0;
};

inline ConservationAudit audit_lagrangian(const GridField& rho0, const Timeline& u,
                                          const Timeline& K) {
    ConservationAudit a;
    a.mass_residual = mass_identity_residual(u, rho0);
    GridField mom0 = multiply(rho0, u.fields[0]);
    std::vector<double> m0(static_cast<std::size_t>(u.fields[0].components()));
    for (int c = 0; c < u.fields[0].components(); ++c) m0[static_cast<std::size_t>(c)] = integral(mom0, c);
    const double mscale = std::max(lp_norm(mom0, 1.0), 1e-30);
    const double e0 = integral(K.fields[0]);
    const double escale = std::max(lp_norm(K.fields[0], 1.0), 1e-30);
    for (std::size_t i = 1; i < u.steps(); ++i) {
        GridField mom = multiply(rho0, u.fields[i]);
        for (int c = 0; c < u.fields[0].components(); ++c)
            a.momentum_drift = std::max(
                a.momentum_drift, std::abs(integral(mom, c) - m0[static_cast<std::size_t>(c)]) / mscale);
        a.energy_drift = std::max(a.energy_drift, std::abs(integral(K.fields[i]) - e0) / escale);
    }
    return a;
}

}  // namespace detail

// Executes the scenario pipeline, writing CSV reports and field snapshots
// into out_dir and returning the manifest (also saved as manifest.txt).
inline RunManifest run_scenario(const Scenario& sc, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest;
    manifest.scenario_name = sc.name;
    manifest.seed = sc.seed;
    manifest.output_dir = out_dir;

    TorusGrid grid = sc.grid();
    ConstitutiveLaw law = sc.law();
    DyadicFilterBank bank = default_filter_bank(grid);
    InitialData data = make_initial_data(sc);
    GridField K0 = vec_dot(data.u0, data.u0);
    K0 *= 0.5;
    K0 += data.theta0;
    K0 = dealias_phys(multiply(data.rho0, K0));

    auto has_stage = [&](const char* s) {
        return std::find(sc.pipeline.begin(), sc.pipeline.end(), s) != sc.pipeline.end();
    };
    // a stage that throws is recorded in the manifest and fails the run
    // without losing the other stages' results
    auto guarded = [&](const char* stage, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            manifest.errors.push_back(std::string(stage) + ": " + e.what());
        }
    };

    std::optional<PicardResult> lagr;
    if (has_stage("lagrangian")) guarded("lagrangian", [&] {
        lagr = picard_solve(data.rho0, data.u0, K0, law, sc.solver, bank);
        detail::save_artifact(manifest, "convergence.csv", detail::convergence_csv(lagr->report));
        write_lagrangian_checkpoint(out_dir + "/lagrangian.traj", data.rho0, lagr->u, lagr->K);
        manifest.artifacts.push_back("lagrangian.traj");
        manifest.check_flag("picard_converged", lagr->report.converged);
        manifest.check_flag("cutoff_admissible", lagr->report.cutoff_ok);
        manifest.check_flag("smallness", lagr->report.smallness_ok);
        double worst_ratio = 0.0;
        for (std::size_t i = 1; i < lagr->report.rows.size(); ++i)
            worst_ratio = std::max(worst_ratio, lagr->report.rows[i].ratio);
        if (lagr->report.rows.size() > 1)
            manifest.check("contraction_ratio", worst_ratio, 1.0 - 1e-12);
        detail::ConservationAudit audit = detail::audit_lagrangian(data.rho0, lagr->u, lagr->K);
        manifest.check("mass_identity", audit.mass_residual, 1e-10);
        manifest.check("momentum_drift", audit.momentum_drift, 1e-8);
        manifest.check("energy_drift", audit.energy_drift, 1e-8);
        // logged surrogate for the multiplier norm of rho0^-1 (informational)
        const BesovIndex mul_idx(grid.dim() / sc.solver.p - 1.0, sc.solver.p, grid.dim());
        GridField inv_rho0 = apply_pointwise(data.rho0, [](double r) { return 1.0 / r; });
        manifest.check("multiplier_sample_rho0_inv",
                       multiplier_norm_sample(inv_rho0, mul_idx, bank, 16, sc.seed),
                       std::numeric_limits<double>::infinity());
        if (lagr->u.steps() >= 3) {
            StrongResidualReport sr = strong_residual(lagr->u, lagr->K, data.rho0, law);
            CsvWriter csv("time,resid_u,resid_K");
            for (std::size_t i = 0; i < sr.times.size(); ++i)
                csv.row(sr.times[i], sr.resid_u[i], sr.resid_K[i]);
            detail::save_artifact(manifest, "strong_residual.csv", csv);
        }
    });

    if (has_stage("eulerian")) guarded("eulerian", [&] {
        GridField E0 = K0;
        EulerianTrajectory tr = integrate_eulerian({data.rho0, data.u0, E0, 0.0}, law,
                                                   lagr ? lagr->u.times.back() : sc.solver.T,
                                                   sc.solver.dt);
        const double M0 = integral(tr.rho.fields[0]);
        double mass_drift = 0.0;
        for (const auto& f : tr.rho.fields)
            mass_drift = std::max(mass_drift, std::abs(integral(f) - M0) / std::max(std::abs(M0), 1e-30));
        manifest.check("eulerian_mass_drift", mass_drift, 1e-10);
        CsvWriter csv("time,mass,energy");
        for (std::size_t i = 0; i < tr.rho.steps(); ++i)
            csv.row(tr.rho.times[i], integral(tr.rho.fields[i]), integral(tr.E.fields[i]));
        detail::save_artifact(manifest, "eulerian_conservation.csv", csv);
    });

    if (has_stage("equivalence")) guarded("equivalence", [&] {
        EquivalenceReport rep =
            equivalence_experiment(data.rho0, data.u0, data.theta0, law, sc.solver, bank,
                                   sc.output_times);
        CsvWriter csv("time,field,max_diff,besov_diff,resolution");
        for (const auto& r : rep.rows) csv.row(r.time, r.field, r.max_diff, r.besov_diff, r.resolution);
        detail::save_artifact(manifest, "equivalence.csv", csv);
        manifest.check_flag("equivalence_complete",
                            rep.lagrangian_error.empty() && rep.eulerian_error.empty());
        if (sc.ic_kind == "heat_mode") manifest.check("equivalence_heat_mode", rep.max_discrepancy, 1e-6);
    });

    if (has_stage("estimates")) guarded("estimates", [&] {
        std::vector<RatioReport> reports;
        EstimateParams prd{0.0, 0.0, sc.solver.p, 8, 0.1};
        reports.push_back(verify_estimates(EstimateKind::product, sc.trials, prd, bank, sc.seed));
        EstimateParams comp{1.0, 0.0, sc.solver.p, 8, 0.1};
        reports.push_back(verify_estimates(EstimateKind::composition, sc.trials, comp, bank, sc.seed));
        EstimateParams c1{0.0, 0.5, sc.solver.p, 8, 0.1};
        reports.push_back(verify_estimates(EstimateKind::commutator_comm1, sc.trials, c1, bank, sc.seed));
        EstimateParams c2{0.0, 1.0, sc.solver.p, 8, 0.1};
        reports.push_back(verify_estimates(EstimateKind::commutator_comm2, sc.trials, c2, bank, sc.seed));
        EstimateParams bern{0.0, 0.0, 2.0, 8, 0.1};
        RatioReport bb = verify_estimates(EstimateKind::bernstein, sc.trials, bern, bank, sc.seed);
        reports.push_back(bb);
        detail::save_artifact(manifest, "estimates.csv", detail::ratio_csv(reports));
        manifest.check("bernstein_upper", bb.max_ratio, 2.0 * (1.0 + 1e-9));
        manifest.check("bernstein_lower", bb.min_ratio, 0.5 * (1.0 - 1e-9), /*less_equal=*/false);
        for (std::size_t i = 0; i + 1 < reports.size(); ++i)
            manifest.check_flag("estimate_finite_" + std::to_string(i),
                                std::isfinite(reports[i].max_ratio));
    });

    if (has_stage("kinematics")) guarded("kinematics", [&] {
        CsvWriter csv("check,resolution,dt,value");
        // shear flow with an analytic profile at the scenario resolution
        Timeline v;
        const int steps = 8;
        for (int i = 0; i <= steps; ++i) {
            GridField vf = vector_field(grid);
            vf.fill([](const std::array<double, 3>& x, int c) {
                return c == 0 ? 0.1 * std::sin(x[1]) : 0.0;
            });
            v.push(0.1 / steps * i, std::move(vf));
        }
        FlowMap X = integrate_flow(v, 0.1);
        const double adx = max_abs_diff(mat_mat(X.A, X.DX), identity_matrix_field(grid));
        const double adj = max_abs_diff(X.adjDX, multiply(X.J, X.A));
        csv.row("A_DX_identity", sc.resolution, sc.solver.dt, adx);
        csv.row("adj_JA_identity", sc.resolution, sc.solver.dt, adj);
        manifest.check("A_DX_identity", adx, 1e-10);
        manifest.check("adj_JA_identity", adj, 1e-10);
        GridField Kf = scalar_field(grid);
        Kf.fill([](const std::array<double, 3>& x, int) {
            return std::exp(std::sin(x[0]) * std::cos(x[1]));
        });
        GridField Hf = vector_field(grid);
        Hf.fill([](const std::array<double, 3>& x, int c) {
            return c == 0 ? std::cos(x[1]) : std::sin(x[0] + x[1]);
        });
        DivIdentityReport div_rep = check_div_identity(Kf, Hf, Hf, X);
        csv.row("lco_gradient", sc.resolution, sc.solver.dt, div_rep.gradient_residual);
        csv.row("lco_divergence", sc.resolution, sc.solver.dt, div_rep.divergence_residual);
        csv.row("lco_laplacian", sc.resolution, sc.solver.dt, div_rep.laplacian_residual);
        csv.row("lco_graddiv", sc.resolution, sc.solver.dt, div_rep.graddiv_residual);
        detail::save_artifact(manifest, "kinematics.csv", csv);
    });

    manifest.save(out_dir + "/manifest.txt");
    manifest.artifacts.push_back("manifest.txt");
    return manifest;
}

// --- aggregated verification suite -------------------------------------------

struct VerifySuiteResult {
    std::vector<ManifestCheck> checks;
    std::vector<std::string> artifacts;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const ManifestCheck& c) { return c.pass; });
    }
};

// Runs the module-invariant checks across resolutions: partition of unity,
// reconstruction, Bernstein bounds, flow algebra, change-of-variable
// refinement, Jacobi temporal order, estimate-ratio stability.
inline VerifySuiteResult verify_all(const std::vector<int>& resolutions, int trials,
                                    std::uint64_t seed, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    VerifySuiteResult res;
    auto check = [&](std::string name, double value, double threshold, bool le = true) {
        res.checks.push_back({std::move(name), le ? value <= threshold : value >= threshold, value,
                              threshold});
    };

    std::vector<RatioReport> all_ratio_reports;
    std::map<std::string, std::vector<double>> stability;  // kind -> max ratio per resolution
    std::vector<double> lco_residuals;
    CsvWriter kin_csv("check,resolution,dt,value");

    for (int n : resolutions) {
        const std::string tag = "n" + std::to_string(n);
        TorusGrid g(2, n);
        DyadicFilterBank bank = default_filter_bank(g);

        double worst_partition = 0.0;
        for (std::size_t p = 0; p < g.total_points(); ++p)
            if (bank.resolved(p)) worst_partition = std::max(worst_partition, std::abs(bank.covered(p) - 1.0));
        check("partition_of_unity_" + tag, worst_partition, 1e-12);

        // axis band chosen so the Euclidean radius stays inside 2^j_max
        const int band = static_cast<int>(std::floor(std::ldexp(1.0, bank.j_max()) / std::sqrt(2.0)));
        Rng rng(seed);
        GridField f = random_band_limited(g, Rank::scalar, band, 0.5, rng);
        GridField sum = low_freq_cutoff(f, bank.j_min(), bank);
        for (int j = bank.j_min() + 1; j <= bank.j_max(); ++j) sum += dyadic_block(f, j, bank);
        check("reconstruction_" + tag, max_abs_diff(f, sum) / std::max(1.0, f.max_abs()), 1e-12);

        EstimateParams bern{0.0, 0.0, 2.0, 8, 0.1};
        RatioReport bb = verify_estimates(EstimateKind::bernstein, trials, bern, bank, seed);
        check("bernstein_upper_" + tag, bb.max_ratio, 2.0 * (1.0 + 1e-9));
        check("bernstein_lower_" + tag, bb.min_ratio, 0.5 * (1.0 - 1e-9), false);
        all_ratio_reports.push_back(bb);

        for (auto [kind, prm] : std::vector<std::pair<EstimateKind, EstimateParams>>{
                 {EstimateKind::product, {0.0, 0.0, 2.0, 8, 0.1}},
                 {EstimateKind::composition, {1.0, 0.0, 2.0, 8, 0.1}},
                 {EstimateKind::commutator_comm1, {0.0, 0.5, 2.0, 8, 0.1}}}) {
            RatioReport rep = verify_estimates(kind, trials, prm, bank, seed);
            stability[to_string(kind)].push_back(rep.max_ratio);
            all_ratio_reports.push_back(rep);
        }

        // flow algebra + change-of-variable residual at this resolution
        GridField disp = vector_field(g);
        disp.fill([](const std::array<double, 3>& x, int c) {
            return c == 0 ? 0.12 * std::sin(x[1]) + 0.1 * std::cos(x[0] + x[1]) : 0.1 * std::cos(x[0]);
        });
        FlowMap X = flow_map_from_displacement(disp, 1.0);
        const double adx = max_abs_diff(mat_mat(X.A, X.DX), identity_matrix_field(g));
        const double adj = max_abs_diff(X.adjDX, multiply(X.J, X.A));
        check("A_DX_identity_" + tag, adx, 1e-10);
        check("adj_JA_identity_" + tag, adj, 1e-10);
        kin_csv.row("A_DX_identity", n, 0.0, adx);
        kin_csv.row("adj_JA_identity", n, 0.0, adj);
        GridField Kf = scalar_field(g);
        Kf.fill([](const std::array<double, 3>& x, int) {
            return std::exp(4.0 * std::sin(x[0]) * std::cos(x[1]));
        });
        GridField Hf = vector_field(g);
        Hf.fill([](const std::array<double, 3>& x, int c) {
            return c == 0 ? std::exp(3.2 * std::cos(x[1])) : std::sin(x[0] + 2.0 * x[1]);
        });
        const double lco = check_div_identity(Kf, Hf, Hf, X).max_residual();
        lco_residuals.push_back(lco);
        kin_csv.row("lco_max_residual", n, 0.0, lco);

        // flow-estimate ratios on a small shear
        Timeline shear;
        for (int i = 0; i <= 4; ++i) {
            GridField vf = vector_field(g);
            vf.fill([](const std::array<double, 3>& x, int c) {
                return c == 0 ? 0.015 * std::sin(x[1]) : 0.0;
            });
            shear.push(0.25 * i, std::move(vf));
        }
        FlowRatioReport fr = flow_estimate_report(shear, bank);
        for (const auto& row : fr.rows) {
            kin_csv.row("flow_ratio_" + row.name, n, 0.0, row.ratio);
            check("flow_ratio_finite_" + row.name + "_" + tag,
                  std::isfinite(row.ratio) ? 0.0 : 1.0, 0.5);
        }
    }

    for (std::size_t i = 0; i + 1 < lco_residuals.size(); ++i)
        check("lco_refinement_" + std::to_string(i), lco_residuals[i + 1],
              lco_residuals[i] / 10.0);
    for (auto& [kind, maxima] : stability)
        for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
            const double lo = std::min(maxima[i], maxima[i + 1]);
            const double hi = std::max(maxima[i], maxima[i + 1]);
            check("estimate_stability_" + kind + "_" + std::to_string(i), hi,
                  2.0 * std::max(lo, 1e-30));
        }

    // conservation audit: a short small-amplitude Lagrangian run at the
    // coarsest resolution
    {
        Scenario sc;
        sc.resolution = resolutions.front();
        sc.ic_kind = "smallwave";
        sc.amp_rho = sc.amp_u = sc.amp_theta = 0.02;
        sc.solver.dt = 2e-3;
        sc.solver.T = 0.016;
        TorusGrid g = sc.grid();
        DyadicFilterBank bank = default_filter_bank(g);
        InitialData data = make_initial_data(sc);
        GridField K0 = vec_dot(data.u0, data.u0);
        K0 *= 0.5;
        K0 += data.theta0;
        K0 = dealias_phys(multiply(data.rho0, K0));
        PicardResult run = picard_solve(data.rho0, data.u0, K0, sc.law(), sc.solver, bank);
        detail::ConservationAudit audit = detail::audit_lagrangian(data.rho0, run.u, run.K);
        check("conservation_mass", audit.mass_residual, 1e-10);
        check("conservation_momentum", audit.momentum_drift, 1e-8);
        check("conservation_energy", audit.energy_drift, 1e-8);
    }

    // Jacobi temporal order on the coarsest resolution
    {
        TorusGrid g(2, resolutions.front());
        double r_prev = 0.0;
        int idx = 0;
        std::vector<double> residuals;
        for (int steps : {8, 16, 32}) {
            Timeline z, v;
            const double T = 0.4;
            for (int i = 0; i <= steps; ++i) {
                const double t = T / steps * i;
                GridField zf = scalar_field(g);
                zf.fill([&](const std::array<double, 3>& x, int) {
                    return (1.0 + 0.5 * std::sin(3.0 * t)) * std::cos(x[0]) + 0.3 * std::sin(x[1]);
                });
                z.push(t, std::move(zf));
                GridField vf = vector_field(g);
                vf.fill([&](const std::array<double, 3>& x, int c) {
                    return c == 0 ? 0.25 * std::cos(2.0 * t) * std::sin(x[0]) : 0.0;
                });
                v.push(t, std::move(vf));
            }
            const double r = check_jacobi(z, v);
            kin_csv.row("jacobi_residual", resolutions.front(), T / steps, r);
            residuals.push_back(r);
            if (idx > 0) check("jacobi_order_" + std::to_string(idx), std::log2(r_prev / r), 1.9, false);
            r_prev = r;
            ++idx;
        }
    }

    CsvWriter ratio = detail::ratio_csv(all_ratio_reports);
    ratio.save(out_dir + "/estimates.csv");
    res.artifacts.push_back("estimates.csv");
    kin_csv.save(out_dir + "/kinematics.csv");
    res.artifacts.push_back("kinematics.csv");
    CsvWriter summary("check,pass,value,threshold");
    for (const auto& c : res.checks) summary.row(c.name, c.pass ? "pass" : "fail", c.value, c.threshold);
    summary.save(out_dir + "/verify_summary.csv");
    res.artifacts.push_back("verify_summary.csv");
    return res;
}

// Plot-ready norms-vs-time table from a stored Lagrangian trajectory.
inline CsvWriter report_from_run(const std::string& run_dir) {
    LagrangianCheckpoint cp = read_lagrangian_checkpoint(run_dir + "/lagrangian.traj");
    const TorusGrid& g = cp.rho0.grid();
    DyadicFilterBank bank = default_filter_bank(g);
    const double p = 2.0;
    const BesovIndex su(g.dim() / p - 1.0, p, g.dim());
    const BesovIndex sK(g.dim() / p - 2.0, p, g.dim());
    CsvWriter csv("time,besov_u,besov_K,momentum_x,momentum_y,energy,mass_residual");
    std::vector<GridField> disp = cumulative_displacement(cp.u);
    for (std::size_t i = 0; i < cp.u.steps(); ++i) {
        FlowMap X = flow_map_from_displacement(disp[i], cp.u.times[i]);
        GridField rho_bar = divide(cp.rho0, X.J);
        GridField mom = multiply(cp.rho0, cp.u.fields[i]);
        csv.row(cp.u.times[i], besov_norm(cp.u.fields[i], su, bank),
                besov_norm(cp.K.fields[i], sK, bank), integral(mom, 0), integral(mom, 1),
                integral(cp.K.fields[i]), max_abs_diff(multiply(X.J, rho_bar), cp.rho0));
    }
    return csv;
}

}  // namespace cnslab
