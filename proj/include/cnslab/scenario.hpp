// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration: flat `key = value` files selecting the grid, the
// constitutive law, the solver knobs, the initial-data recipe, and the
// pipeline stages to run. Builtin recipes: quiescent, heat_mode, smallwave.

#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "cnslab/eulerian.hpp"

namespace cnslab {

struct Scenario {
    std::string name = "unnamed";
    int dim = 2;
    int resolution = 64;
    std::string law_name = "ideal";
    LawParams law_params;
    SolverConfig solver;
    std::string ic_kind = "smallwave";
    double amp_rho = 0.01;
    double amp_u = 0.01;
    double amp_theta = 0.01;
    std::uint64_t seed = 1;
    std::vector<std::string> pipeline{"lagrangian"};
    int output_times = 4;
    int trials = 100;  // randomized estimate suites

    TorusGrid grid() const { return TorusGrid(dim, resolution); }
    ConstitutiveLaw law() const { return builtin_law(law_name_from_string(law_name), law_params); }
};

struct InitialData {
    GridField rho0;
    GridField u0;
    GridField theta0;
};

inline InitialData make_initial_data(const Scenario& sc) {
    TorusGrid g = sc.grid();
    GridField rho0 = constant_field(g, 1.0);
    GridField u0(g, Rank::vector, Repr::physical);
    GridField theta0 = constant_field(g, 0.5);
    if (sc.ic_kind == "quiescent") {
        // constant state
    } else if (sc.ic_kind == "heat_mode") {
        GridField dth = scalar_field(g);
        dth.fill([&](const std::array<double, 3>& x, int) { return sc.amp_theta * std::cos(x[0]); });
        theta0 += dth;
    } else if (sc.ic_kind == "smallwave") {
        GridField da = scalar_field(g);
        da.fill([&](const std::array<double, 3>& x, int) {
            return sc.amp_rho * (std::cos(x[0]) + 0.5 * std::sin(x[1]));
        });
        rho0 += da;
        // includes moderate-frequency content (|k| up to ~9) so coarse grids
        // carry visible truncation error in refinement studies
        u0.fill([&](const std::array<double, 3>& x, int c) {
            if (c == 0)
                return sc.amp_u * (std::sin(x[1]) + 0.4 * std::sin(2.0 * x[0] + x[1]) +
                                   0.2 * std::cos(4.0 * x[0] + 3.0 * x[1]) +
                                   0.15 * std::sin(7.0 * x[0] + 6.0 * x[1]));
            if (c == 1)
                return sc.amp_u * (std::cos(x[0]) + 0.4 * std::cos(x[0] - 2.0 * x[1]) +
                                   0.2 * std::sin(3.0 * x[0] - 4.0 * x[1]) +
                                   0.15 * std::cos(6.0 * x[0] - 7.0 * x[1]));
            return sc.amp_u * 0.3 * std::sin(x[0] + x[1]);
        });
        GridField dth = scalar_field(g);
        dth.fill([&](const std::array<double, 3>& x, int) {
            return sc.amp_theta * (std::cos(x[0] + x[1]) + 0.4 * std::sin(2.0 * x[0]) +
                                   0.15 * std::cos(6.0 * x[0] + 6.0 * x[1]));
        });
        theta0 += dth;
    } else {
        throw std::invalid_argument("unknown initial-data recipe: " + sc.ic_kind);
    }
    double lo = std::numeric_limits<double>::infinity();
    for (double v : rho0.real_data(0)) lo = std::min(lo, v);
    if (!(lo > 0.0)) throw vacuum_error("scenario initial density touches vacuum");
    // the recipes must be band-limited at the chosen resolution (their
    // spectra must survive the 2/3 dealiasing untouched)
    for (const GridField* f : {&rho0, &u0, &theta0})
        if (max_abs_diff(*f, dealias_phys(*f)) > 1e-12 * std::max(1.0, f->max_abs()))
            throw std::invalid_argument("scenario '" + sc.ic_kind +
                                        "' is not band-limited at resolution " +
                                        std::to_string(sc.resolution));
    return {std::move(rho0), std::move(u0), std::move(theta0)};
}

namespace detail {
inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}
}  // namespace detail

inline Scenario parse_scenario(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                        ": expected key = value");
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    Scenario sc;
    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto num = [&](const char* key, double& dst) {
        if (auto v = take(key)) dst = std::stod(*v);
    };
    auto integer = [&](const char* key, int& dst) {
        if (auto v = take(key)) dst = std::stoi(*v);
    };
    if (auto v = take("name")) sc.name = *v;
    integer("dim", sc.dim);
    integer("resolution", sc.resolution);
    if (auto v = take("law.name")) sc.law_name = *v;
    num("law.R", sc.law_params.R);
    num("law.alpha", sc.law_params.alpha);
    num("law.beta", sc.law_params.beta);
    num("law.gamma", sc.law_params.gamma);
    num("law.mu", sc.law_params.mu);
    num("law.lambda", sc.law_params.lambda);
    num("law.k", sc.law_params.k);
    num("solver.dt", sc.solver.dt);
    num("solver.T", sc.solver.T);
    num("solver.picard_tol", sc.solver.picard_tol);
    integer("solver.max_picard", sc.solver.max_picard);
    num("solver.smallness_c", sc.solver.smallness_c);
    num("solver.eta", sc.solver.eta);
    num("besov.p", sc.solver.p);
    if (auto v = take("solver.cutoff_m")) {
        if (*v != "auto") sc.solver.cutoff_m = std::stoi(*v);
    }
    if (auto v = take("ic.kind")) sc.ic_kind = *v;
    num("ic.amp_rho", sc.amp_rho);
    num("ic.amp_u", sc.amp_u);
    num("ic.amp_theta", sc.amp_theta);
    if (auto v = take("seed")) sc.seed = std::stoull(*v);
    integer("output.times", sc.output_times);
    integer("verify.trials", sc.trials);
    if (auto v = take("pipeline")) {
        sc.pipeline.clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) sc.pipeline.push_back(item);
        }
    }
    if (!kv.empty()) throw std::invalid_argument("scenario: unknown key '" + kv.begin()->first + "'");
    sc.solver.validate();
    if (sc.dim != 2 && sc.dim != 3) throw std::invalid_argument("scenario: dim must be 2 or 3");
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("scenario: cannot open " + path);
    return parse_scenario(is);
}

}  // namespace cnslab
