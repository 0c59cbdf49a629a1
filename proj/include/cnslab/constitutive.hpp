// SPDX-License-Identifier: Apache-2.0
//
// Density-dependent coefficients mu, lambda, k and the two-part pressure
// P(rho,theta) = pi0(rho) + theta*pi1(rho), in Eulerian and Lagrangian form,
// with the ellipticity constants and low-frequency cutoff admissibility
// checks the linear theory requires. Normalizations: C_v = 1, background
// density 1, pi0(1) = 0.

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cnslab/littlewood_paley.hpp"

namespace cnslab {

struct vacuum_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstitutiveLaw {
    std::string name;
    std::function<double(double)> mu, dmu;
    std::function<double(double)> lambda, dlambda;
    std::function<double(double)> k, dk;
    std::function<double(double)> pi0, dpi0;
    std::function<double(double)> pi1, dpi1;
    double rho_lo = 1e-9;   // admissible density interval
    double rho_hi = 1e9;

    void require_admissible(const GridField& rho) const {
        rho.require(Repr::physical);
        for (double v : rho.real_data(0))
            if (!(v > rho_lo && v < rho_hi))
                throw vacuum_error("density outside the admissible interval of law '" + name + "'");
    }
};

struct LawParams {
    double R = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 3.0;
    double mu = 1.0;
    double lambda = 0.0;
    double k = 1.0;
};

enum class LawName { ideal, barotropic, van_der_waals };

inline ConstitutiveLaw builtin_law(LawName which, const LawParams& prm = {}) {
    if (!(prm.mu > 0.0) || !(prm.lambda + 2.0 * prm.mu > 0.0) || !(prm.k > 0.0))
        throw std::invalid_argument("builtin_law: need mu>0, lambda+2mu>0, k>0");
    ConstitutiveLaw law;
    law.mu = [m = prm.mu](double) { return m; };
    law.dmu = [](double) { return 0.0; };
    law.lambda = [l = prm.lambda](double) { return l; };
    law.dlambda = [](double) { return 0.0; };
    law.k = [k = prm.k](double) { return k; };
    law.dk = [](double) { return 0.0; };
    switch (which) {
        case LawName::ideal:
            law.name = "ideal";
            law.pi0 = [](double) { return 0.0; };
            law.dpi0 = [](double) { return 0.0; };
            law.pi1 = [R = prm.R](double r) { return R * r; };
            law.dpi1 = [R = prm.R](double) { return R; };
            break;
        case LawName::barotropic:
            law.name = "barotropic";
            law.pi0 = [R = prm.R](double r) { return R * (r - 1.0); };
            law.dpi0 = [R = prm.R](double) { return R; };
            law.pi1 = [](double) { return 0.0; };
            law.dpi1 = [](double) { return 0.0; };
            break;
        case LawName::van_der_waals:
            if (!(prm.gamma > 1.0))
                throw std::invalid_argument("builtin_law: van der Waals needs gamma > 1");
            law.name = "van_der_waals";
            // pi0 shifted by a constant so pi0(1) = 0.
            law.pi0 = [a = prm.alpha](double r) { return -a * (r * r - 1.0); };
            law.dpi0 = [a = prm.alpha](double r) { return -2.0 * a * r; };
            law.pi1 = [b = prm.beta, g = prm.gamma](double r) { return b * r / (g - r); };
            law.dpi1 = [b = prm.beta, g = prm.gamma](double r) {
                const double d = g - r;
                return b * g / (d * d);
            };
            law.rho_hi = prm.gamma * (1.0 - 1e-9);  // stay off the pole
            break;
    }
    return law;
}

inline LawName law_name_from_string(const std::string& s) {
    if (s == "ideal") return LawName::ideal;
    if (s == "barotropic") return LawName::barotropic;
    if (s == "van_der_waals") return LawName::van_der_waals;
    throw std::invalid_argument("unknown law name: " + s);
}

enum class Coefficient { mu, lambda, k, pi0, pi1 };

inline GridField evaluate_coefficient(const ConstitutiveLaw& law, Coefficient which,
                                      const GridField& rho) {
    law.require_admissible(rho);
    const std::function<double(double)>* fn = nullptr;
    switch (which) {
        case Coefficient::mu: fn = &law.mu; break;
        case Coefficient::lambda: fn = &law.lambda; break;
        case Coefficient::k: fn = &law.k; break;
        case Coefficient::pi0: fn = &law.pi0; break;
        case Coefficient::pi1: fn = &law.pi1; break;
    }
    return dealias_phys(apply_pointwise(rho, *fn));
}

inline GridField pressure_eulerian(const ConstitutiveLaw& law, const GridField& rho,
                                   const GridField& theta) {
    law.require_admissible(rho);
    GridField p = apply_pointwise(rho, law.pi0);
    p += multiply(theta, apply_pointwise(rho, law.pi1));
    return dealias_phys(p);
}

// P(rho_bar, K_bar) = pi0(rho_bar) + (K_bar/rho0 - |u_bar|^2/2) pi1(rho_bar).
inline GridField pressure_lagrangian(const ConstitutiveLaw& law, const GridField& rho_bar,
                                     const GridField& K_bar, const GridField& rho0,
                                     const GridField& u_bar) {
    law.require_admissible(rho_bar);
    for (double v : rho0.real_data(0))
        if (!(v > 0.0)) throw vacuum_error("pressure_lagrangian: rho0 touches vacuum");
    GridField theta = divide(K_bar, rho0);
    theta.axpy(-0.5, vec_dot(u_bar, u_bar));
    GridField p = apply_pointwise(rho_bar, law.pi0);
    p += multiply(theta, apply_pointwise(rho_bar, law.pi1));
    return dealias_phys(p);
}

struct EllipticityConstants {
    double alpha;  // min(inf a*mu, inf(2a*mu + b*lambda)), a = b = 1/rho0
    double beta;   // inf of the energy diffusion coefficient k(rho0)/rho0
};

inline EllipticityConstants ellipticity_constants(const ConstitutiveLaw& law, const GridField& rho0) {
    law.require_admissible(rho0);
    double inf_amu = std::numeric_limits<double>::infinity();
    double inf_visc2 = std::numeric_limits<double>::infinity();
    double inf_kc = std::numeric_limits<double>::infinity();
    for (double r : rho0.real_data(0)) {
        const double a = 1.0 / r;
        inf_amu = std::min(inf_amu, a * law.mu(r));
        inf_visc2 = std::min(inf_visc2, 2.0 * a * law.mu(r) + a * law.lambda(r));
        inf_kc = std::min(inf_kc, a * law.k(r));
    }
    return {std::min(inf_amu, inf_visc2), inf_kc};
}

struct CutoffReport {
    int m = 0;
    bool admissible = false;
    double inf_smoothed_amu = 0.0;
    double inf_smoothed_visc2 = 0.0;
    double inf_smoothed_kc = 0.0;
    double high_freq_mass = 0.0;  // worst Besov^{n/p-1} mass of (Id - S_m)(coefficient gradients)
    double threshold = 0.0;       // eta * min(alpha, beta)
};

// Checks the two admissibility conditions for the cutoff index m: the
// S_m-smoothed coefficients keep at least half the ellipticity constants, and
// the high-frequency part of the six coefficient-gradient products is small.
inline CutoffReport cutoff_admissible(const ConstitutiveLaw& law, const GridField& rho0, int m,
                                      double eta, const DyadicFilterBank& bank, double p = 2.0) {
    law.require_admissible(rho0);
    const int n = rho0.grid().dim();
    const EllipticityConstants ec = ellipticity_constants(law, rho0);
    CutoffReport rep;
    rep.m = m;
    rep.threshold = eta * std::min(ec.alpha, ec.beta);

    GridField amu = apply_pointwise(rho0, [&](double r) { return law.mu(r) / r; });
    GridField visc2 = apply_pointwise(rho0, [&](double r) { return (2.0 * law.mu(r) + law.lambda(r)) / r; });
    GridField kc = apply_pointwise(rho0, [&](double r) { return law.k(r) / r; });
    auto smoothed_min = [&](const GridField& f) {
        GridField s = low_freq_cutoff(f, m, bank);
        double mn = std::numeric_limits<double>::infinity();
        for (double v : s.real_data(0)) mn = std::min(mn, v);
        return mn;
    };
    rep.inf_smoothed_amu = smoothed_min(amu);
    rep.inf_smoothed_visc2 = smoothed_min(visc2);
    rep.inf_smoothed_kc = smoothed_min(kc);

    // a*grad(mu), b*grad(lambda), mu*grad(a), lambda*grad(b), k*grad(c), c*grad(k)
    GridField grad_rho = gradient(rho0);
    const BesovIndex idx(static_cast<double>(n) / p - 1.0, p, n);
    auto hf_mass = [&](const std::function<double(double)>& coef) {
        GridField field = dealias_phys(multiply(apply_pointwise(rho0, coef), grad_rho));
        return besov_norm(high_freq_remainder(field, m, bank), idx, bank);
    };
    double worst = 0.0;
    worst = std::max(worst, hf_mass([&](double r) { return law.dmu(r) / r; }));        // a grad mu
    worst = std::max(worst, hf_mass([&](double r) { return law.dlambda(r) / r; }));    // b grad lambda
    worst = std::max(worst, hf_mass([&](double r) { return -law.mu(r) / (r * r); }));  // mu grad a
    worst = std::max(worst, hf_mass([&](double r) { return -law.lambda(r) / (r * r); }));
    worst = std::max(worst, hf_mass([&](double r) { return -law.k(r) / (r * r); }));   // k grad c
    worst = std::max(worst, hf_mass([&](double r) { return law.dk(r) / r; }));         // c grad k
    rep.high_freq_mass = worst;

    rep.admissible = rep.inf_smoothed_amu >= 0.5 * ec.alpha - 1e-14 &&
                     rep.inf_smoothed_visc2 >= 0.5 * ec.alpha - 1e-14 &&
                     rep.inf_smoothed_kc >= 0.5 * ec.beta - 1e-14 &&
                     rep.high_freq_mass <= rep.threshold + 1e-14;
    return rep;
}

// Smallest admissible m in the bank's shift range, if any.
inline std::optional<CutoffReport> smallest_admissible_m(const ConstitutiveLaw& law,
                                                         const GridField& rho0, double eta,
                                                         const DyadicFilterBank& bank,
                                                         double p = 2.0) {
    for (int m = bank.j_min(); m <= bank.j_max() + 1; ++m) {
        CutoffReport rep = cutoff_admissible(law, rho0, m, eta, bank, p);
        if (rep.admissible) return rep;
    }
    return std::nullopt;
}

}  // namespace cnslab
