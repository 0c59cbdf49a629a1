// SPDX-License-Identifier: Apache-2.0
//
// Numerical verifiers for the change-of-variable identities (gradient,
// divergence, Laplacian, grad-div written through adj(DX)), the Jacobi
// formula d_t(J zbar) = J (d_t z + div(z u)) o X, and the flow estimates
// bounding Id-A, adj(DX)-Id, J^{+-1}-1 by the integrated velocity gradient.

#pragma once

#include "cnslab/flow.hpp"

namespace cnslab {

struct DivIdentityReport {
    double gradient_residual = 0.0;   // grad_x K o X  vs  J^-1 div_y(adj(DX) Kbar)
    double divergence_residual = 0.0; // div_x H o X   vs  J^-1 div_y(adj(DX) Hbar)
    double laplacian_residual = 0.0;  // lap_x u o X   vs  J^-1 div_y(adj(DX) tA grad ubar)
    double graddiv_residual = 0.0;    // grad div u o X vs J^-1 div_y(adj(DX) div_A ubar)
    double max_residual() const {
        return std::max(std::max(gradient_residual, divergence_residual),
                        std::max(laplacian_residual, graddiv_residual));
    }
};

// K scalar, H and u vector, all band-limited Eulerian test data.
inline DivIdentityReport check_div_identity(const GridField& K, const GridField& H,
                                            const GridField& u, const FlowMap& X) {
    DivIdentityReport rep;
    {
        GridField lhs = pullback(gradient(K), X);
        GridField Kbar = pullback(K, X);
        GridField rhs = divide(divergence(multiply(Kbar, X.adjDX)), X.J);
        rep.gradient_residual = max_abs_diff(lhs, rhs);
    }
    {
        GridField lhs = pullback(divergence(H), X);
        GridField Hbar = pullback(H, X);
        GridField rhs = divide(divergence(mat_vec(X.adjDX, Hbar)), X.J);
        rep.divergence_residual = max_abs_diff(lhs, rhs);
    }
    {
        GridField ubar = pullback(u, X);
        GridField lhs = pullback(laplacian(u), X);
        GridField rhs = divide(divergence(mat_mat(X.adjDX, mat_mat(transpose(X.A), nabla(ubar)))), X.J);
        rep.laplacian_residual = max_abs_diff(lhs, rhs);
    }
    {
        GridField ubar = pullback(u, X);
        GridField divA = trace_contract(jacobian(ubar), X.A);  // div_x u o X
        GridField lhs = pullback(gradient(divergence(u)), X);
        GridField rhs = divide(divergence(multiply(divA, X.adjDX)), X.J);
        rep.graddiv_residual = max_abs_diff(lhs, rhs);
    }
    return rep;
}

// Max-norm residual of the Jacobi formula over the interior sample times.
// z: Eulerian scalar trajectory, v: the advecting Lagrangian velocity.
inline double check_jacobi(const Timeline& z, const Timeline& v) {
    z.require_same_times(v);
    if (z.steps() < 3) throw std::logic_error("check_jacobi: need >= 3 samples");
    const double dt = z.dt();
    std::vector<GridField> disp = cumulative_displacement(v);
    std::vector<FlowMap> X;
    X.reserve(z.steps());
    for (std::size_t i = 0; i < z.steps(); ++i)
        X.push_back(flow_map_from_displacement(disp[i], z.times[i]));

    std::vector<GridField> Jz;  // J(t) zbar(t)
    Jz.reserve(z.steps());
    for (std::size_t i = 0; i < z.steps(); ++i)
        Jz.push_back(multiply(X[i].J, pullback(z.fields[i], X[i])));

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < z.steps(); ++i) {
        GridField lhs = Jz[i + 1];
        lhs -= Jz[i - 1];
        lhs *= 1.0 / (2.0 * dt);

        GridField dtz = z.fields[i + 1];
        dtz -= z.fields[i - 1];
        dtz *= 1.0 / (2.0 * dt);
        GridField rhs = pullback(dtz, X[i]);
        GridField zbar = pullback(z.fields[i], X[i]);
        rhs += multiply(zbar, trace_contract(jacobian(v.fields[i]), X[i].A));
        GridField gradz = gradient(z.fields[i]);
        for (int d = 0; d < z.fields[i].grid().dim(); ++d) {
            GridField gz_d(z.fields[i].grid(), Rank::scalar, Repr::physical);
            gz_d.real_data(0) = gradz.real_data(d);
            GridField vd(gz_d);
            vd.real_data(0) = v.fields[i].real_data(d);
            rhs += multiply(vd, pullback(gz_d, X[i]));
        }
        rhs = multiply(X[i].J, rhs);
        worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
    return worst;
}

struct FlowRatioRow {
    std::string name;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
    bool exact_zero = false;  // 0/0 case reported explicitly
};

struct FlowRatioReport {
    std::vector<FlowRatioRow> rows;
    double smallness = 0.0;      // int ||Dv||_{B^{n/p}} dt
    bool smallness_ok = true;    // against the configured c-tilde
    double max_ratio() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, r.ratio);
        return m;
    }
};

namespace detail {
inline FlowRatioRow make_ratio_row(std::string name, double num, double den) {
    FlowRatioRow row{std::move(name), num, den, 0.0, false};
    if (den < 1e-14) {
        row.exact_zero = num < 1e-12;
        row.ratio = row.exact_zero ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        row.ratio = num / den;
    }
    return row;
}
}  // namespace detail

// Flow-estimate ratios: sup_t ||Id-A||, ||adj(DX)-Id||, ||J^{+-1}-1|| in
// B^{n/p}_{p,1} against ||Dv||_{L^1_T(B^{n/p}_{p,1})}; with a second timeline
// the corresponding difference ratios against ||D(dv)||.
inline FlowRatioReport flow_estimate_report(const Timeline& v, const DyadicFilterBank& bank,
                                            double p = 2.0, double smallness_c = 0.1,
                                            const Timeline* v2 = nullptr) {
    const int n = bank.grid().dim();
    const BesovIndex idx(static_cast<double>(n) / p, p, n);
    FlowRatioReport rep;
    rep.smallness = smallness_integral(v, p, bank);
    rep.smallness_ok = rep.smallness <= smallness_c;

    double sup_A = 0.0, sup_adj = 0.0, sup_J = 0.0, sup_Jinv = 0.0;
    std::vector<GridField> disp = cumulative_displacement(v);
    for (std::size_t i = 0; i < v.steps(); ++i) {
        FlowMap X = flow_map_from_displacement(disp[i], v.times[i]);
        sup_A = std::max(sup_A, besov_norm(add_identity(X.A, -1.0), idx, bank));
        sup_adj = std::max(sup_adj, besov_norm(add_identity(X.adjDX, -1.0), idx, bank));
        GridField jm1 = apply_pointwise(X.J, [](double a) { return a - 1.0; });
        GridField jim1 = apply_pointwise(X.J, [](double a) { return 1.0 / a - 1.0; });
        sup_J = std::max(sup_J, besov_norm(jm1, idx, bank));
        sup_Jinv = std::max(sup_Jinv, besov_norm(jim1, idx, bank));
    }
    rep.rows.push_back(detail::make_ratio_row("Id-A", sup_A, rep.smallness));
    rep.rows.push_back(detail::make_ratio_row("adj-Id", sup_adj, rep.smallness));
    rep.rows.push_back(detail::make_ratio_row("J-1", sup_J, rep.smallness));
    rep.rows.push_back(detail::make_ratio_row("Jinv-1", sup_Jinv, rep.smallness));

    if (v2 != nullptr) {
        Timeline dv = difference(*v2, v);
        const double den = smallness_integral(dv, p, bank);
        std::vector<GridField> disp2 = cumulative_displacement(*v2);
        double dA = 0.0, dadj = 0.0, dJ = 0.0, dJinv = 0.0;
        for (std::size_t i = 0; i < v.steps(); ++i) {
            FlowMap X1 = flow_map_from_displacement(disp[i], v.times[i]);
            FlowMap X2 = flow_map_from_displacement(disp2[i], v.times[i]);
            dA = std::max(dA, besov_norm(X2.A - X1.A, idx, bank));
            dadj = std::max(dadj, besov_norm(X2.adjDX - X1.adjDX, idx, bank));
            dJ = std::max(dJ, besov_norm(X2.J - X1.J, idx, bank));
            GridField ji1 = apply_pointwise(X1.J, [](double a) { return 1.0 / a; });
            GridField ji2 = apply_pointwise(X2.J, [](double a) { return 1.0 / a; });
            dJinv = std::max(dJinv, besov_norm(ji2 - ji1, idx, bank));
        }
        rep.rows.push_back(detail::make_ratio_row("dA", dA, den));
        rep.rows.push_back(detail::make_ratio_row("dadj", dadj, den));
        rep.rows.push_back(detail::make_ratio_row("dJ", dJ, den));
        rep.rows.push_back(detail::make_ratio_row("dJinv", dJinv, den));
    }
    return rep;
}

}  // namespace cnslab
