// SPDX-License-Identifier: Apache-2.0
//
// Flow maps X(t,y) = y + int_0^t v(tau,y) dtau built from a Lagrangian
// velocity timeline, their pointwise Jacobian algebra (J, A = (DX)^-1,
// adj(DX)), twisted differential operators, the inverse map, and changes of
// variables between Eulerian and Lagrangian fields.

#pragma once

#include "cnslab/time_norms.hpp"

namespace cnslab {

struct diffeomorphism_loss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowMap {
    double t = 0.0;
    GridField displacement;  // X - Id, vector
    GridField DX;            // matrix
    GridField J;             // det DX, scalar
    GridField A;             // (DX)^-1, matrix
    GridField adjDX;         // adjugate, matrix

    double min_jacobian() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : J.real_data(0)) m = std::min(m, v);
        return m;
    }
};

// Guard stricter than J>0: stay well inside the small-flow regime.
inline constexpr double kMinJacobian = 0.1;

// Builds DX = Id + D(displacement) spectrally and the determinant/adjugate/
// inverse by closed-form pointwise algebra (n <= 3), so A*DX = Id and
// adj(DX) = J*A hold to roundoff.
inline FlowMap flow_map_from_displacement(GridField displacement, double t) {
    const TorusGrid g = displacement.grid();  // copy: displacement is moved below
    const int n = g.dim();
    FlowMap fm{t, std::move(displacement), matrix_field(g), scalar_field(g), matrix_field(g),
               matrix_field(g)};
    fm.DX = add_identity(jacobian(fm.displacement), 1.0);
    const std::size_t npts = g.total_points();
    auto& Jv = fm.J.real_data(0);
    if (n == 2) {
        const auto& a = fm.DX.real_mat(0, 0);
        const auto& b = fm.DX.real_mat(0, 1);
        const auto& c = fm.DX.real_mat(1, 0);
        const auto& d = fm.DX.real_mat(1, 1);
        for (std::size_t p = 0; p < npts; ++p) {
            Jv[p] = a[p] * d[p] - b[p] * c[p];
            fm.adjDX.real_mat(0, 0)[p] = d[p];
            fm.adjDX.real_mat(0, 1)[p] = -b[p];
            fm.adjDX.real_mat(1, 0)[p] = -c[p];
            fm.adjDX.real_mat(1, 1)[p] = a[p];
        }
    } else {
        for (std::size_t p = 0; p < npts; ++p) {
            double m[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) m[i][j] = fm.DX.real_mat(i, j)[p];
            double adj[3][3];
            // adjugate = transpose of the cofactor matrix
            adj[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
            adj[0][1] = -(m[0][1] * m[2][2] - m[0][2] * m[2][1]);
            adj[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
            adj[1][0] = -(m[1][0] * m[2][2] - m[1][2] * m[2][0]);
            adj[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
            adj[1][2] = -(m[0][0] * m[1][2] - m[0][2] * m[1][0]);
            adj[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
            adj[2][1] = -(m[0][0] * m[2][1] - m[0][1] * m[2][0]);
            adj[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            Jv[p] = m[0][0] * adj[0][0] + m[1][0] * adj[0][1] + m[2][0] * adj[0][2];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) fm.adjDX.real_mat(i, j)[p] = adj[i][j];
        }
    }
    double minJ = std::numeric_limits<double>::infinity();
    for (double v : Jv) minJ = std::min(minJ, v);
    if (minJ < kMinJacobian)
        throw diffeomorphism_loss("flow map loses diffeomorphism regime at t=" + std::to_string(t) +
                                  " (min J = " + std::to_string(minJ) + ")");
    fm.A = divide(fm.adjDX, fm.J);
    return fm;
}

// Cumulative trapezoidal displacement at every sample time of the timeline.
inline std::vector<GridField> cumulative_displacement(const Timeline& v) {
    if (v.empty()) throw std::logic_error("cumulative_displacement: empty timeline");
    std::vector<GridField> disp;
    disp.reserve(v.steps());
    disp.push_back(GridField(v.fields[0].grid(), Rank::vector, Repr::physical));
    for (std::size_t i = 0; i + 1 < v.steps(); ++i) {
        GridField next = disp.back();
        const double h = v.times[i + 1] - v.times[i];
        next.axpy(0.5 * h, v.fields[i]);
        next.axpy(0.5 * h, v.fields[i + 1]);
        disp.push_back(std::move(next));
    }
    return disp;
}

inline FlowMap integrate_flow(const Timeline& v, double t) {
    if (v.empty()) throw std::logic_error("integrate_flow: empty timeline");
    if (t < v.times.front() - 1e-12 || t > v.times.back() + 1e-12)
        throw std::out_of_range("integrate_flow: t outside the timeline span");
    const double dt = v.steps() > 1 ? v.dt() : 0.0;
    std::vector<GridField> disp = cumulative_displacement(v);
    std::size_t i = 0;
    if (dt > 0.0)
        i = std::min(v.steps() - 1,
                     static_cast<std::size_t>(std::max(0.0, std::floor((t - v.times.front()) / dt))));
    GridField d = disp[i];
    const double tau = t - v.times[i];
    if (tau > 1e-14 && i + 1 < v.steps()) {
        // partial trapezoid with linearly interpolated velocity
        const double w = tau / dt;
        GridField vt = v.fields[i];
        vt *= (1.0 - w);
        vt.axpy(w, v.fields[i + 1]);
        d.axpy(0.5 * tau, v.fields[i]);
        d.axpy(0.5 * tau, vt);
    }
    return flow_map_from_displacement(std::move(d), t);
}

// D_A(w) = (Dw.A + tA.grad w)/2, dealiased.
inline GridField twisted_deformation(const GridField& w, const GridField& A) {
    GridField dw = jacobian(w);
    GridField out = mat_mat(dw, A);
    out += mat_mat(transpose(A), transpose(dw));
    out *= 0.5;
    return dealias_phys(out);
}

// div_A w = Dw : A = sum_ij d_j w^i A_ji, dealiased.
inline GridField twisted_divergence(const GridField& w, const GridField& A) {
    return dealias_phys(trace_contract(jacobian(w), A));
}

// Solves X(y) = x per grid node by damped fixed-point iteration on
// y = x - displacement(y), with a Newton fallback when the contraction is
// poor; returns the inverse displacement X^-1 - Id sampled on the grid.
inline GridField invert_flow(const FlowMap& X, double tol = 1e-10, int max_iter = 60) {
    const TorusGrid& g = X.displacement.grid();
    const int n = g.dim();
    const double quarter = 0.25 * g.period(0);
    if (X.displacement.max_abs() >= quarter)
        throw diffeomorphism_loss("invert_flow: displacement exceeds a quarter period");
    const std::size_t npts = g.total_points();
    std::vector<std::array<double, 3>> y(npts);
    for (std::size_t p = 0; p < npts; ++p) y[p] = g.coord(g.unflatten(p));
    const std::vector<std::array<double, 3>> x = y;

    double prev_res = std::numeric_limits<double>::infinity();
    bool newton = false;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::vector<double>> dval(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) dval[static_cast<std::size_t>(c)] = evaluate_offgrid(X.displacement, y, c);
        double res = 0.0;
        for (std::size_t p = 0; p < npts; ++p)
            for (int c = 0; c < n; ++c)
                res = std::max(res, std::abs(y[p][static_cast<std::size_t>(c)] +
                                             dval[static_cast<std::size_t>(c)][p] -
                                             x[p][static_cast<std::size_t>(c)]));
        if (res <= tol) {
            GridField inv(g, Rank::vector, Repr::physical);
            for (int c = 0; c < n; ++c)
                for (std::size_t p = 0; p < npts; ++p)
                    inv.real_data(c)[p] = y[p][static_cast<std::size_t>(c)] - x[p][static_cast<std::size_t>(c)];
            return inv;
        }
        if (res > 0.9 * prev_res) newton = true;
        prev_res = res;
        if (!newton) {
            for (std::size_t p = 0; p < npts; ++p)
                for (int c = 0; c < n; ++c)
                    y[p][static_cast<std::size_t>(c)] =
                        x[p][static_cast<std::size_t>(c)] - dval[static_cast<std::size_t>(c)][p];
        } else {
            std::vector<std::vector<double>> dx(static_cast<std::size_t>(n * n));
            for (int c = 0; c < n * n; ++c) dx[static_cast<std::size_t>(c)] = evaluate_offgrid(X.DX, y, c);
            for (std::size_t p = 0; p < npts; ++p) {
                double r[3] = {0, 0, 0};
                for (int c = 0; c < n; ++c)
                    r[c] = y[p][static_cast<std::size_t>(c)] + dval[static_cast<std::size_t>(c)][p] -
                           x[p][static_cast<std::size_t>(c)];
                if (n == 2) {
                    const double a = dx[0][p], b = dx[1][p], c2 = dx[2][p], d = dx[3][p];
                    const double det = a * d - b * c2;
                    y[p][0] -= (d * r[0] - b * r[1]) / det;
                    y[p][1] -= (-c2 * r[0] + a * r[1]) / det;
                } else {
                    double m[3][3];
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) m[i][j] = dx[static_cast<std::size_t>(i * 3 + j)][p];
                    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                    double s[3];
                    s[0] = ((m[1][1] * m[2][2] - m[1][2] * m[2][1]) * r[0] -
                            (m[0][1] * m[2][2] - m[0][2] * m[2][1]) * r[1] +
                            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * r[2]) / det;
                    s[1] = (-(m[1][0] * m[2][2] - m[1][2] * m[2][0]) * r[0] +
                            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * r[1] -
                            (m[0][0] * m[1][2] - m[0][2] * m[1][0]) * r[2]) / det;
                    s[2] = ((m[1][0] * m[2][1] - m[1][1] * m[2][0]) * r[0] -
                            (m[0][0] * m[2][1] - m[0][1] * m[2][0]) * r[1] +
                            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * r[2]) / det;
                    for (int c = 0; c < 3; ++c) y[p][static_cast<std::size_t>(c)] -= s[c];
                }
            }
        }
    }
    throw diffeomorphism_loss("invert_flow: no convergence within max iterations");
}

// f o X: evaluate f at the displaced nodes.
inline GridField pullback(const GridField& f, const FlowMap& X) {
    const TorusGrid& g = f.grid();
    const std::size_t npts = g.total_points();
    std::vector<std::array<double, 3>> pts(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        pts[p] = g.coord(g.unflatten(p));
        for (int d = 0; d < g.dim(); ++d)
            pts[p][static_cast<std::size_t>(d)] += X.displacement.real_data(d)[p];
    }
    GridField out(g, f.rank(), Repr::physical);
    for (int c = 0; c < f.components(); ++c) out.real_data(c) = evaluate_offgrid(f, pts, c);
    return out;
}

// f o X^-1 with a precomputed inverse displacement.
inline GridField pushforward(const GridField& f, const GridField& inverse_displacement) {
    const TorusGrid& g = f.grid();
    const std::size_t npts = g.total_points();
    std::vector<std::array<double, 3>> pts(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        pts[p] = g.coord(g.unflatten(p));
        for (int d = 0; d < g.dim(); ++d)
            pts[p][static_cast<std::size_t>(d)] += inverse_displacement.real_data(d)[p];
    }
    GridField out(g, f.rank(), Repr::physical);
    for (int c = 0; c < f.components(); ++c) out.real_data(c) = evaluate_offgrid(f, pts, c);
    return out;
}

inline GridField pushforward(const GridField& f, const FlowMap& X) {
    return pushforward(f, invert_flow(X));
}

}  // namespace cnslab
