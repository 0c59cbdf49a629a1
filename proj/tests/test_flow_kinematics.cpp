// SPDX-License-Identifier: Apache-2.0
//
// flow_kinematics: flow-map algebra, twisted operators, inverse maps,
// pullback/pushforward, change-of-variable identities, Jacobi formula,
// flow-estimate ratios. Shear flows admit a closed-form 2x2 oracle.

#include <doctest.h>

#include <cmath>

#include "cnslab/flow_checks.hpp"
#include "cnslab/rng.hpp"

using namespace cnslab;

namespace {

// Timeline of a steady shear v = (gamma sin(y2), 0): X1 = y1 + t gamma sin y2.
Timeline shear_timeline(const TorusGrid& g, double gamma, double T, int steps) {
    GridField v = vector_field(g);
    v.fill([&](const std::array<double, 3>& x, int c) { return c == 0 ? gamma * std::sin(x[1]) : 0.0; });
    Timeline tl;
    for (int i = 0; i <= steps; ++i) tl.push(T / steps * i, v);
    return tl;
}

// Rescales w so that max |Dw| = target (keeps random flows inside the
// diffeomorphism regime).
GridField scaled_to_jacobian(GridField w, double target) {
    const double m = lp_norm(jacobian(w), std::numeric_limits<double>::infinity());
    if (m > 0.0) w *= target / m;
    return w;
}

// Compressive profile v = (a(t) sin(y1), 0) with a(t) = a0 cos(omega t).
Timeline compressive_timeline(const TorusGrid& g, double a0, double omega, double T, int steps) {
    Timeline tl;
    for (int i = 0; i <= steps; ++i) {
        const double t = T / steps * i;
        GridField v = vector_field(g);
        v.fill([&](const std::array<double, 3>& x, int c) {
            return c == 0 ? a0 * std::cos(omega * t) * std::sin(x[0]) : 0.0;
        });
        tl.push(t, std::move(v));
    }
    return tl;
}

}  // namespace

TEST_SUITE("flow_kinematics") {

TEST_CASE("trivial flows: v=0 gives the identity map, constant v gives a translation") {
    TorusGrid g(2, 32);
    Timeline zero;
    for (int i = 0; i <= 4; ++i) zero.push(0.25 * i, GridField(g, Rank::vector, Repr::physical));
    FlowMap X = integrate_flow(zero, 1.0);
    CHECK(X.displacement.max_abs() == 0.0);
    CHECK(max_abs_diff(X.DX, identity_matrix_field(g)) <= 1e-14);
    CHECK(max_abs_diff(X.J, constant_field(g, 1.0)) <= 1e-14);
    CHECK(max_abs_diff(X.A, identity_matrix_field(g)) <= 1e-14);
    CHECK(max_abs_diff(X.adjDX, identity_matrix_field(g)) <= 1e-14);

    Timeline c;
    for (int i = 0; i <= 4; ++i) c.push(0.25 * i, constant_field(g, 0.3, Rank::vector));
    FlowMap Xc = integrate_flow(c, 0.5);
    CHECK(max_abs_diff(Xc.displacement, constant_field(g, 0.15, Rank::vector)) <= 1e-13);
    CHECK(max_abs_diff(Xc.J, constant_field(g, 1.0)) <= 1e-13);
}

TEST_CASE("steady shear matches the closed-form 2x2 algebra") {
    TorusGrid g(2, 32);
    const double gamma = 0.2, T = 1.0;
    Timeline v = shear_timeline(g, gamma, T, 8);
    FlowMap X = integrate_flow(v, T);
    // DX = [[1, T gamma cos y2],[0, 1]], J = 1, A = [[1, -T gamma cos y2],[0,1]]
    GridField expectDX = matrix_field(g);
    expectDX.fill([&](const std::array<double, 3>& x, int comp) {
        if (comp == 0 || comp == 3) return 1.0;
        if (comp == 1) return T * gamma * std::cos(x[1]);
        return 0.0;
    });
    CHECK(max_abs_diff(X.DX, expectDX) <= 1e-12);
    CHECK(max_abs_diff(X.J, constant_field(g, 1.0)) <= 1e-12);
    GridField expectA = matrix_field(g);
    expectA.fill([&](const std::array<double, 3>& x, int comp) {
        if (comp == 0 || comp == 3) return 1.0;
        if (comp == 1) return -T * gamma * std::cos(x[1]);
        return 0.0;
    });
    CHECK(max_abs_diff(X.A, expectA) <= 1e-12);
}

TEST_CASE("pointwise algebra invariants: A.DX = Id and adjDX = J A, 2D and 3D") {
    for (int dim : {2, 3}) {
        TorusGrid g(dim, dim == 2 ? 32 : 16);
        Rng rng(71);
        Timeline v;
        GridField w = scaled_to_jacobian(random_band_limited(g, Rank::vector, 3, 1.5, rng), 0.35);
        for (int i = 0; i <= 4; ++i) v.push(0.25 * i, w);
        FlowMap X = integrate_flow(v, 1.0);
        CHECK(X.min_jacobian() >= 0.5);
        CHECK(max_abs_diff(mat_mat(X.A, X.DX), identity_matrix_field(g)) <= 1e-10);
        CHECK(max_abs_diff(X.adjDX, multiply(X.J, X.A)) <= 1e-10);
    }
}

TEST_CASE("diffeomorphism guard aborts with the offending time") {
    TorusGrid g(2, 32);
    Timeline v = compressive_timeline(g, 1.2, 0.0, 1.0, 8);  // displacement 1.2 sin y1 at t=1
    CHECK_THROWS_AS(integrate_flow(v, 1.0), diffeomorphism_loss);
}

TEST_CASE("twisted operators reduce to D(w), div w at A=Id and vanish on w=0") {
    TorusGrid g(2, 32);
    Rng rng(73);
    GridField w = random_band_limited(g, Rank::vector, 5, 1.0, rng);
    GridField idm = identity_matrix_field(g);
    CHECK(max_abs_diff(twisted_deformation(w, idm), dealias_phys(deformation(w))) <= 1e-11);
    CHECK(max_abs_diff(twisted_divergence(w, idm), dealias_phys(divergence(w))) <= 1e-11);
    GridField z(g, Rank::vector, Repr::physical);
    CHECK(twisted_deformation(z, idm).max_abs() == 0.0);
    CHECK(twisted_divergence(z, idm).max_abs() == 0.0);
}

TEST_CASE("adj(DX) div_A(w) - div w Id is quadratically small in the flow") {
    TorusGrid g(2, 32);
    Rng rng(79);
    GridField w = random_band_limited(g, Rank::vector, 4, 1.5, rng, 0.5);
    double prev = -1.0;
    for (double eps : {0.1, 0.05, 0.025}) {
        Timeline v;
        GridField vf = scaled_to_jacobian(random_band_limited(g, Rank::vector, 3, 1.5, rng), 1.0);
        vf *= eps;
        for (int i = 0; i <= 4; ++i) v.push(0.25 * i, vf);
        FlowMap X = integrate_flow(v, 1.0);
        GridField lhs = multiply(twisted_divergence(w, X.A), X.adjDX);
        GridField rhs = multiply(dealias_phys(divergence(w)), identity_matrix_field(g));
        const double discrepancy = max_abs_diff(lhs, rhs);
        const double dv_norm = eps;  // Dv scales linearly with eps
        CHECK(discrepancy <= 20.0 * dv_norm * lp_norm(jacobian(w), std::numeric_limits<double>::infinity()));
        if (prev >= 0.0) CHECK(discrepancy <= 0.75 * prev);  // shrinks with the flow
        prev = discrepancy;
    }
}

TEST_CASE("divergence-free velocity: J-1 is quadratic in the flow amplitude") {
    TorusGrid g(2, 32);
    // v = eps (sin y2, sin y1): div v = 0, J = 1 - (t eps)^2 cos y1 cos y2
    double jm1[3];
    int i = 0;
    for (double eps : {0.08, 0.04, 0.02}) {
        Timeline v;
        GridField vf = vector_field(g);
        vf.fill([&](const std::array<double, 3>& x, int c) {
            return eps * (c == 0 ? std::sin(x[1]) : std::sin(x[0]));
        });
        for (int s = 0; s <= 4; ++s) v.push(0.25 * s, vf);
        FlowMap X = integrate_flow(v, 1.0);
        GridField one = constant_field(g, 1.0);
        jm1[i++] = max_abs_diff(X.J, one);
        GridField exact = scalar_field(g);
        exact.fill([&](const std::array<double, 3>& x, int) {
            return 1.0 - eps * eps * std::cos(x[0]) * std::cos(x[1]);
        });
        CHECK(max_abs_diff(X.J, exact) <= 1e-12);
    }
    CHECK(std::log2(jm1[0] / jm1[1]) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(std::log2(jm1[1] / jm1[2]) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("inverse flow: identity, translation, and round trip") {
    TorusGrid g(2, 32);
    Timeline zero;
    for (int i = 0; i <= 2; ++i) zero.push(0.5 * i, GridField(g, Rank::vector, Repr::physical));
    FlowMap Xid = integrate_flow(zero, 1.0);
    CHECK(invert_flow(Xid).max_abs() <= 1e-12);

    Timeline c;
    for (int i = 0; i <= 2; ++i) c.push(0.5 * i, constant_field(g, 0.4, Rank::vector));
    FlowMap Xc = integrate_flow(c, 1.0);
    GridField inv = invert_flow(Xc);
    CHECK(max_abs_diff(inv, constant_field(g, -0.4, Rank::vector)) <= 1e-10);

    Rng rng(83);
    Timeline v;
    GridField w = scaled_to_jacobian(random_band_limited(g, Rank::vector, 3, 1.5, rng), 0.3);
    for (int i = 0; i <= 2; ++i) v.push(0.5 * i, w);
    FlowMap X = integrate_flow(v, 1.0);
    GridField invd = invert_flow(X);
    // X(X^-1(x)) = x: evaluate displacement at y = x + invd and check closure
    const std::size_t npts = g.total_points();
    std::vector<std::array<double, 3>> y(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        y[p] = g.coord(g.unflatten(p));
        for (int d = 0; d < g.dim(); ++d) y[p][static_cast<std::size_t>(d)] += invd.real_data(d)[p];
    }
    double worst = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        auto vals = evaluate_offgrid(X.displacement, y, d);
        for (std::size_t p = 0; p < npts; ++p) {
            const double xd = g.coord(g.unflatten(p))[static_cast<std::size_t>(d)];
            worst = std::max(worst, std::abs(y[p][static_cast<std::size_t>(d)] + vals[p] - xd));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("pullback and pushforward: identity map, constants, closed-form translation") {
    TorusGrid g(2, 32);
    Timeline zero;
    for (int i = 0; i <= 2; ++i) zero.push(0.5 * i, GridField(g, Rank::vector, Repr::physical));
    FlowMap Xid = integrate_flow(zero, 1.0);
    Rng rng(89);
    GridField f = random_band_limited(g, Rank::scalar, 6, 1.0, rng);
    CHECK(max_abs_diff(pullback(f, Xid), f) <= 1e-11);
    CHECK(max_abs_diff(pushforward(f, Xid), f) <= 1e-11);

    GridField c = constant_field(g, 2.5);
    Timeline tr;
    for (int i = 0; i <= 2; ++i) tr.push(0.5 * i, constant_field(g, 0.7, Rank::vector));
    FlowMap Xtr = integrate_flow(tr, 1.0);
    CHECK(max_abs_diff(pullback(c, Xtr), c) <= 1e-12);
    CHECK(max_abs_diff(pushforward(c, Xtr), c) <= 1e-10);

    GridField s = scalar_field(g);
    s.fill([](const std::array<double, 3>& x, int) { return std::sin(x[0]); });
    GridField pb = pullback(s, Xtr);  // sin(y1 + 0.7) at t=1... both components shift
    GridField expect = scalar_field(g);
    expect.fill([](const std::array<double, 3>& x, int) { return std::sin(x[0] + 0.7); });
    CHECK(max_abs_diff(pb, expect) <= 1e-11);
}

TEST_CASE("pushforward(pullback(f)) = f to interpolation tolerance for small flows") {
    TorusGrid g(2, 32);
    Rng rng(97);
    Timeline v;
    GridField w = scaled_to_jacobian(random_band_limited(g, Rank::vector, 3, 1.5, rng), 0.12);
    for (int i = 0; i <= 2; ++i) v.push(0.5 * i, w);
    FlowMap X = integrate_flow(v, 1.0);
    GridField f = random_band_limited(g, Rank::scalar, 4, 1.5, rng);
    GridField round = pushforward(pullback(f, X), X);
    CHECK(max_abs_diff(round, f) <= 1e-8 * std::max(1.0, f.max_abs()));
}

TEST_CASE("change-of-variable identities: exact at X=Id, spectral refinement otherwise") {
    // X = Id
    {
        TorusGrid g(2, 32);
        Timeline zero;
        for (int i = 0; i <= 2; ++i) zero.push(0.5 * i, GridField(g, Rank::vector, Repr::physical));
        FlowMap Xid = integrate_flow(zero, 1.0);
        Rng rng(101);
        GridField K = random_band_limited(g, Rank::scalar, 5, 1.0, rng);
        GridField H = random_band_limited(g, Rank::vector, 5, 1.0, rng);
        GridField u = random_band_limited(g, Rank::vector, 5, 1.0, rng);
        DivIdentityReport rep = check_div_identity(K, H, u, Xid);
        CHECK(rep.max_residual() <= 1e-11);

        // H = const: both sides of the divergence identity vanish
        DivIdentityReport repc = check_div_identity(K, constant_field(g, 1.0, Rank::vector), u, Xid);
        CHECK(repc.divergence_residual <= 1e-12);
    }
    // residual drops by >= 10x from N=32 to N=64 on analytic data
    double res[2];
    int i = 0;
    for (int n : {32, 64}) {
        TorusGrid g(2, n);
        GridField disp = vector_field(g);
        disp.fill([](const std::array<double, 3>& x, int c) {
            return c == 0 ? 0.12 * std::sin(x[1]) + 0.1 * std::cos(x[0] + x[1])
                          : 0.1 * std::cos(x[0]);
        });
        FlowMap X = flow_map_from_displacement(disp, 1.0);
        GridField K = scalar_field(g);
        K.fill([](const std::array<double, 3>& x, int) { return std::exp(4.0 * std::sin(x[0]) * std::cos(x[1])); });
        GridField H = vector_field(g);
        H.fill([](const std::array<double, 3>& x, int c) {
            return c == 0 ? std::exp(3.2 * std::cos(x[1])) : std::sin(x[0] + 2.0 * x[1]);
        });
        GridField u = H;
        res[i++] = check_div_identity(K, H, u, X).max_residual();
    }
    CHECK(res[1] <= res[0] / 10.0);
}

TEST_CASE("Jacobi formula: reductions and manufactured-solution temporal order") {
    TorusGrid g(2, 32);
    // v = 0: identity reduces to d_t zbar = (d_t z)bar; residual is FD-only
    {
        Timeline z, v;
        const int steps = 16;
        for (int i = 0; i <= steps; ++i) {
            const double t = 0.5 / steps * i;
            GridField zf = scalar_field(g);
            zf.fill([&](const std::array<double, 3>& x, int) { return std::exp(t) * std::cos(x[0]); });
            z.push(t, std::move(zf));
            v.push(t, GridField(g, Rank::vector, Repr::physical));
        }
        // central FD of e^t has relative error dt^2/6
        CHECK(check_jacobi(z, v) <= 1e-3);
    }
    // z = const with div-free shear: both sides reduce to zero up to FD noise
    {
        Timeline z, v;
        const int steps = 8;
        for (int i = 0; i <= steps; ++i) {
            const double t = 0.4 / steps * i;
            z.push(t, constant_field(g, 3.0));
            GridField vf = vector_field(g);
            vf.fill([](const std::array<double, 3>& x, int c) { return c == 0 ? 0.2 * std::sin(x[1]) : 0.0; });
            v.push(t, std::move(vf));
        }
        CHECK(check_jacobi(z, v) <= 1e-10);
    }
    // manufactured compressive flow: residual scales like dt^2
    double res[3];
    int k = 0;
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
        res[k++] = check_jacobi(z, v);
    }
    const double order1 = std::log2(res[0] / res[1]);
    const double order2 = std::log2(res[1] / res[2]);
    CHECK(order1 >= 1.9);
    CHECK(order2 >= 1.9);
}

TEST_CASE("flow estimate report: zero and constant velocities, eps-sweep stability") {
    TorusGrid g(2, 32);
    DyadicFilterBank bank = default_filter_bank(g);
    Timeline zero;
    for (int i = 0; i <= 4; ++i) zero.push(0.25 * i, GridField(g, Rank::vector, Repr::physical));
    FlowRatioReport rz = flow_estimate_report(zero, bank);
    for (const auto& row : rz.rows) {
        CHECK(row.numerator <= 1e-12);
        CHECK(row.exact_zero);
    }

    Timeline c;
    for (int i = 0; i <= 4; ++i) c.push(0.25 * i, constant_field(g, 0.5, Rank::vector));
    FlowRatioReport rc = flow_estimate_report(c, bank);
    for (const auto& row : rc.rows) CHECK(row.exact_zero);  // Dv = 0, A = Id

    // eps-sweep of shears: ratio approaches a constant
    double ratios[3];
    int i = 0;
    for (double eps : {0.02, 0.01, 0.005}) {
        Timeline v = shear_timeline(g, eps, 1.0, 4);
        FlowRatioReport r = flow_estimate_report(v, bank);
        CHECK(r.smallness_ok);
        ratios[i++] = r.rows[0].ratio;  // Id-A row
    }
    CHECK(std::abs(ratios[1] - ratios[2]) <= 0.15 * std::abs(ratios[2]) + 1e-9);
    // difference ratios against a perturbed timeline stay finite
    Timeline v1 = shear_timeline(g, 0.05, 1.0, 4);
    Timeline v2 = shear_timeline(g, 0.06, 1.0, 4);
    FlowRatioReport rd = flow_estimate_report(v1, bank, 2.0, 0.1, &v2);
    CHECK(rd.rows.size() == 8);
    for (const auto& row : rd.rows)
        if (!row.exact_zero) CHECK(std::isfinite(row.ratio));
}

TEST_CASE("smallness violation is flagged, ratios still computed") {
    TorusGrid g(2, 32);
    DyadicFilterBank bank = default_filter_bank(g);
    Timeline v = shear_timeline(g, 0.5, 1.0, 4);
    FlowRatioReport r = flow_estimate_report(v, bank, 2.0, 0.1);
    CHECK_FALSE(r.smallness_ok);
    CHECK(r.rows.size() == 4);
    for (const auto& row : r.rows) CHECK(std::isfinite(row.ratio));
}

}  // TEST_SUITE
