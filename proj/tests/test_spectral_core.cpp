// SPDX-License-Identifier: Apache-2.0
//
// spectral_core: transforms, differentiation, dealiasing, off-grid
// evaluation, quadrature. Derived expectations come from independent oracles
// (direct mode summation, padded-transform products, closed-form integrals).

#include <doctest.h>

#include <cmath>

#include "cnslab/field_io.hpp"
#include "cnslab/rng.hpp"
#include "cnslab/spectral.hpp"

using namespace cnslab;

namespace {

// Direct O(modes x points) evaluation of the interpolant; the oracle for
// evaluate_offgrid.
double naive_mode_sum(const GridField& f, int comp, const std::array<double, 3>& x) {
    GridField fs = to_spectral(f);
    const TorusGrid& g = f.grid();
    cplx acc(0.0, 0.0);
    for (std::size_t p = 0; p < f.size(); ++p) {
        auto k = g.freq_indices(p);
        double arg = 0.0;
        for (int d = 0; d < g.dim(); ++d)
            arg += kTwoPi / g.period(d) * k[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
        acc += fs.spec_data(comp)[p] * cplx(std::cos(arg), std::sin(arg));
    }
    return acc.real();
}

// Exact product of two band-limited fields via zero-padded transforms on a
// double-resolution grid, truncated back. Oracle for the 2/3 dealias rule.
GridField padded_product(const GridField& a, const GridField& b) {
    const TorusGrid& g = a.grid();
    TorusGrid g2(g.dim(), 2 * g.points_per_axis(), g.period());
    auto upsample = [&](const GridField& f) {
        GridField fs = to_spectral(f);
        GridField out(g2, f.rank(), Repr::spectral);
        for (int c = 0; c < f.components(); ++c)
            for (std::size_t p = 0; p < f.size(); ++p) {
                auto idx = g.unflatten(p);
                std::array<int, 3> up{0, 0, 0};
                for (int d = 0; d < g.dim(); ++d) {
                    int k = g.freq_index(idx[static_cast<std::size_t>(d)]);
                    up[static_cast<std::size_t>(d)] = k >= 0 ? k : k + g2.points_per_axis();
                }
                out.spec_data(c)[g2.flatten(up)] = fs.spec_data(c)[p];
            }
        return inverse_transform(out);
    };
    GridField prod2 = multiply(upsample(a), upsample(b));
    GridField ps = forward_transform(prod2);
    GridField out(g, Rank::scalar, Repr::spectral);
    for (std::size_t p = 0; p < out.size(); ++p) {
        auto idx = g.unflatten(p);
        std::array<int, 3> up{0, 0, 0};
        bool rep = true;
        for (int d = 0; d < g.dim(); ++d) {
            int k = g.freq_index(idx[static_cast<std::size_t>(d)]);
            if (k == -g.points_per_axis() / 2) rep = false;
            up[static_cast<std::size_t>(d)] = k >= 0 ? k : k + g2.points_per_axis();
        }
        if (rep) out.spec_data(0)[p] = ps.spec_data(0)[g2.flatten(up)];
    }
    return inverse_transform(out);
}

}  // namespace

TEST_SUITE("spectral_core") {

TEST_CASE("constant field transforms to a pure zero mode") {
    TorusGrid g(2, 32);
    GridField f = constant_field(g, 3.25);
    GridField fs = forward_transform(f);
    CHECK(fs.spec_data(0)[0].real() == doctest::Approx(3.25).epsilon(1e-14));
    double rest = 0.0;
    for (std::size_t p = 1; p < fs.size(); ++p) rest = std::max(rest, std::abs(fs.spec_data(0)[p]));
    CHECK(rest <= 1e-13);
}

TEST_CASE("cos(x1) has two symmetric half-amplitude modes") {
    TorusGrid g(2, 32);
    GridField f = scalar_field(g);
    f.fill([](const std::array<double, 3>& x, int) { return std::cos(x[0]); });
    GridField fs = forward_transform(f);
    std::size_t plus = g.flatten({1, 0, 0});
    std::size_t minus = g.flatten({31, 0, 0});
    CHECK(std::abs(fs.spec_data(0)[plus] - cplx(0.5, 0.0)) <= 1e-13);
    CHECK(std::abs(fs.spec_data(0)[minus] - cplx(0.5, 0.0)) <= 1e-13);
    double rest = 0.0;
    for (std::size_t p = 0; p < fs.size(); ++p)
        if (p != plus && p != minus) rest = std::max(rest, std::abs(fs.spec_data(0)[p]));
    CHECK(rest <= 1e-13);
}

TEST_CASE("round trip physical->spectral->physical is 1e-12 tight") {
    for (int dim : {2, 3}) {
        TorusGrid g(dim, dim == 2 ? 64 : 16);
        Rng rng(42);
        GridField f = random_band_limited(g, Rank::vector, g.points_per_axis() / 4, 1.0, rng);
        GridField back = inverse_transform(forward_transform(f));
        CHECK(max_abs_diff(f, back) <= 1e-12 * std::max(1.0, f.max_abs()));
    }
}

TEST_CASE("representation mismatch is rejected") {
    TorusGrid g(2, 16);
    GridField f = scalar_field(g);
    CHECK_THROWS_AS(forward_transform(forward_transform(f)), representation_error);
    CHECK_THROWS_AS(inverse_transform(f), representation_error);
}

TEST_CASE("gradient of a constant vanishes; sin -> cos exactly at nodes") {
    TorusGrid g(2, 32);
    GridField c = constant_field(g, 7.0);
    CHECK(gradient(c).max_abs() <= 1e-13);

    GridField f = scalar_field(g);
    f.fill([](const std::array<double, 3>& x, int) { return std::sin(x[0]); });
    GridField df = gradient(f);
    GridField expect = vector_field(g);
    expect.fill([](const std::array<double, 3>& x, int c) { return c == 0 ? std::cos(x[0]) : 0.0; });
    CHECK(max_abs_diff(df, expect) <= 1e-12);
}

TEST_CASE("deformation tensor of the periodic rotation analog matches the symbolic derivative") {
    // u = (-sin x2, sin x1) ~ (-x2, x1) near the origin.
    TorusGrid g(2, 32);
    GridField u = vector_field(g);
    u.fill([](const std::array<double, 3>& x, int c) {
        return c == 0 ? -std::sin(x[1]) : std::sin(x[0]);
    });
    GridField du = jacobian(u);
    GridField ju = matrix_field(g);
    ju.fill([](const std::array<double, 3>& x, int c) {
        switch (c) {
            case 1: return -std::cos(x[1]);  // d2 u1
            case 2: return std::cos(x[0]);   // d1 u2
            default: return 0.0;
        }
    });
    CHECK(max_abs_diff(du, ju) <= 1e-12);

    GridField def = deformation(u);
    GridField expect = matrix_field(g);
    expect.fill([](const std::array<double, 3>& x, int c) {
        const double off = 0.5 * (std::cos(x[0]) - std::cos(x[1]));
        return (c == 1 || c == 2) ? off : 0.0;
    });
    CHECK(max_abs_diff(def, expect) <= 1e-12);
    // div u = 0 for this field.
    CHECK(divergence(u).max_abs() <= 1e-12);
}

TEST_CASE("differentiation is linear") {
    TorusGrid g(2, 32);
    Rng rng(7);
    GridField f = random_band_limited(g, Rank::scalar, 8, 1.0, rng);
    GridField h = random_band_limited(g, Rank::scalar, 8, 1.0, rng);
    GridField lhs = gradient(2.0 * f + (-3.0) * h);
    GridField rhs = 2.0 * gradient(f) + (-3.0) * gradient(h);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
}

TEST_CASE("divergence of gradient equals laplacian") {
    TorusGrid g(2, 32);
    Rng rng(11);
    GridField f = random_band_limited(g, Rank::scalar, 8, 1.0, rng);
    CHECK(max_abs_diff(divergence(gradient(f)), laplacian(f)) <= 1e-11);
}

TEST_CASE("dealias keeps fields below the cutoff and kills Nyquist") {
    TorusGrid g(2, 32);
    Rng rng(3);
    GridField low = random_band_limited(g, Rank::scalar, 10, 0.5, rng);  // 10 <= 32/3
    CHECK(max_abs_diff(low, dealias_phys(low)) <= 1e-13);

    GridField nyq = scalar_field(g);
    nyq.fill([](const std::array<double, 3>& x, int) { return std::cos(16.0 * x[0]); });
    CHECK(dealias_phys(nyq).max_abs() <= 1e-13);
}

TEST_CASE("dealiased product of third-band fields equals the padded-transform oracle") {
    TorusGrid g(2, 32);
    Rng rng(5);
    // Band 1/3 of Nyquist: |k| <= N/6, so the grid product is alias-free.
    GridField a = random_band_limited(g, Rank::scalar, g.points_per_axis() / 6, 0.5, rng);
    GridField b = random_band_limited(g, Rank::scalar, g.points_per_axis() / 6, 0.5, rng);
    GridField prod = dealias_phys(multiply(a, b));
    GridField oracle = padded_product(a, b);
    CHECK(max_abs_diff(prod, oracle) <= 1e-12);
}

TEST_CASE("dealias is an orthogonal projection") {
    TorusGrid g(2, 32);
    Rng rng(9);
    GridField f = random_band_limited(g, Rank::scalar, 15, 0.3, rng);
    GridField h = random_band_limited(g, Rank::scalar, 15, 0.3, rng);
    GridField df = dealias_phys(f);
    CHECK(max_abs_diff(df, dealias_phys(df)) <= 1e-13);  // idempotent
    // self-adjoint under the discrete inner product
    double lhs = integral(multiply(df, h));
    double rhs = integral(multiply(f, dealias_phys(h)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("off-grid evaluation reproduces grid values and closed forms") {
    TorusGrid g(2, 32);
    GridField f = scalar_field(g);
    f.fill([](const std::array<double, 3>& x, int) { return std::sin(x[0]); });
    std::vector<std::array<double, 3>> pts;
    pts.push_back(g.coord({5, 9, 0}));
    pts.push_back({0.3217, 4.77, 0.0});
    pts.push_back({-1.0, 9.5, 0.0});  // wraps
    auto vals = evaluate_offgrid(f, pts, 0);
    CHECK(vals[0] == doctest::Approx(f.real_data(0)[g.flatten({5, 9, 0})]).epsilon(1e-12));
    CHECK(vals[1] == doctest::Approx(std::sin(0.3217)).epsilon(1e-12));
    CHECK(vals[2] == doctest::Approx(std::sin(-1.0)).epsilon(1e-12));
}

TEST_CASE("off-grid evaluation matches direct mode summation") {
    for (int dim : {2, 3}) {
        TorusGrid g(dim, 16);
        Rng rng(21);
        GridField f = random_band_limited(g, Rank::scalar, 5, 0.5, rng);
        std::vector<std::array<double, 3>> pts;
        for (int i = 0; i < 6; ++i)
            pts.push_back({rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi)});
        auto vals = evaluate_offgrid(f, pts, 0);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(vals[i] == doctest::Approx(naive_mode_sum(f, 0, pts[i])).epsilon(1e-11));
    }
}

TEST_CASE("lp_norm quadrature") {
    TorusGrid g(2, 32);
    CHECK(lp_norm(scalar_field(g), 2.0) == 0.0);

    GridField c = constant_field(g, -2.0);
    // |c| V^{1/p}
    CHECK(lp_norm(c, 3.0) == doctest::Approx(2.0 * std::pow(g.volume(), 1.0 / 3.0)).epsilon(1e-13));
    CHECK(lp_norm(c, std::numeric_limits<double>::infinity()) == doctest::Approx(2.0));

    GridField f = scalar_field(g);
    f.fill([](const std::array<double, 3>& x, int) { return std::sin(x[0]); });
    // closed form: ||sin x1||_L2 on (2pi)^2 = sqrt(2 pi^2)
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(2.0 * kPi * kPi)).epsilon(1e-13));
    CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);
}

TEST_CASE("Parseval: L2 norm squared equals weighted spectral sum") {
    TorusGrid g(2, 32);
    Rng rng(13);
    GridField f = random_band_limited(g, Rank::scalar, 10, 0.4, rng);
    GridField fs = forward_transform(f);
    double sum = 0.0;
    for (std::size_t p = 0; p < fs.size(); ++p) sum += std::norm(fs.spec_data(0)[p]);
    const double l2 = lp_norm(f, 2.0);
    CHECK(l2 * l2 == doctest::Approx(g.volume() * sum).epsilon(1e-12));
}

TEST_CASE("snapshot round trip, physical and spectral") {
    TorusGrid g(2, 16);
    Rng rng(17);
    GridField f = random_band_limited(g, Rank::vector, 5, 0.5, rng);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot(ss, f);
    GridField back = read_snapshot(ss);
    CHECK(back.rank() == f.rank());
    CHECK(max_abs_diff(f, back) == 0.0);

    GridField fs = forward_transform(f);
    std::stringstream s2(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot(s2, fs);
    GridField back2 = read_snapshot(s2);
    CHECK(back2.repr() == Repr::spectral);
    CHECK(max_abs_diff(fs, back2) == 0.0);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TorusGrid(4, 32), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(2, 24), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(2, 8), std::invalid_argument);
}

}  // TEST_SUITE
