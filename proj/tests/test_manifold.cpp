#include "oracles.hpp"
#include "schouten/errors.hpp"
#include "schouten/manifold.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace schouten;
constexpr double pi = std::numbers::pi;

namespace {

MetricRecipe perturbed(MetricRecipe::Kind base, double a, int mode = 1) {
    MetricRecipe r;
    r.kind = MetricRecipe::Kind::perturbed;
    r.base = base;
    r.amplitude = a;
    r.mode = mode;
    return r;
}

}  // namespace

TEST_CASE("chart indexing round trips") {
    const auto c = GridChart::torus(3, 8, 2.0);
    CHECK(c.node_count() == 512);
    CHECK(c.spacing[0] == doctest::Approx(0.25));
    for (std::size_t node : {0ul, 7ul, 100ul, 511ul}) CHECK(c.linear_index(c.multi_index(node)) == node);
    bool flipped = false;
    CHECK(c.resolve(0, -1, flipped) == 7);
    CHECK(c.resolve(0, 8, flipped) == 0);
    CHECK_FALSE(flipped);

    const auto s = GridChart::slab(3, 9, 1.0);
    CHECK(s.periodic(0));
    CHECK_FALSE(s.periodic(2));
    CHECK(s.coordinate(2, 8) == doctest::Approx(1.0));
    flipped = false;
    CHECK(s.resolve(2, -1, flipped) == 1);
    CHECK(flipped);
    flipped = false;
    CHECK(s.resolve(2, 9, flipped) == 7);
    CHECK(flipped);

    CHECK_THROWS_AS(GridChart::torus(2, 8), ArgumentError);
    CHECK_THROWS_AS(GridChart::torus(3, 4), ArgumentError);
    CHECK_THROWS_AS(GridChart::warped(3, 16, 1.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(backend_from_string("sphere"), ArgumentError);
}

TEST_CASE("recipes parse and validate") {
    CHECK(MetricRecipe::parse("flat").kind == MetricRecipe::Kind::flat);
    CHECK(MetricRecipe::parse("hemisphere").kind == MetricRecipe::Kind::hemisphere_warped);
    CHECK_THROWS_AS(MetricRecipe::parse("cigar"), ArgumentError);
    CHECK_THROWS_AS(build_metric(GridChart::warped(3, 16, 0.0, 1.0), MetricRecipe::parse("hemisphere_warped")),
                    ArgumentError);
    CHECK_THROWS_AS(build_metric(GridChart::torus(3, 8), MetricRecipe::parse("round_sphere_warped")), ArgumentError);
    CHECK_THROWS_AS(build_metric(GridChart::torus(3, 8), perturbed(MetricRecipe::Kind::flat, 2.0)),
                    DegenerateMetricError);
}

TEST_CASE("flat recipes have vanishing Schouten tensor") {
    for (const auto& c : {GridChart::torus(3, 8), GridChart::slab(4, 8)}) {
        const auto cb = curvature(build_metric(c, MetricRecipe::parse("flat")));
        double worst = 0.0;
        for (const auto& A : cb.schouten) worst = std::max(worst, A.cwiseAbs().maxCoeff());
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("round sphere and hemisphere have Schouten eigenvalues 1/2") {
    for (int n : {3, 4, 5}) {
        const auto m = build_metric(GridChart::warped(n, 33, 0.0, pi), MetricRecipe::parse("round_sphere_warped"));
        const auto cb = curvature(m);
        for (std::size_t i = 0; i < cb.schouten.size(); ++i) {
            const Eigen::VectorXd lam = generalized_eigenvalues(m.metric_at(i), cb.schouten[i]);
            CHECK((lam.array() - 0.5).abs().maxCoeff() < 1e-12);
        }
    }
    const auto h = build_metric(GridChart::warped(3, 17, 0.0, pi / 2), MetricRecipe::parse("hemisphere"));
    CHECK(boundary_second_fundamental_form(h) < 1e-12);
    CHECK(h.is_pole(0));
    CHECK_FALSE(h.is_pole(16));
}

TEST_CASE("warped curvature matches an independent Ricci formula") {
    // Ric_rr = -(n-1) phi''/phi, Ric_tt = -phi''/phi + (n-2)(1-phi'^2)/phi^2
    const int n = 4;
    const auto m = build_metric(GridChart::warped(n, 41, 0.0, pi / 2), perturbed(MetricRecipe::Kind::hemisphere_warped, 0.05));
    const auto cb = curvature(m);
    const auto& p = m.profile;
    for (int i = 5; i < 35; i += 6) {
        const double a = -p.ddphi[i] / p.phi[i];
        const double b = (1 - p.dphi[i] * p.dphi[i]) / (p.phi[i] * p.phi[i]);
        CHECK(cb.ricci[i](0, 0) == doctest::Approx((n - 1) * a));
        CHECK(cb.ricci[i](1, 1) == doctest::Approx(a + (n - 2) * b));
        const double R = (n - 1) * a + (n - 1) * (a + (n - 2) * b);
        CHECK(cb.scalar[i] == doctest::Approx(R));
    }
}

TEST_CASE("grid curvature agrees with the Riemann oracle") {
    const auto m = build_metric(GridChart::torus(3, 16), perturbed(MetricRecipe::Kind::flat, 0.1));
    const auto cb = curvature(m);
    double worst = 0.0, scale = 0.0;
    for (std::size_t node = 0; node < m.chart.node_count(); node += 37) {
        const auto oc = fd_curvature_oracle(m, node);
        worst = std::max(worst, (cb.ricci[node] - oc.ricci).cwiseAbs().maxCoeff());
        scale = std::max(scale, oc.ricci.cwiseAbs().maxCoeff());
    }
    CHECK(scale > 0.1);
    CHECK(worst < 0.1 * scale);
}

TEST_CASE("grid curvature converges to the oracle at second order") {
    auto err = [](int N) {
        const auto m = build_metric(GridChart::torus(3, N), perturbed(MetricRecipe::Kind::flat, 0.05));
        const auto cb = curvature(m);
        double e = 0.0;
        // the same physical point (0.25, 0.25, 0.25) on both grids
        const std::vector<int> idx(3, N / 4);
        const std::size_t node = m.chart.linear_index(idx);
        const auto oc = fd_curvature_oracle(m, node);
        e = (cb.ricci[node] - oc.ricci).cwiseAbs().maxCoeff();
        return e;
    };
    const double e1 = err(16), e2 = err(32);
    CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("slab Fermi metric keeps a totally geodesic boundary") {
    // the one-sided normal derivative of an even profile is O(h^3)
    const auto m = build_metric(GridChart::slab(3, 17), perturbed(MetricRecipe::Kind::flat, 0.1));
    const auto fine = build_metric(GridChart::slab(3, 33), perturbed(MetricRecipe::Kind::flat, 0.1));
    const double t1 = boundary_second_fundamental_form(m), t2 = boundary_second_fundamental_form(fine);
    CHECK(t1 < 1e-3);
    CHECK(t1 / t2 > 6.0);
    CHECK_THROWS_AS(fd_curvature_oracle(m, 0), ArgumentError);
}

TEST_CASE("generalized eigenvalues match the product route") {
    Eigen::MatrixXd g(3, 3), W(3, 3);
    g << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.1;
    W << 1.0, 0.5, 0.0, 0.5, -0.3, 0.2, 0.0, 0.2, 0.7;
    CHECK((generalized_eigenvalues(g, W) - oracle::eigen_via_product(g, W)).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(generalized_eigenvalues(bad, W), DegenerateMetricError);
}

TEST_CASE("doubling a Neumann field") {
    const auto c = GridChart::slab(3, 33, 1.0);
    std::vector<double> u(c.node_count());
    for (std::size_t node = 0; node < u.size(); ++node) {
        const auto idx = c.multi_index(node);
        u[node] = std::cos(pi * c.coordinate(2, idx[2])) + 0.1 * std::sin(2 * pi * c.coordinate(0, idx[0]));
    }
    const auto d = double_field(c, u);
    CHECK(d.chart.backend == Backend::torus);
    CHECK(d.chart.shape[2] == 64);
    CHECK(d.chart.length(2) == doctest::Approx(2.0));
    for (std::size_t node = 0; node < d.values.size(); ++node) {
        auto idx = d.chart.multi_index(node);
        if (idx[2] < 33) CHECK(d.values[node] == u[c.linear_index(idx)]);
        else {
            idx[2] = 64 - idx[2];
            CHECK(d.values[node] == u[c.linear_index(idx)]);
        }
    }
    std::vector<double> odd(u.size());
    for (std::size_t node = 0; node < u.size(); ++node) odd[node] = c.coordinate(2, c.multi_index(node)[2]);
    CHECK(neumann_violation(c, odd) == doctest::Approx(1.0));
    CHECK_THROWS_AS(double_field(c, odd), PreconditionError);
    CHECK_THROWS_AS(double_field(GridChart::torus(3, 8), std::vector<double>(512, 0.0)), ArgumentError);
}

TEST_CASE("doubling the hemisphere gives the round sphere") {
    const auto h = build_metric(GridChart::warped(3, 17, 0.0, pi / 2), MetricRecipe::parse("hemisphere"));
    const auto d = double_metric(h);
    const auto s = build_metric(GridChart::warped(3, 33, 0.0, pi), MetricRecipe::parse("sphere"));
    REQUIRE(d.chart.shape[0] == 33);
    CHECK(d.chart.r_max == doctest::Approx(pi));
    for (int i = 0; i < 33; ++i) {
        CHECK(d.profile.phi[i] == doctest::Approx(s.profile.phi[i]).epsilon(1e-12).scale(1.0));
        CHECK(d.profile.dphi[i] == doctest::Approx(s.profile.dphi[i]).epsilon(1e-12).scale(1.0));
    }
    CHECK(d.is_pole(32));
}

TEST_CASE("chart distances") {
    const auto t = GridChart::torus(3, 8, 1.0);
    const std::vector<int> a{0, 0, 0}, b{7, 0, 0}, c{4, 4, 4};
    CHECK(chart_distance(t, t.linear_index(a), t.linear_index(b)) == doctest::Approx(0.125));
    CHECK(chart_distance(t, t.linear_index(a), t.linear_index(c)) == doctest::Approx(std::sqrt(3 * 0.25)));
    const auto s = GridChart::slab(3, 9, 1.0);
    const std::vector<int> p{0, 0, 1}, q{0, 0, 2};
    CHECK(chart_distance(s, s.linear_index(p), s.linear_index(q)) == doctest::Approx(0.125));
    CHECK(sphere_area(2) == doctest::Approx(4 * pi));
    CHECK(sphere_area(1) == doctest::Approx(2 * pi));
}
