#include "oracles.hpp"
#include "schouten/conformal.hpp"
#include "schouten/continuation.hpp"
#include "schouten/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace schouten;
constexpr double pi = std::numbers::pi;

namespace {

MetricRecipe perturbed(MetricRecipe::Kind base, double a) {
    MetricRecipe r;
    r.kind = MetricRecipe::Kind::perturbed;
    r.base = base;
    r.amplitude = a;
    r.mode = 1;
    return r;
}

Problem problem_on(const MetricField& m, const SymFuncSpec& F) {
    return make_problem(m, F, std::vector<double>(m.chart.node_count(), 1.0));
}

double max_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

// Central-difference directional derivative of the residual, compared with J v.
double jacobian_mismatch(const Problem& p, const std::vector<double>& u, double t, std::uint64_t seed) {
    const LinearOperator J = linearize(u, t, p);
    const auto v = smooth_random_field(p.metric.chart, 1.0, 3, seed);
    const double eps = 1e-6;
    std::vector<double> up(u), um(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += eps * v[i];
        um[i] -= eps * v[i];
    }
    const auto rp = residual(up, t, p), rm = residual(um, t, p);
    const Eigen::VectorXd Jv = J.apply(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double fd = (rp[i] - rm[i]) / (2.0 * eps);
        num = std::max(num, std::abs(fd - Jv[i]));
        den = std::max(den, std::abs(fd));
    }
    return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("stencils merge duplicate indices") {
    Stencil s;
    s.add(3, 1.0);
    s.add(5, 2.0);
    s.add(3, 0.5);
    CHECK(s.terms.size() == 2);
    Stencil t;
    t.add(5, -2.0);
    s += t;
    const std::vector<double> u{0, 0, 0, 2.0, 0, 7.0};
    CHECK(s.apply(u) == doctest::Approx(3.0));
    CHECK(s.scaled(2.0).apply(u) == doctest::Approx(6.0));
}

TEST_CASE("warped Laplacian of cos r is -n cos r on the sphere") {
    const int n = 3;
    auto err = [&](int N) {
        const auto m = build_metric(GridChart::warped(n, N, 0.0, pi), MetricRecipe::parse("sphere"));
        const Discretization d(m, curvature(m));
        std::vector<double> u(N);
        for (int i = 0; i < N; ++i) u[i] = std::cos(m.chart.coordinate(0, i));
        double e = 0.0;
        for (int i = 0; i < N; ++i) {
            double lap = 0.0;
            for (int a = 0; a < n; ++a) lap += d.hessian(i, a, a).apply(u);
            e = std::max(e, std::abs(lap + n * u[i]));
        }
        return e;
    };
    const double e1 = err(33), e2 = err(65);
    CHECK(e1 < 0.05);
    CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("grid Hessian of a smooth field on the flat torus") {
    const auto m = build_metric(GridChart::torus(3, 16), MetricRecipe::parse("flat"));
    const Discretization d(m, curvature(m));
    std::vector<double> u(m.chart.node_count());
    for (std::size_t node = 0; node < u.size(); ++node) {
        const auto idx = m.chart.multi_index(node);
        u[node] = std::sin(2 * pi * m.chart.coordinate(0, idx[0])) * std::cos(2 * pi * m.chart.coordinate(1, idx[1]));
    }
    const std::size_t node = 5 * 256 + 3 * 16 + 7;
    const auto idx = m.chart.multi_index(node);
    const double x = m.chart.coordinate(0, idx[0]), y = m.chart.coordinate(1, idx[1]);
    const double k2 = 4 * pi * pi;
    CHECK(d.hessian(node, 0, 0).apply(u) == doctest::Approx(-k2 * std::sin(2 * pi * x) * std::cos(2 * pi * y)).epsilon(0.05));
    CHECK(d.hessian(node, 0, 1).apply(u) == doctest::Approx(-k2 * std::cos(2 * pi * x) * std::sin(2 * pi * y)).epsilon(0.05));
    CHECK(d.hessian(node, 2, 2).apply(u) == 0.0);
    CHECK(d.volume() == doctest::Approx(1.0));
}

TEST_CASE("quadrature volumes") {
    const auto s = build_metric(GridChart::warped(3, 257, 0.0, pi), MetricRecipe::parse("sphere"));
    CHECK(Discretization(s, curvature(s)).volume() == doctest::Approx(2 * pi * pi).epsilon(1e-4));
    const auto slab = build_metric(GridChart::slab(3, 9, 2.0), MetricRecipe::parse("flat"));
    CHECK(Discretization(slab, curvature(slab)).volume() == doctest::Approx(8.0));
}

TEST_CASE("u = 0 solves the t = 0 equation") {
    const auto m = build_metric(GridChart::torus(3, 8), MetricRecipe::parse("flat"));
    const Problem p = problem_on(m, SymFuncSpec::ricci_det(3));
    const std::vector<double> zero(p.size(), 0.0);
    CHECK(max_abs(residual(zero, 0.0, p)) <= 1e-12);
    const auto h = build_metric(GridChart::warped(4, 65, 0.0, pi / 2), MetricRecipe::parse("hemisphere"));
    const Problem q = problem_on(h, SymFuncSpec::sigma_k_root(4, 2));
    CHECK(max_abs(residual(std::vector<double>(q.size(), 0.0), 0.0, q)) <= 1e-12);
    CHECK(p.varsigma == doctest::Approx(1.0 / (3 * 4.0 / 3.0)));
}

TEST_CASE("make_problem validates its input") {
    const auto m = build_metric(GridChart::torus(3, 8), MetricRecipe::parse("flat"));
    std::vector<double> f(m.chart.node_count(), 1.0);
    f[7] = 0.0;
    CHECK_THROWS_AS(make_problem(m, SymFuncSpec::ricci_det(3), f), ArgumentError);
    CHECK_THROWS_AS(make_problem(m, SymFuncSpec::ricci_det(4), std::vector<double>(512, 1.0)), ArgumentError);
    CHECK_THROWS_AS(make_problem(m, SymFuncSpec::ricci_det(3), std::vector<double>(10, 1.0)), ArgumentError);
}

TEST_CASE("residual reports inadmissible states") {
    const auto m = build_metric(GridChart::torus(3, 8), MetricRecipe::parse("flat"));
    const Problem p = problem_on(m, SymFuncSpec::ricci_det(3));
    // at t = 1 on a flat torus A = 0, so u = 0 sits on the cone boundary
    const std::vector<double> zero(p.size(), 0.0);
    CHECK_THROWS_AS(residual(zero, 1.0, p), InadmissibleError);
    try {
        residual(zero, 1.0, p);
    } catch (const InadmissibleError& e) {
        CHECK_FALSE(e.report().all_admissible);
    }
    CHECK_THROWS_AS(residual(zero, 1.5, p), ArgumentError);
}

TEST_CASE("f_coefficients is the derivative of F(lambda(g^-1 B))") {
    const auto F = SymFuncSpec::ricci_det(3);
    Eigen::MatrixXd g(3, 3), B(3, 3);
    g << 1.3, 0.2, 0.0, 0.2, 0.9, 0.1, 0.0, 0.1, 1.1;
    B << 1.0, 0.1, 0.05, 0.1, 0.8, -0.1, 0.05, -0.1, 1.2;
    const Eigen::MatrixXd C = f_coefficients(F, g, B);
    auto value = [&](const Eigen::MatrixXd& M) { return f_eval(F, oracle::eigen_via_product(g, M)); };
    const double eps = 1e-6;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
            E(i, j) += 0.5;
            E(j, i) += 0.5;
            const double fd = (value(B + eps * E) - value(B - eps * E)) / (2 * eps);
            CHECK(fd == doctest::Approx((C.cwiseProduct(E)).sum()).epsilon(1e-7));
        }
    // repeated eigenvalues: still a plain derivative
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd Ci = f_coefficients(F, I, I);
    CHECK((Ci - Ci(0, 0) * I).norm() < 1e-12);
}

TEST_CASE("Jacobian matches finite differences of the residual") {
    // a perturbed flat metric leaves the cone once psi A dominates, so stay early on the path
    const auto m = build_metric(GridChart::torus(3, 8), perturbed(MetricRecipe::Kind::flat, 0.01));
    const Problem p = problem_on(m, SymFuncSpec::ricci_det(3));
    const auto u = smooth_random_field(m.chart, 1e-3, 3, 4);
    CHECK(jacobian_mismatch(p, u, 0.1, 1) < 1e-6);
    CHECK(jacobian_mismatch(p, u, 0.05, 2) < 1e-6);

    const auto h = build_metric(GridChart::warped(3, 33, 0.0, pi / 2), perturbed(MetricRecipe::Kind::hemisphere_warped, 0.05));
    const Problem q = problem_on(h, SymFuncSpec::sigma_k_root(3, 2));
    const auto w = smooth_random_field(h.chart, 1e-3, 3, 9);
    CHECK(jacobian_mismatch(q, w, 0.7, 3) < 1e-6);
    CHECK(jacobian_mismatch(q, w, 1.0, 4) < 1e-6);
}

TEST_CASE("bordered solve inverts the Jacobian") {
    const auto h = build_metric(GridChart::warped(3, 33, 0.0, pi / 2), MetricRecipe::parse("hemisphere"));
    const Problem q = problem_on(h, SymFuncSpec::ricci_det(3));
    const auto u = smooth_random_field(h.chart, 0.05, 3, 2);
    const LinearOperator J = linearize(u, 0.4, q);
    Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(q.size(), -1.0, 1.0);
    const Eigen::VectorXd x = J.solve(rhs);
    CHECK((J.apply(x) - rhs).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((J.dense() * x - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("shift covariance at t = 1") {
    const auto h = build_metric(GridChart::warped(3, 33, 0.0, pi / 2), perturbed(MetricRecipe::Kind::hemisphere_warped, 0.05));
    const auto F = SymFuncSpec::ricci_det(3);
    const Problem p = problem_on(h, F);
    const auto u = smooth_random_field(h.chart, 0.1, 3, 5);
    std::vector<double> f2(p.size()), u2(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        f2[i] = p.f[i] * std::exp(0.6);
        u2[i] += 0.3;
    }
    const Problem p2 = make_problem(h, F, f2);
    const auto r1 = residual(u, 1.0, p), r2 = residual(u2, 1.0, p2);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(r1[i] - r2[i]) < 1e-12);
}

TEST_CASE("assemble_w and admissibility") {
    const auto h = build_metric(GridChart::warped(3, 33, 0.0, pi / 2), MetricRecipe::parse("hemisphere"));
    const Problem p = problem_on(h, SymFuncSpec::ricci_det(3));
    const std::vector<double> zero(p.size(), 0.0);
    const auto st = assemble_w(zero, p);
    for (const auto& W : st.W) CHECK((eigen_pointwise(Eigen::MatrixXd::Identity(3, 3), W).array() - 0.5).abs().maxCoeff() < 1e-12);
    const auto rep = admissibility(zero, p, p.F.cone());
    CHECK(rep.all_admissible);
    CHECK(rep.ricci_inequality);
    CHECK(rep.worst_margin == doctest::Approx(0.5 + 1.5));

    std::vector<double> bad(p.size());
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = h.chart.coordinate(0, static_cast<int>(i));
    CHECK_THROWS_AS(assemble_w(bad, p), PreconditionError);
}
