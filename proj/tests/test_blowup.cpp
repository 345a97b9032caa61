#include "schouten/blowup.hpp"
#include "schouten/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace schouten;
constexpr double pi = std::numbers::pi;

TEST_CASE("rescale") {
    const std::vector<double> c(10, 5.0);
    for (double v : rescale(c)) CHECK(v == 0.0);
    const std::vector<double> u{1.0, -3.0, 2.5};
    const auto w = rescale(u);
    CHECK(*std::max_element(w.begin(), w.end()) == 0.0);
    CHECK(rescale(w) == w);
}

TEST_CASE("descent stops at once on a flat field") {
    const auto c = GridChart::torus(3, 8);
    const std::vector<double> u(c.node_count(), -2.0);
    const auto r = locate_blowup(u, c, 17);
    CHECK(r.descent_chain.size() == 1);
    CHECK(r.point == 17);
    CHECK(r.certificate_holds);
    CHECK(r.v_max == doctest::Approx(std::exp(1.0)));
    CHECK_THROWS_AS(locate_blowup(u, c, 100000), ArgumentError);
}

TEST_CASE("descent hops from a shallow well into a deeper one") {
    // two Gaussian wells on a 32^3 torus; the shallow well at 0.3 has depth
    // -1.2, the deep one at 0.5 depth -3.2, 0.2 apart. From the shallow well
    // the search radius is e^{-0.6} ~ 0.55, so the deep well is in range.
    const auto c = GridChart::torus(3, 32);
    std::vector<double> u(c.node_count());
    auto well = [](double x, double y, double z, double cx, double depth) {
        const double r2 = (x - cx) * (x - cx) + (y - 0.5) * (y - 0.5) + (z - 0.5) * (z - 0.5);
        return depth * std::exp(-r2 / 0.002);
    };
    std::size_t shallow = 0;
    for (std::size_t node = 0; node < u.size(); ++node) {
        const auto i = c.multi_index(node);
        const double x = c.coordinate(0, i[0]), y = c.coordinate(1, i[1]), z = c.coordinate(2, i[2]);
        u[node] = well(x, y, z, 0.3125, -1.2) + well(x, y, z, 0.5, -3.2);
        if (i[0] == 10 && i[1] == 16 && i[2] == 16) shallow = node;
    }
    const auto r = locate_blowup(u, c, shallow);
    REQUIRE(r.descent_chain.size() >= 2);
    for (std::size_t k = 1; k < r.descent_chain.size(); ++k)
        CHECK(r.descent_chain[k].u < r.descent_chain[k - 1].u - 1.0);
    CHECK(r.coordinates[0] == doctest::Approx(0.5));
    CHECK(r.certificate_holds);
}

TEST_CASE("minimal radial function") {
    const auto c = GridChart::torus(3, 32);
    const std::size_t center = c.linear_index(std::vector<int>{16, 16, 16});
    std::vector<double> w(c.node_count(), 1.5);
    for (const auto& s : minimal_radial(w, c, center, 0.4)) CHECK(s.w_hat == 1.5);

    // exact log profile: each sample sits at the distance of its sup node
    for (std::size_t node = 0; node < w.size(); ++node) {
        const double d = chart_distance(c, center, node);
        w[node] = d > 0 ? 2.0 * std::log(d) : -50.0;
    }
    const auto prof = minimal_radial(w, c, center, 0.45);
    for (const auto& s : prof)
        if (s.r > 0) CHECK(s.w_hat == doctest::Approx(2.0 * std::log(s.r)).epsilon(1e-14));
    const auto fit = profile_fit(prof, 4.0 / 32, 0.45);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rms < 1e-12);

    // adding a constant shifts the profile by the same constant
    for (double& v : w) v += 3.0;
    const auto shifted = minimal_radial(w, c, center, 0.45);
    REQUIRE(shifted.size() == prof.size());
    for (std::size_t k = 0; k < prof.size(); ++k) CHECK(shifted[k].w_hat == doctest::Approx(prof[k].w_hat + 3.0));

    CHECK_THROWS_AS(minimal_radial(w, c, center, 0.6), ArgumentError);
}

TEST_CASE("minimal radial function on warped charts") {
    const auto c = GridChart::warped(3, 129, 0.0, pi / 2);
    std::vector<double> w(c.node_count());
    for (int i = 0; i < 129; ++i) w[i] = i == 0 ? -40.0 : 2.0 * std::log(c.coordinate(0, i));
    const auto prof = minimal_radial(w, c, 0, 1.4);
    for (std::size_t k = 1; k < prof.size(); ++k) CHECK(prof[k].w_hat == doctest::Approx(2.0 * std::log(prof[k].r)));
    // centre away from the pole: the sup over the sphere reaches the outer radius
    const auto off = minimal_radial(w, c, 64, 0.3);
    for (const auto& s : off) CHECK(s.w_hat == doctest::Approx(w[std::min(128, 64 + static_cast<int>(std::lround(s.r / c.spacing[0])))]));
}

TEST_CASE("profile fits") {
    std::vector<RadialSample> p;
    for (int k = 1; k <= 40; ++k) {
        const double r = 0.01 * k;
        p.push_back({r, 2.0 * std::log(r) + 0.1 * std::sin(std::log(r))});
    }
    CHECK(std::abs(profile_fit(p, 0.02, 0.4).slope - 2.0) < 0.15);
    for (auto& s : p) s.w_hat = 4.0;
    CHECK(std::abs(profile_fit(p, 0.02, 0.4).slope) < 1e-12);
    CHECK_THROWS_AS(profile_fit(p, 0.2, 0.23), ArgumentError);
    CHECK_THROWS_AS(profile_fit(p, 0.3, 0.1), ArgumentError);
}

TEST_CASE("full analysis of a synthetic blow-up field") {
    const auto c = GridChart::warped(3, 257, 0.0, pi / 2);
    std::vector<double> u(c.node_count());
    const double eps = 1e-5;
    for (int i = 0; i < 257; ++i) {
        const double r = c.coordinate(0, i);
        u[i] = std::log(eps * eps + r * r);  // ~ 2 log r away from the core
    }
    const auto rep = analyze_blowup(u, c);
    CHECK(rep.blowup);
    CHECK(rep.point == 0);
    CHECK(rep.fit.slope == doctest::Approx(2.0).epsilon(0.02));
    CHECK(rep.fit_lo == doctest::Approx(4 * c.spacing[0]));
}
