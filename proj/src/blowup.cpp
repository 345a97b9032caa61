#include "schouten/blowup.hpp"

#include "schouten/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace schouten {

namespace {

double min_spacing(const GridChart& c) { return *std::min_element(c.spacing.begin(), c.spacing.end()); }

}  // namespace

std::vector<double> rescale(std::span<const double> u) {
    if (u.empty()) return {};
    const double m = *std::max_element(u.begin(), u.end());
    std::vector<double> w(u.begin(), u.end());
    for (double& v : w) v -= m;
    return w;
}

double injectivity_radius(const GridChart& c) {
    switch (c.backend) {
        case Backend::torus:
        case Backend::slab: {
            double r = std::numeric_limits<double>::infinity();
            for (int a = 0; a < c.axes(); ++a) r = std::min(r, a == c.boundary_axis ? c.length(a) : 0.5 * c.length(a));
            return r;
        }
        case Backend::warped: return c.r_max - c.r_min;
    }
    return 0.0;
}

BlowupReport locate_blowup(std::span<const double> u, const GridChart& c, std::size_t start) {
    if (u.size() != c.node_count()) throw ArgumentError("field size does not match the chart");
    if (start >= u.size()) throw ArgumentError("start node out of range");
    BlowupReport rep;
    const double inj = injectivity_radius(c);
    std::size_t x = start;
    rep.descent_chain.push_back({x, u[x]});
    for (;;) {
        const double radius = std::exp(0.5 * u[x]);
        std::size_t best = x;
        for (std::size_t y = 0; y < u.size(); ++y) {
            if (u[y] < u[x] - 1.0 && u[y] < u[best] && chart_distance(c, x, y) <= radius) best = y;
        }
        if (best == x) {
            rep.certified_radius = radius;
            rep.truncated = radius > inj;
            break;
        }
        x = best;
        rep.descent_chain.push_back({x, u[x]});
    }
    rep.point = x;
    rep.min_u = *std::min_element(u.begin(), u.end());
    const auto idx = c.multi_index(x);
    for (int a = 0; a < c.axes(); ++a) rep.coordinates.push_back(c.coordinate(a, idx[a]));
    rep.v_max = std::exp(-0.5 * (c.n - 2) * u[x]);
    rep.certificate_holds = true;
    for (std::size_t y = 0; y < u.size(); ++y) {
        if (chart_distance(c, x, y) <= rep.certified_radius && u[y] < u[x] - 1.0) rep.certificate_holds = false;
    }
    return rep;
}

std::vector<RadialSample> minimal_radial(std::span<const double> w, const GridChart& c, std::size_t center,
                                         double R) {
    if (w.size() != c.node_count()) throw ArgumentError("field size does not match the chart");
    if (center >= w.size()) throw ArgumentError("center node out of range");
    const double inj = injectivity_radius(c);
    if (!(R > 0.0) || R > inj) {
        std::ostringstream os;
        os << "profile radius " << R << " outside (0, " << inj << "]";
        throw ArgumentError(os.str());
    }
    const double h = min_spacing(c);
    const int bins = static_cast<int>(std::floor(R / h + 1e-9)) + 1;
    std::vector<RadialSample> out;

    if (c.backend == Backend::warped) {
        const double rc = c.coordinate(0, static_cast<int>(center));
        for (int k = 0; k < bins; ++k) {
            const double d = k * h;
            const double lo = std::abs(rc - d) - 1e-9 * h, hi = rc + d + 1e-9 * h;
            double sup = -std::numeric_limits<double>::infinity();
            for (std::size_t y = 0; y < w.size(); ++y) {
                const double r = c.coordinate(0, static_cast<int>(y));
                if (r >= lo && r <= hi) sup = std::max(sup, w[y]);
            }
            if (sup > -std::numeric_limits<double>::infinity()) out.push_back({d, sup});
        }
        return out;
    }

    std::vector<double> sup(bins, -std::numeric_limits<double>::infinity()), at(bins, 0.0);
    std::vector<bool> seen(bins, false);
    for (std::size_t y = 0; y < w.size(); ++y) {
        const double d = chart_distance(c, center, y);
        if (d > R + 1e-12 * h) continue;
        const int k = static_cast<int>(std::floor(d / h + 0.5));
        if (k >= bins) continue;
        if (!seen[k] || w[y] > sup[k]) {
            sup[k] = w[y];
            at[k] = d;
            seen[k] = true;
        }
    }
    for (int k = 0; k < bins; ++k)
        if (seen[k]) out.push_back({at[k], sup[k]});
    return out;
}

ProfileFit profile_fit(std::span<const RadialSample> profile, double r_lo, double r_hi) {
    if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw ArgumentError("degenerate fit window");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (const auto& s : profile) {
        if (s.r < r_lo || s.r > r_hi || !std::isfinite(s.w_hat)) continue;
        const double x = std::log(s.r);
        sx += x;
        sy += s.w_hat;
        sxx += x * x;
        sxy += x * s.w_hat;
        ++m;
    }
    if (m < 5) throw ArgumentError("fit window holds " + std::to_string(m) + " samples, need at least 5");
    const double mean_x = sx / m, mean_y = sy / m;
    const double vxx = sxx / m - mean_x * mean_x;
    if (!(vxx > 1e-14 * (1.0 + mean_x * mean_x))) throw ArgumentError("fit window spans no range of log r");
    ProfileFit fit;
    fit.slope = (sxy / m - mean_x * mean_y) / vxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.samples = m;
    double ss = 0.0;
    for (const auto& s : profile) {
        if (s.r < r_lo || s.r > r_hi || !std::isfinite(s.w_hat)) continue;
        const double e = s.w_hat - fit.slope * std::log(s.r) - fit.intercept;
        ss += e * e;
    }
    fit.rms = std::sqrt(ss / m);
    return fit;
}

BlowupReport analyze_blowup(std::span<const double> u, const GridChart& c, double threshold, double R) {
    if (u.empty()) throw ArgumentError("empty field");
    const std::size_t start = static_cast<std::size_t>(std::min_element(u.begin(), u.end()) - u.begin());
    BlowupReport rep = locate_blowup(u, c, start);
    rep.blowup = rep.min_u < threshold;
    if (R <= 0.0) R = 0.9 * injectivity_radius(c);
    const double h = min_spacing(c);
    const auto w = rescale(u);
    rep.profile = minimal_radial(w, c, rep.point, R);
    rep.fit_lo = 4.0 * h;
    rep.fit_hi = 0.5 * R;
    try {
        rep.fit = profile_fit(rep.profile, rep.fit_lo, rep.fit_hi);
    } catch (const ArgumentError&) {
        rep.fit = ProfileFit{};  // too few samples on a coarse chart; left at zero
    }
    return rep;
}

}  // namespace schouten
