#pragma once

#include "schouten/manifold.hpp"

#include <span>
#include <vector>

namespace schouten {

struct DescentStep {
    std::size_t node = 0;
    double u = 0.0;
};

struct RadialSample {
    double r = 0.0;
    double w_hat = 0.0;
};

struct ProfileFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

struct BlowupReport {
    bool blowup = false;  // min u below the analysis threshold
    double min_u = 0.0;
    std::size_t point = 0;
    std::vector<double> coordinates;
    double v_max = 0.0;  // e^{-(n-2) u(x*)/2}
    std::vector<DescentStep> descent_chain;
    double certified_radius = 0.0;
    bool certificate_holds = false;
    bool truncated = false;  // the last descent ball reached past the injectivity radius
    std::vector<RadialSample> profile;
    double fit_lo = 0.0, fit_hi = 0.0;
    ProfileFit fit;
    std::vector<double> monitor_radii, monitor_ratios;
};

/// w = u - max u.
std::vector<double> rescale(std::span<const double> u);

/// Largest radius for which balls about any node are embedded on the chart
/// (balls on slabs are taken in the doubled chart).
double injectivity_radius(const GridChart& chart);

/// Descent towards a local minimum of u (local maximum of v = e^{-(n-2)u/2}):
/// from x_j search B(x_j, e^{u(x_j)/2}) for a node with u < u(x_j) - 1, hop to
/// the deepest such node, and stop when there is none. Fills the descent fields
/// of the report and re-checks the certificate u >= u(x*) - 1 on the last ball.
BlowupReport locate_blowup(std::span<const double> u, const GridChart& chart, std::size_t start);

/// Spherical supremum profile w_hat(r) = sup{w(y) : d(y, center) = r}, r <= R,
/// with radius bins of one grid spacing. On grid charts each sample carries the
/// distance of the node attaining the sup; on warped charts (radial fields) the
/// geodesic sphere of radius r about r_c covers the radii [|r_c - r|, r_c + r].
/// Throws ArgumentError if R exceeds the injectivity radius.
std::vector<RadialSample> minimal_radial(std::span<const double> w, const GridChart& chart, std::size_t center,
                                         double R);

/// Least squares w_hat ~ slope log r + intercept over samples with r in
/// [r_lo, r_hi]. Needs at least five usable samples.
ProfileFit profile_fit(std::span<const RadialSample> profile, double r_lo, double r_hi);

/// Full analysis of one state: descent from the global minimiser, rescaling,
/// profile over radius R (0 picks 0.9 of the injectivity radius) and a fit on
/// the default window [4h, R/2].
BlowupReport analyze_blowup(std::span<const double> u, const GridChart& chart, double threshold = -8.0,
                            double R = 0.0);

}  // namespace schouten
