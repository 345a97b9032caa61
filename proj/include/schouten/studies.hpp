#pragma once

#include "schouten/manifold.hpp"

#include <string>
#include <vector>

namespace schouten {

/// Comparison of `curvature` against the finite-difference Riemann oracle at
/// two or more resolutions of one recipe.
struct CurvatureStudy {
    std::string recipe;
    std::vector<int> resolutions;
    std::vector<double> spacing;
    std::vector<double> oracle_error;  // max |eig A - eig A_oracle| over compared nodes
    std::vector<double> oracle_rms;    // root mean square of the same, used for the order
    std::vector<int> compared_nodes;
    bool order_checked = false;        // skipped when the errors are at rounding level
    double order = 0.0;                // log(rms_0/rms_last) / log(h_0/h_last)
    bool flat = false;
    double flat_residue = 0.0;         // max |A| entry (flat recipes)
    bool sphere = false;
    double sphere_deviation = 0.0;     // max |lambda - 1/2| over analytic and oracle eigenvalues, finest grid
    double sphere_bound = 0.0;         // 10 h^2 at the finest grid
    bool pass = false;
};

/// Runs the study on charts built by `make_chart(resolution)`. Warped nodes
/// closer than `pole_gap` to a pole are left out of the error measure; grid
/// charts are sub-sampled to about `max_nodes` interior nodes.
CurvatureStudy curvature_study(const std::function<GridChart(int)>& make_chart, const MetricRecipe& recipe,
                               const std::vector<int>& resolutions, double min_order = 1.8,
                               double pole_gap = 0.5, std::size_t max_nodes = 4096);

}  // namespace schouten
