#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace schouten {

enum class Backend { torus, slab, warped };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Structured chart. Grid backends (torus, slab) carry one axis per manifold
/// dimension; the slab's last axis is the Fermi normal coordinate x^n with
/// nodes on both boundary faces. The warped backend is a single radial axis
/// on [r_min, r_max] for the metric dr^2 + phi(r)^2 g_{S^{n-1}}.
struct GridChart {
    Backend backend = Backend::torus;
    int n = 3;
    std::vector<int> shape;
    std::vector<double> spacing;
    int boundary_axis = -1;
    double r_min = 0.0;
    double r_max = 0.0;

    static GridChart torus(int n, int nodes, double length = 1.0);
    static GridChart slab(int n, int nodes, double length = 1.0);
    static GridChart warped(int n, int nodes, double r_min, double r_max);

    int axes() const { return static_cast<int>(shape.size()); }
    std::size_t node_count() const;
    bool periodic(int axis) const;
    double length(int axis) const;
    double coordinate(int axis, int i) const;

    std::vector<int> multi_index(std::size_t node) const;
    std::size_t linear_index(std::span<const int> idx) const;

    /// Maps an out-of-range index along `axis` back into the chart: periodic
    /// wrap, or even reflection about a boundary node. `flipped` reports
    /// whether a reflection happened.
    int resolve(int axis, int i, bool& flipped) const;
};

struct MetricRecipe {
    enum class Kind { flat, round_sphere_warped, hemisphere_warped, perturbed };
    Kind kind = Kind::flat;
    Kind base = Kind::flat;  // for perturbed
    double amplitude = 0.0;
    int mode = 1;

    static MetricRecipe parse(const std::string& name);
    std::string name() const;
};

/// Radial profile of a warped metric, with analytic derivatives.
struct WarpedProfile {
    std::vector<double> phi, dphi, ddphi, dddphi;
    bool pole_at_start = false;
    bool pole_at_end = false;
};

struct MetricField {
    GridChart chart;
    MetricRecipe recipe;
    std::vector<Eigen::MatrixXd> g;  // grid backends: coordinate components per node
    WarpedProfile profile;           // warped backend

    bool is_warped() const { return chart.backend == Backend::warped; }
    bool is_pole(std::size_t node) const;

    /// Metric used by the conformal operator at a node. Warped charts work in
    /// the orthonormal frame (e_r, e_theta...), so this is the identity there.
    Eigen::MatrixXd metric_at(std::size_t node) const;

    /// Coordinate metric at an arbitrary (possibly ghost) multi-index on grid
    /// charts; reflected components g_{in} pick up a sign.
    Eigen::MatrixXd sample(std::span<const int> idx) const;
};

MetricField build_metric(const GridChart& chart, const MetricRecipe& recipe);

/// Per-node Christoffel symbols, Ricci, scalar and Schouten curvature.
/// For warped charts the tensors are expressed in the orthonormal frame
/// (radial first) and the Christoffel table is empty.
struct CurvatureBundle {
    int n = 3;
    bool orthonormal_frame = false;
    std::vector<std::vector<double>> christoffel;  // [node][k*n*n + i*n + j] = Gamma^k_ij
    std::vector<Eigen::MatrixXd> ricci;
    std::vector<double> scalar;
    std::vector<Eigen::MatrixXd> schouten;

    double gamma(std::size_t node, int k, int i, int j) const {
        return christoffel[node][(k * n + i) * n + j];
    }
};

/// Schouten tensor from Ricci, scalar curvature and metric.
Eigen::MatrixXd schouten_from(const Eigen::MatrixXd& ric, double scalar, const Eigen::MatrixXd& g);

/// Sorted eigenvalues of g^{-1} A via Cholesky symmetrization.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& g, const Eigen::MatrixXd& A);

CurvatureBundle curvature(const MetricField& metric);

struct NodeCurvature {
    Eigen::MatrixXd g;  // coordinate metric at the node
    Eigen::MatrixXd ricci;
    double scalar = 0.0;
    Eigen::MatrixXd schouten;
    Eigen::VectorXd schouten_eigenvalues;  // of g^{-1} A, ascending
};

/// Independent finite-difference curvature at one node: the full 4-index
/// Riemann tensor from second differences of raw metric samples, contracted
/// to Ricci, scalar and Schouten. Used to validate `curvature`.
NodeCurvature fd_curvature_oracle(const MetricField& metric, std::size_t node);

/// Riemann -> Ricci -> Schouten from a metric sampler on a uniform local grid.
NodeCurvature fd_curvature_from_samples(int n, std::span<const double> spacing,
                                        const std::function<Eigen::MatrixXd(std::span<const int>)>& sample);

/// Largest second fundamental form component on the boundary (0 for a totally
/// geodesic boundary). Torus and pole-only warped charts have no boundary.
double boundary_second_fundamental_form(const MetricField& metric);

struct DoubledField {
    GridChart chart;
    std::vector<double> values;
};

/// Largest one-sided normal derivative of a scalar field on the boundary faces.
double neumann_violation(const GridChart& chart, std::span<const double> field);

/// Even reflection of a Neumann field across the boundary. Slab charts become
/// periodic of length 2L along the normal axis; warped charts are reflected
/// across r_max. Nodes of the original chart are copied unchanged.
DoubledField double_field(const GridChart& chart, std::span<const double> field, double tolerance = 1e-2);

/// The even reflection of the metric itself onto the doubled chart.
MetricField double_metric(const MetricField& metric);

/// Distance between two nodes: flat with wrap on the torus, on the doubled
/// chart for the slab, and |r_a - r_b| along the radial line for warped charts.
double chart_distance(const GridChart& chart, std::size_t a, std::size_t b);

/// Area of the unit sphere S^m.
double sphere_area(int m);

}  // namespace schouten
