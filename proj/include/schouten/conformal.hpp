#pragma once

#include "schouten/errors.hpp"
#include "schouten/manifold.hpp"
#include "schouten/schedule.hpp"
#include "schouten/symfuncs.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace schouten {

/// Linear combination of field values, sum_m coef_m u[index_m].
struct Stencil {
    std::vector<std::pair<std::size_t, double>> terms;

    double apply(std::span<const double> u) const {
        double s = 0.0;
        for (const auto& [i, c] : terms) s += c * u[i];
        return s;
    }
    void add(std::size_t index, double coef);
    Stencil& operator+=(const Stencil& other);
    Stencil scaled(double c) const;
};

/// Second-order finite-difference operators of a chart. Gradient components
/// and the covariant Hessian (Christoffel correction included) are stored as
/// linear stencils per node; ghost nodes are folded back by even reflection,
/// so every field seen through these stencils satisfies the discrete Neumann
/// condition exactly.
class Discretization {
public:
    Discretization(const MetricField& metric, const CurvatureBundle& curvature);

    int n() const { return n_; }
    std::size_t node_count() const { return g_.size(); }
    const Eigen::MatrixXd& g(std::size_t node) const { return g_[node]; }
    const Eigen::MatrixXd& g_inv(std::size_t node) const { return ginv_[node]; }
    const Eigen::MatrixXd& schouten(std::size_t node) const { return A_[node]; }
    const Stencil& gradient(std::size_t node, int i) const { return grad_[node][i]; }
    const Stencil& hessian(std::size_t node, int i, int j) const { return hess_[node][i * n_ + j]; }

    /// Trapezoid-consistent volume weights (sqrt det g times cell volume,
    /// phi^{n-1} |S^{n-1}| dr on warped charts).
    std::span<const double> weights() const { return weights_; }
    double volume() const { return volume_; }

private:
    int n_;
    std::vector<Eigen::MatrixXd> g_, ginv_, A_;
    std::vector<std::vector<Stencil>> grad_, hess_;
    std::vector<double> weights_;
    double volume_ = 0.0;
};

/// Bundle for one instance of the deformed equation: background metric and
/// curvature, curvature function, prescribed f > 0, the constant varsigma and
/// the homotopy weight.
struct Problem {
    MetricField metric;
    CurvatureBundle curvature;
    std::shared_ptr<const Discretization> disc;
    SymFuncSpec F;
    std::vector<double> f;
    double varsigma = 0.0;
    PsiSchedule psi;

    std::size_t size() const { return f.size(); }
};

/// varsigma = (n rho)^{-1} vol(M)^{2/(n+1)}, volume by the chart's quadrature.
double varsigma(const Discretization& disc, const SymFuncSpec& F);

Problem make_problem(MetricField metric, const SymFuncSpec& F, std::vector<double> f, PsiSchedule psi = {});

// ---- conformal state ---------------------------------------------------------------

struct ConformalState {
    std::vector<double> u;
    std::vector<Eigen::VectorXd> grad;  // covariant components du_i
    std::vector<Eigen::MatrixXd> hess;  // covariant Hessian
    std::vector<Eigen::MatrixXd> W;     // hess + du (x) du - |du|^2 g / 2 + A
};

/// Builds W = nabla^2 u + du (x) du - 1/2 |nabla u|^2 g + A_g per node.
/// A positive `neumann_tolerance` checks the one-sided boundary derivative first.
ConformalState assemble_w(std::span<const double> u, const Discretization& disc, double neumann_tolerance,
                          const GridChart& chart);
ConformalState assemble_w(std::span<const double> u, const Problem& problem, double neumann_tolerance = 1e-2);

/// Eigenvalues of g^{-1} W, ascending.
EigenTuple eigen_pointwise(const Eigen::MatrixXd& g, const Eigen::MatrixXd& W);

struct AdmissibilityReport {
    bool all_admissible = false;
    std::size_t worst_node = 0;
    double worst_margin = 0.0;
    // W + sigma_1(W) g / (n-2) >= -tolerance
    bool ricci_inequality = false;
    double worst_ricci_eigenvalue = 0.0;
    std::size_t worst_ricci_node = 0;
};

class InadmissibleError : public DomainError {
public:
    InadmissibleError(const std::string& what, AdmissibilityReport report)
        : DomainError(what), report_(report) {}
    const AdmissibilityReport& report() const noexcept { return report_; }

private:
    AdmissibilityReport report_;
};

/// Cone membership of lambda(g^{-1} W) with W the t = 1 tensor; also checks
/// the nonnegative-Ricci inequality for W with the given slack.
AdmissibilityReport admissibility(std::span<const double> u, const Problem& problem, const ConeSpec& cone,
                                  double ricci_tolerance = 0.0);

/// Same, for the augmented tensor of the deformation at parameter t.
AdmissibilityReport admissibility_at(std::span<const double> u, double t, const Problem& problem,
                                     const ConeSpec& cone, double ricci_tolerance = 0.0);

/// The nonlocal term (int e^{-(n+1)u} dV)^{2/(n+1)}.
double nonlocal_integral(std::span<const double> u, const Discretization& disc);

/// F(lambda(g^{-1} B_t[u])) - psi(t) f e^{-2u} - (1-t) (int e^{-(n+1)u})^{2/(n+1)},
/// B_t[u] = varsigma (1 - psi) g + psi A + nabla^2 u + du (x) du - |du|^2 g / 2.
/// Throws InadmissibleError if some node leaves the cone.
std::vector<double> residual(std::span<const double> u, double t, const Problem& problem);

/// Residual without the throw: returns false (and fills `report`) when some
/// node is not admissible with the given margin.
bool try_residual(std::span<const double> u, double t, const Problem& problem, double margin,
                  std::vector<double>& out, AdmissibilityReport& report);

/// Discrete Jacobian of `residual`: sparse local part plus the rank-one term
/// coming from the nonlocal integral, J v = S v + a (b . v).
struct LinearOperator {
    Eigen::SparseMatrix<double> local;
    Eigen::VectorXd a, b;
    std::vector<Eigen::MatrixXd> coefficients;  // F^{ij} per node

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd dense() const;
    /// Solves J x = rhs through the bordered system [S a; b^T -1].
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

LinearOperator linearize(std::span<const double> u, double t, const Problem& problem);

/// dF/dB at a node: L^{-T} Q diag(dF/dlambda) Q^T L^{-1} with g = L L^T and
/// Q the eigenvectors of L^{-1} B L^{-T}.
Eigen::MatrixXd f_coefficients(const SymFuncSpec& F, const Eigen::MatrixXd& g, const Eigen::MatrixXd& B);

}  // namespace schouten
