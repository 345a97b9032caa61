#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace schouten {

/// Eigenvalue tuple lambda = (lambda_1, ..., lambda_n).
using EigenTuple = Eigen::VectorXd;

enum class Family { sigma_k_root, ricci_det };

enum class ConeKind { gamma_k, sigma_theta, ricci_positive };

/// Open cone in eigenvalue space.
///  - gamma_k:        sigma_1 > 0, ..., sigma_k > 0
///  - sigma_theta:    min x_i + theta * sum x_i > 0
///  - ricci_positive: sigma_theta with theta = 1/(n-2), i.e. mu_i = (n-2)x_i + sum x > 0
struct ConeSpec {
    ConeKind kind = ConeKind::gamma_k;
    int k = 1;
    double theta = 0.0;

    static ConeSpec gamma(int k) { return {ConeKind::gamma_k, k, 0.0}; }
    static ConeSpec sigma(double theta) { return {ConeKind::sigma_theta, 0, theta}; }
    static ConeSpec ricci_positive() { return {ConeKind::ricci_positive, 0, 0.0}; }
};

/// Which curvature function F is in use, its dimension and the constants tied to it.
struct SymFuncSpec {
    Family family = Family::sigma_k_root;
    int k = 1;  // only meaningful for sigma_k_root
    int n = 3;
    double rho = 1.0;          // F(1,...,1) = n * rho
    double epsilon_c5 = 0.0;   // empirical, filled in by verify_conditions

    static SymFuncSpec sigma_k_root(int n, int k);
    static SymFuncSpec ricci_det(int n);

    ConeSpec cone() const;
    std::string name() const;
};

// ---- elementary symmetric functions ---------------------------------------

/// All of sigma_0, ..., sigma_n, accumulated from the coefficients of prod (1 + lambda_i x).
std::vector<double> sigma_all(std::span<const double> lam);

/// k-th elementary symmetric polynomial, 0 <= k <= n (sigma_0 = 1).
double sigma_k(const EigenTuple& lam, int k);

/// d sigma_k / d lambda_i = sigma_{k-1}(lambda with entry i removed).
EigenTuple sigma_k_gradient(const EigenTuple& lam, int k);

/// d^2 sigma_k / d lambda_i d lambda_j = sigma_{k-2}(lambda without i, j), zero diagonal.
Eigen::MatrixXd sigma_k_hessian(const EigenTuple& lam, int k);

// ---- cones ----------------------------------------------------------------

bool cone_contains(const EigenTuple& lam, const ConeSpec& cone);

/// Signed, degree-1 homogeneous margin: positive iff inside the cone.
double cone_margin(const EigenTuple& lam, const ConeSpec& cone);

/// Human readable description of the first violated defining inequality (empty if inside).
std::string cone_violation(const EigenTuple& lam, const ConeSpec& cone);

// ---- curvature functions ----------------------------------------------------

/// mu_i = (n-2) lambda_i + sum_j lambda_j.
EigenTuple ricci_eigenvalues(const EigenTuple& lam);

double f_eval(const SymFuncSpec& spec, const EigenTuple& lam);
EigenTuple f_gradient(const SymFuncSpec& spec, const EigenTuple& lam);
Eigen::MatrixXd f_hessian(const SymFuncSpec& spec, const EigenTuple& lam);

// ---- C1-C6 verification -------------------------------------------------------

/// Plug-in evaluator for the condition harness. The two built-in families
/// are wrapped by `evaluator_for`.
struct SymFuncEvaluator {
    int n = 3;
    double rho = 1.0;
    ConeSpec cone;
    std::function<double(const EigenTuple&)> value;
    std::function<EigenTuple(const EigenTuple&)> gradient;
    std::function<Eigen::MatrixXd(const EigenTuple&)> hessian;
};

SymFuncEvaluator evaluator_for(const SymFuncSpec& spec);

struct ConditionResult {
    bool pass = false;
    double worst = 0.0;  // worst observed value of the checked quantity
};

struct ConditionReport {
    int samples = 0;
    ConditionResult c1_positive;      // worst = min F
    ConditionResult c2_concave;       // worst = max Hessian eigenvalue (scaled)
    ConditionResult c3_symmetric;     // worst = max |F(perm x) - F(x)| / F
    ConditionResult c4_homogeneous;   // worst = max Euler relative residual
    ConditionResult c5_gradient;      // worst = min (dF/dx_i * sigma_1 / F)
    ConditionResult c6_maclaurin;     // worst = max F / sigma_1
    double epsilon = 0.0;             // certified C5 constant
    double rho = 0.0;
    double f_at_ones = 0.0;

    bool all_pass() const {
        return c1_positive.pass && c2_concave.pass && c3_symmetric.pass && c4_homogeneous.pass &&
               c5_gradient.pass && c6_maclaurin.pass;
    }
};

/// Random points inside the cone by rejection sampling from a shifted Gaussian.
std::vector<EigenTuple> sample_cone(int n, const ConeSpec& cone, int count, std::uint64_t seed);

ConditionReport verify_conditions(const SymFuncEvaluator& F, int sample_count, std::uint64_t seed);
ConditionReport verify_conditions(const SymFuncSpec& spec, int sample_count, std::uint64_t seed);

}  // namespace schouten
