#include "schouten/symfuncs.hpp"

#include "schouten/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace schouten {

namespace {

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

void check_order(int n, int k, int lo) {
    if (k < lo || k > n) {
        std::ostringstream os;
        os << "sigma index k=" << k << " outside [" << lo << ", " << n << "]";
        throw ArgumentError(os.str());
    }
}

// sigma_{k} of lam with the entries listed in `skip` removed.
double sigma_without(const EigenTuple& lam, int k, int skip_a, int skip_b = -1) {
    if (k < 0) return 0.0;
    std::vector<double> rest;
    rest.reserve(lam.size());
    for (int i = 0; i < lam.size(); ++i)
        if (i != skip_a && i != skip_b) rest.push_back(lam[i]);
    if (k > static_cast<int>(rest.size())) return 0.0;
    return sigma_all(rest)[k];
}

double theta_of(const ConeSpec& cone, int n) {
    return cone.kind == ConeKind::ricci_positive ? 1.0 / (n - 2) : cone.theta;
}

}  // namespace

SymFuncSpec SymFuncSpec::sigma_k_root(int n, int k) {
    if (n < 3) throw ArgumentError("dimension n must be >= 3");
    check_order(n, k, 1);
    SymFuncSpec s;
    s.family = Family::sigma_k_root;
    s.n = n;
    s.k = k;
    s.rho = std::pow(binomial(n, k), 1.0 / k) / n;
    return s;
}

SymFuncSpec SymFuncSpec::ricci_det(int n) {
    if (n < 3) throw ArgumentError("dimension n must be >= 3");
    SymFuncSpec s;
    s.family = Family::ricci_det;
    s.n = n;
    s.k = n;
    s.rho = (2.0 * n - 2.0) / n;
    return s;
}

ConeSpec SymFuncSpec::cone() const {
    return family == Family::ricci_det ? ConeSpec::ricci_positive() : ConeSpec::gamma(k);
}

std::string SymFuncSpec::name() const {
    if (family == Family::ricci_det) return "ricci_det(n=" + std::to_string(n) + ")";
    return "sigma_k_root(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
}

std::vector<double> sigma_all(std::span<const double> lam) {
    // Coefficients of prod_i (1 + lam_i x); each factor updates in place from the top down.
    std::vector<double> e(lam.size() + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lam.size(); ++i)
        for (std::size_t j = i + 1; j >= 1; --j) e[j] += lam[i] * e[j - 1];
    return e;
}

double sigma_k(const EigenTuple& lam, int k) {
    check_order(static_cast<int>(lam.size()), k, 0);
    return sigma_all(std::span<const double>(lam.data(), lam.size()))[k];
}

EigenTuple sigma_k_gradient(const EigenTuple& lam, int k) {
    const int n = static_cast<int>(lam.size());
    check_order(n, k, 1);
    EigenTuple g(n);
    for (int i = 0; i < n; ++i) g[i] = sigma_without(lam, k - 1, i);
    return g;
}

Eigen::MatrixXd sigma_k_hessian(const EigenTuple& lam, int k) {
    const int n = static_cast<int>(lam.size());
    check_order(n, k, 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    if (k < 2) return h;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) h(i, j) = h(j, i) = sigma_without(lam, k - 2, i, j);
    return h;
}

// ---- cones ------------------------------------------------------------------

double cone_margin(const EigenTuple& lam, const ConeSpec& cone) {
    const int n = static_cast<int>(lam.size());
    if (cone.kind == ConeKind::gamma_k) {
        check_order(n, cone.k, 1);
        const auto e = sigma_all(std::span<const double>(lam.data(), lam.size()));
        double m = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= cone.k; ++i) {
            const double root = std::pow(std::abs(e[i]), 1.0 / i);
            m = std::min(m, e[i] > 0 ? root : (e[i] < 0 ? -root : 0.0));
        }
        return m;
    }
    return lam.minCoeff() + theta_of(cone, n) * lam.sum();
}

bool cone_contains(const EigenTuple& lam, const ConeSpec& cone) {
    if (!lam.allFinite()) return false;
    if (cone.kind == ConeKind::gamma_k) {
        check_order(static_cast<int>(lam.size()), cone.k, 1);
        const auto e = sigma_all(std::span<const double>(lam.data(), lam.size()));
        for (int i = 1; i <= cone.k; ++i)
            if (!(e[i] > 0.0)) return false;
        return true;
    }
    return lam.minCoeff() + theta_of(cone, static_cast<int>(lam.size())) * lam.sum() > 0.0;
}

std::string cone_violation(const EigenTuple& lam, const ConeSpec& cone) {
    std::ostringstream os;
    if (cone.kind == ConeKind::gamma_k) {
        const auto e = sigma_all(std::span<const double>(lam.data(), lam.size()));
        for (int i = 1; i <= cone.k; ++i)
            if (!(e[i] > 0.0)) {
                os << "sigma_" << i << " = " << e[i] << " is not > 0";
                return os.str();
            }
        return {};
    }
    const double theta = theta_of(cone, static_cast<int>(lam.size()));
    const double v = lam.minCoeff() + theta * lam.sum();
    if (v > 0.0) return {};
    os << "min lambda + " << theta << " * sum lambda = " << v << " is not > 0";
    return os.str();
}

// ---- F --------------------------------------------------------------------------

EigenTuple ricci_eigenvalues(const EigenTuple& lam) {
    const double n = static_cast<double>(lam.size());
    return ((n - 2.0) * lam.array() + lam.sum()).matrix();
}

namespace {

void require_dim(const SymFuncSpec& spec, const EigenTuple& lam) {
    if (lam.size() != spec.n) throw ArgumentError("eigen tuple length differs from spec dimension");
}

void require_inside(const SymFuncSpec& spec, const EigenTuple& lam) {
    require_dim(spec, lam);
    const auto cone = spec.cone();
    if (!cone_contains(lam, cone)) throw DomainError("F evaluated outside its cone: " + cone_violation(lam, cone));
}

double product(const EigenTuple& x) { return x.prod(); }

}  // namespace

double f_eval(const SymFuncSpec& spec, const EigenTuple& lam) {
    require_inside(spec, lam);
    if (spec.family == Family::ricci_det) return std::pow(product(ricci_eigenvalues(lam)), 1.0 / spec.n);
    return std::pow(sigma_k(lam, spec.k), 1.0 / spec.k);
}

EigenTuple f_gradient(const SymFuncSpec& spec, const EigenTuple& lam) {
    require_inside(spec, lam);
    const int n = spec.n;
    if (spec.family == Family::ricci_det) {
        // dF/dlambda_i = sum_s dG/dmu_s (1 + (n-2) delta_is),  G = (prod mu)^{1/n}
        const EigenTuple mu = ricci_eigenvalues(lam);
        const double F = std::pow(product(mu), 1.0 / n);
        const EigenTuple dG = (F / n) * mu.cwiseInverse();
        return ((n - 2.0) * dG.array() + dG.sum()).matrix();
    }
    const int k = spec.k;
    const double s = sigma_k(lam, k);
    return (std::pow(s, 1.0 / k - 1.0) / k) * sigma_k_gradient(lam, k);
}

Eigen::MatrixXd f_hessian(const SymFuncSpec& spec, const EigenTuple& lam) {
    require_inside(spec, lam);
    const int n = spec.n;
    if (spec.family == Family::ricci_det) {
        const EigenTuple mu = ricci_eigenvalues(lam);
        const double F = std::pow(product(mu), 1.0 / n);
        const EigenTuple inv = mu.cwiseInverse();
        Eigen::MatrixXd Hmu = (F / (double(n) * n)) * inv * inv.transpose();
        Hmu.diagonal() -= (F / n) * inv.cwiseProduct(inv);
        const Eigen::MatrixXd J =
            (n - 2.0) * Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Ones(n, n);
        return J * Hmu * J;
    }
    const int k = spec.k;
    const double s = sigma_k(lam, k);
    const EigenTuple g = sigma_k_gradient(lam, k);
    const double a = 1.0 / k;
    return a * (a - 1.0) * std::pow(s, a - 2.0) * g * g.transpose() +
           a * std::pow(s, a - 1.0) * sigma_k_hessian(lam, k);
}

// ---- verification -----------------------------------------------------------------

SymFuncEvaluator evaluator_for(const SymFuncSpec& spec) {
    SymFuncEvaluator ev;
    ev.n = spec.n;
    ev.rho = spec.rho;
    ev.cone = spec.cone();
    ev.value = [spec](const EigenTuple& x) { return f_eval(spec, x); };
    ev.gradient = [spec](const EigenTuple& x) { return f_gradient(spec, x); };
    ev.hessian = [spec](const EigenTuple& x) { return f_hessian(spec, x); };
    return ev;
}

std::vector<EigenTuple> sample_cone(int n, const ConeSpec& cone, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<EigenTuple> out;
    out.reserve(count);
    long attempts = 0;
    const long max_attempts = 10000L * count + 100000L;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > max_attempts) throw ArgumentError("cone rejection sampling did not converge");
        EigenTuple x(n);
        for (int i = 0; i < n; ++i) x[i] = 1.0 + gauss(rng);
        const double scale = std::exp(0.5 * gauss(rng));
        x *= scale;
        if (cone_contains(x, cone)) out.push_back(std::move(x));
    }
    return out;
}

ConditionReport verify_conditions(const SymFuncEvaluator& F, int sample_count, std::uint64_t seed) {
    if (sample_count < 1) throw ArgumentError("sample_count must be >= 1");
    const int n = F.n;
    ConditionReport rep;
    rep.samples = sample_count;
    rep.rho = F.rho;
    rep.f_at_ones = F.value(EigenTuple::Ones(n));

    double min_f = std::numeric_limits<double>::infinity();
    double max_heig = -std::numeric_limits<double>::infinity();
    double max_perm = 0.0;
    bool perm_bitwise = true;
    double max_euler = 0.0;
    double min_c5 = std::numeric_limits<double>::infinity();
    double max_ratio = -std::numeric_limits<double>::infinity();

    std::mt19937_64 perm_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (const EigenTuple& x : sample_cone(n, F.cone, sample_count, seed)) {
        const double f = F.value(x);
        min_f = std::min(min_f, f);

        const Eigen::MatrixXd H = F.hessian(x);
        const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
        max_heig = std::max(max_heig, es.eigenvalues().maxCoeff() / hscale);

        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), perm_rng);
        EigenTuple px(n);
        for (int i = 0; i < n; ++i) px[i] = x[idx[i]];
        max_perm = std::max(max_perm, std::abs(F.value(px) - f) / f);
        EigenTuple sx = x, spx = px;
        std::sort(sx.begin(), sx.end());
        std::sort(spx.begin(), spx.end());
        if (F.value(sx) != F.value(spx)) perm_bitwise = false;

        const EigenTuple grad = F.gradient(x);
        max_euler = std::max(max_euler, std::abs(grad.dot(x) - f) / std::abs(f));

        const double s1 = x.sum();
        min_c5 = std::min(min_c5, grad.minCoeff() * s1 / f);
        max_ratio = std::max(max_ratio, f / s1);
    }

    rep.c1_positive = {min_f > 0.0, min_f};
    rep.c2_concave = {max_heig <= 1e-10, max_heig};
    // unsorted permutations only agree to rounding; the sorted tuples must agree bitwise
    rep.c3_symmetric = {perm_bitwise, max_perm};
    rep.c4_homogeneous = {max_euler <= 1e-8, max_euler};
    rep.c5_gradient = {min_c5 > 0.0, min_c5};
    rep.epsilon = min_c5;
    const bool ones_ok = std::abs(rep.f_at_ones - n * F.rho) <= 1e-12 * n * F.rho;
    rep.c6_maclaurin = {ones_ok && max_ratio <= F.rho + 1e-12, max_ratio};
    return rep;
}

ConditionReport verify_conditions(const SymFuncSpec& spec, int sample_count, std::uint64_t seed) {
    return verify_conditions(evaluator_for(spec), sample_count, seed);
}

}  // namespace schouten
