#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance suite. Nothing here calls into the library's numerics.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// sigma_k by enumerating all k-subsets (bitmask over n <= 20 entries).
inline double sigma_k_bruteforce(const Eigen::VectorXd& lam, int k) {
    const int n = static_cast<int>(lam.size());
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) p *= lam[i];
        s += p;
    }
    return s;
}

/// Central-difference gradient of a scalar function of a vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

/// Central-difference Hessian.
inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                  double h = 1e-4) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto at = [&](double si, double sj) {
                Eigen::VectorXd y = x;
                y[i] += si * h;
                y[j] += sj * h;
                return f(y);
            };
            H(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
        }
    return H;
}

/// Eigenvalues of g^{-1} W through a plain (non-Cholesky) route: the general
/// eigen-solver on the product, sorted ascending.
inline Eigen::VectorXd eigen_via_product(const Eigen::MatrixXd& g, const Eigen::MatrixXd& W) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.inverse() * W);
    Eigen::VectorXd v = es.eigenvalues().real();
    std::sort(v.data(), v.data() + v.size());
    return v;
}

}  // namespace oracle
