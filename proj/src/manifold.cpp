#include "schouten/manifold.hpp"

#include "schouten/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace schouten {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
    if (!ok) throw ArgumentError(msg);
}

}  // namespace

std::string to_string(Backend b) {
    switch (b) {
        case Backend::torus: return "torus";
        case Backend::slab: return "slab";
        case Backend::warped: return "warped";
    }
    return "?";
}

Backend backend_from_string(const std::string& s) {
    if (s == "torus") return Backend::torus;
    if (s == "slab") return Backend::slab;
    if (s == "warped") return Backend::warped;
    throw ArgumentError("unknown backend '" + s + "'");
}

// ---- chart ----------------------------------------------------------------

GridChart GridChart::torus(int n, int nodes, double length) {
    require(n >= 3, "dimension must be >= 3");
    require(nodes >= 8, "resolution must be >= 8 nodes per axis");
    require(length > 0, "chart length must be positive");
    GridChart c;
    c.backend = Backend::torus;
    c.n = n;
    c.shape.assign(n, nodes);
    c.spacing.assign(n, length / nodes);
    return c;
}

GridChart GridChart::slab(int n, int nodes, double length) {
    GridChart c = torus(n, nodes, length);
    c.backend = Backend::slab;
    c.boundary_axis = n - 1;
    c.spacing[n - 1] = length / (nodes - 1);
    return c;
}

GridChart GridChart::warped(int n, int nodes, double r_min, double r_max) {
    require(n >= 3, "dimension must be >= 3");
    require(nodes >= 8, "resolution must be >= 8 nodes");
    require(r_max > r_min && r_min >= 0, "warped chart needs 0 <= r_min < r_max");
    GridChart c;
    c.backend = Backend::warped;
    c.n = n;
    c.shape = {nodes};
    c.spacing = {(r_max - r_min) / (nodes - 1)};
    c.r_min = r_min;
    c.r_max = r_max;
    return c;
}

std::size_t GridChart::node_count() const {
    std::size_t c = 1;
    for (int s : shape) c *= static_cast<std::size_t>(s);
    return c;
}

bool GridChart::periodic(int axis) const {
    if (backend == Backend::torus) return true;
    if (backend == Backend::slab) return axis != boundary_axis;
    return false;
}

double GridChart::length(int axis) const {
    return periodic(axis) ? shape[axis] * spacing[axis] : (shape[axis] - 1) * spacing[axis];
}

double GridChart::coordinate(int axis, int i) const {
    return (backend == Backend::warped ? r_min : 0.0) + i * spacing[axis];
}

std::vector<int> GridChart::multi_index(std::size_t node) const {
    std::vector<int> idx(shape.size());
    for (int a = axes() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(node % shape[a]);
        node /= shape[a];
    }
    return idx;
}

std::size_t GridChart::linear_index(std::span<const int> idx) const {
    std::size_t node = 0;
    for (int a = 0; a < axes(); ++a) node = node * shape[a] + static_cast<std::size_t>(idx[a]);
    return node;
}

int GridChart::resolve(int axis, int i, bool& flipped) const {
    const int N = shape[axis];
    if (periodic(axis)) return ((i % N) + N) % N;
    while (i < 0 || i >= N) {
        i = i < 0 ? -i : 2 * (N - 1) - i;
        flipped = !flipped;
    }
    return i;
}

// ---- recipes ----------------------------------------------------------------

namespace {

MetricRecipe::Kind kind_from(const std::string& s) {
    using K = MetricRecipe::Kind;
    if (s == "flat") return K::flat;
    if (s == "round_sphere_warped" || s == "sphere") return K::round_sphere_warped;
    if (s == "hemisphere_warped" || s == "hemisphere") return K::hemisphere_warped;
    if (s == "perturbed") return K::perturbed;
    throw ArgumentError("unknown metric recipe '" + s + "'");
}

std::string kind_name(MetricRecipe::Kind k) {
    using K = MetricRecipe::Kind;
    switch (k) {
        case K::flat: return "flat";
        case K::round_sphere_warped: return "round_sphere_warped";
        case K::hemisphere_warped: return "hemisphere_warped";
        case K::perturbed: return "perturbed";
    }
    return "?";
}

}  // namespace

MetricRecipe MetricRecipe::parse(const std::string& name) {
    MetricRecipe r;
    r.kind = kind_from(name);
    return r;
}

std::string MetricRecipe::name() const {
    if (kind != Kind::perturbed) return kind_name(kind);
    std::ostringstream os;
    os << "perturbed(" << kind_name(base) << "," << amplitude << "," << mode << ")";
    return os.str();
}

bool MetricField::is_pole(std::size_t node) const {
    if (!is_warped()) return false;
    return (node == 0 && profile.pole_at_start) ||
           (node + 1 == chart.node_count() && profile.pole_at_end);
}

Eigen::MatrixXd MetricField::metric_at(std::size_t node) const {
    if (is_warped()) return Eigen::MatrixXd::Identity(chart.n, chart.n);
    return g[node];
}

Eigen::MatrixXd MetricField::sample(std::span<const int> idx) const {
    if (is_warped()) throw ArgumentError("coordinate samples are only defined on grid charts");
    std::vector<int> res(idx.begin(), idx.end());
    bool flipped = false;
    for (int a = 0; a < chart.axes(); ++a) res[a] = chart.resolve(a, idx[a], flipped);
    Eigen::MatrixXd out = g[chart.linear_index(res)];
    if (flipped) {
        const int b = chart.boundary_axis;
        for (int i = 0; i < chart.n; ++i)
            if (i != b) {
                out(i, b) = -out(i, b);
                out(b, i) = -out(b, i);
            }
    }
    return out;
}

namespace {

// Smooth periodic (or boundary-even) factors for the grid perturbation.
double even_factor(const GridChart& c, int axis, double x, int mode) {
    const double L = c.length(axis);
    return c.periodic(axis) ? std::cos(2.0 * kPi * mode * x / L) : std::cos(kPi * mode * x / L);
}

MetricField build_grid(const GridChart& chart, const MetricRecipe& recipe) {
    using K = MetricRecipe::Kind;
    const bool perturbed = recipe.kind == K::perturbed;
    if (!(recipe.kind == K::flat || (perturbed && recipe.base == K::flat)))
        throw ArgumentError("recipe " + recipe.name() + " is not compatible with a " + to_string(chart.backend) +
                            " chart");
    MetricField m;
    m.chart = chart;
    m.recipe = recipe;
    const int n = chart.n;
    const double a = perturbed ? recipe.amplitude : 0.0;
    const int mode = recipe.mode;
    // The slab keeps Fermi form: only the tangential block is perturbed.
    const int tangential = chart.backend == Backend::slab ? n - 1 : n;
    m.g.resize(chart.node_count());
    for (std::size_t node = 0; node < chart.node_count(); ++node) {
        const auto idx = chart.multi_index(node);
        Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
        if (a != 0.0) {
            double s = 1.0;
            for (int d = 0; d < n; ++d) s *= even_factor(chart, d, chart.coordinate(d, idx[d]), mode);
            double s2 = std::sin(2.0 * kPi * mode * chart.coordinate(0, idx[0]) / chart.length(0));
            for (int d = 1; d < n; ++d) s2 *= even_factor(chart, d, chart.coordinate(d, idx[d]), mode);
            for (int i = 0; i < tangential; ++i) g(i, i) += a * s;
            g(0, 1) += 0.5 * a * s2;
            g(1, 0) = g(0, 1);
        }
        if (g.llt().info() != Eigen::Success)
            throw DegenerateMetricError(node, "perturbation amplitude makes the metric degenerate");
        m.g[node] = std::move(g);
    }
    return m;
}

MetricField build_warped(const GridChart& chart, const MetricRecipe& recipe) {
    using K = MetricRecipe::Kind;
    K base = recipe.kind == K::perturbed ? recipe.base : recipe.kind;
    if (base != K::round_sphere_warped && base != K::hemisphere_warped)
        throw ArgumentError("recipe " + recipe.name() + " is not compatible with a warped chart");
    const double expected_max = base == K::round_sphere_warped ? kPi : 0.5 * kPi;
    if (std::abs(chart.r_min) > 1e-12 || std::abs(chart.r_max - expected_max) > 1e-12)
        throw ArgumentError("recipe " + recipe.name() + " needs the radial interval [0, " +
                            std::to_string(expected_max) + "]");
    const double a = recipe.kind == K::perturbed ? recipe.amplitude : 0.0;
    if (recipe.kind == K::perturbed && recipe.mode < 1) throw ArgumentError("perturbation mode must be >= 1");
    const double q = 2.0 * recipe.mode + 1.0;

    // phi = sin r + a (sin(q r) - q sin r), q odd: keeps phi odd at the pole,
    // phi'(0) = 1, and phi'(pi/2) = 0 so the equator stays totally geodesic.
    MetricField m;
    m.chart = chart;
    m.recipe = recipe;
    const int N = chart.shape[0];
    auto& p = m.profile;
    p.phi.resize(N);
    p.dphi.resize(N);
    p.ddphi.resize(N);
    p.dddphi.resize(N);
    p.pole_at_start = true;
    p.pole_at_end = base == K::round_sphere_warped;
    for (int i = 0; i < N; ++i) {
        const double r = chart.coordinate(0, i);
        p.phi[i] = std::sin(r) + a * (std::sin(q * r) - q * std::sin(r));
        p.dphi[i] = std::cos(r) + a * (q * std::cos(q * r) - q * std::cos(r));
        p.ddphi[i] = -std::sin(r) + a * (-q * q * std::sin(q * r) + q * std::sin(r));
        p.dddphi[i] = -std::cos(r) + a * (-q * q * q * std::cos(q * r) + q * std::cos(r));
    }
    p.phi[0] = 0.0;
    p.ddphi[0] = 0.0;
    if (p.pole_at_end) {
        p.phi[N - 1] = 0.0;
        p.ddphi[N - 1] = 0.0;
    } else {
        p.dphi[N - 1] = 0.0;
    }
    for (int i = 0; i < N; ++i)
        if (!m.is_pole(i) && !(p.phi[i] > 0.0))
            throw DegenerateMetricError(i, "warped profile phi must be positive away from the poles");
    return m;
}

}  // namespace

MetricField build_metric(const GridChart& chart, const MetricRecipe& recipe) {
    if (chart.backend == Backend::warped) return build_warped(chart, recipe);
    return build_grid(chart, recipe);
}

// ---- curvature ----------------------------------------------------------------

Eigen::MatrixXd schouten_from(const Eigen::MatrixXd& ric, double scalar, const Eigen::MatrixXd& g) {
    const double n = static_cast<double>(g.rows());
    return (ric - scalar / (2.0 * (n - 1.0)) * g) / (n - 2.0);
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& g, const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw DegenerateMetricError(0, "metric is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd X = L.triangularView<Eigen::Lower>().solve(A);
    Eigen::MatrixXd M = L.triangularView<Eigen::Lower>().solve(X.transpose());
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

namespace {

CurvatureBundle warped_curvature(const MetricField& m) {
    const int n = m.chart.n;
    const int N = m.chart.shape[0];
    const auto& p = m.profile;
    CurvatureBundle cb;
    cb.n = n;
    cb.orthonormal_frame = true;
    cb.ricci.resize(N);
    cb.scalar.resize(N);
    cb.schouten.resize(N);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < N; ++i) {
        double k_rad, k_tan;  // sectional curvatures of radial and tangential planes
        if (m.is_pole(i)) {
            k_rad = k_tan = -p.dddphi[i] / p.dphi[i];
        } else {
            k_rad = -p.ddphi[i] / p.phi[i];
            k_tan = (1.0 - p.dphi[i] * p.dphi[i]) / (p.phi[i] * p.phi[i]);
        }
        Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
        ric(0, 0) = (n - 1) * k_rad;
        for (int a = 1; a < n; ++a) ric(a, a) = k_rad + (n - 2) * k_tan;
        const double R = 2.0 * (n - 1) * k_rad + (n - 1.0) * (n - 2.0) * k_tan;
        cb.ricci[i] = ric;
        cb.scalar[i] = R;
        cb.schouten[i] = schouten_from(ric, R, I);
    }
    return cb;
}

int parity(int b, int k, int i, int j) { return ((k == b) + (i == b) + (j == b)) % 2 ? -1 : 1; }

CurvatureBundle grid_curvature(const MetricField& m) {
    const GridChart& c = m.chart;
    const int n = c.n;
    const std::size_t nodes = c.node_count();
    CurvatureBundle cb;
    cb.n = n;
    cb.christoffel.resize(nodes);
    cb.ricci.resize(nodes);
    cb.scalar.resize(nodes);
    cb.schouten.resize(nodes);

    std::vector<Eigen::MatrixXd> ginv(nodes);
    for (std::size_t node = 0; node < nodes; ++node) {
        Eigen::LLT<Eigen::MatrixXd> llt(m.g[node]);
        if (llt.info() != Eigen::Success) {
            std::ostringstream os;
            os << "metric not positive definite at node " << node;
            throw DegenerateMetricError(node, os.str());
        }
        ginv[node] = llt.solve(Eigen::MatrixXd::Identity(n, n));
    }

    // Christoffel symbols from central differences of g.
    for (std::size_t node = 0; node < nodes; ++node) {
        auto idx = c.multi_index(node);
        std::vector<Eigen::MatrixXd> dg(n);
        for (int d = 0; d < n; ++d) {
            auto up = idx, dn = idx;
            ++up[d];
            --dn[d];
            dg[d] = (m.sample(up) - m.sample(dn)) / (2.0 * c.spacing[d]);
        }
        auto& G = cb.christoffel[node];
        G.assign(n * n * n, 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) s += ginv[node](k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                    G[(k * n + i) * n + j] = 0.5 * s;
                }
    }

    // Christoffel at a possibly-ghost index; reflection flips components by index parity.
    auto gamma_at = [&](std::vector<int> idx, int k, int i, int j) {
        bool flipped = false;
        for (int a = 0; a < c.axes(); ++a) idx[a] = c.resolve(a, idx[a], flipped);
        const double v = cb.christoffel[c.linear_index(idx)][(k * n + i) * n + j];
        return flipped ? parity(c.boundary_axis, k, i, j) * v : v;
    };

    for (std::size_t node = 0; node < nodes; ++node) {
        const auto idx = c.multi_index(node);
        Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) {
                    auto up = idx, dn = idx;
                    ++up[k];
                    --dn[k];
                    s += (gamma_at(up, k, i, j) - gamma_at(dn, k, i, j)) / (2.0 * c.spacing[k]);
                }
                {
                    auto up = idx, dn = idx;
                    ++up[j];
                    --dn[j];
                    for (int k = 0; k < n; ++k)
                        s -= (gamma_at(up, k, i, k) - gamma_at(dn, k, i, k)) / (2.0 * c.spacing[j]);
                }
                for (int k = 0; k < n; ++k)
                    for (int p = 0; p < n; ++p)
                        s += cb.gamma(node, k, k, p) * cb.gamma(node, p, i, j) -
                             cb.gamma(node, k, j, p) * cb.gamma(node, p, i, k);
                ric(i, j) = s;
            }
        ric = 0.5 * (ric + ric.transpose());
        const double R = (ginv[node].cwiseProduct(ric)).sum();
        cb.ricci[node] = ric;
        cb.scalar[node] = R;
        cb.schouten[node] = schouten_from(ric, R, m.g[node]);
    }
    return cb;
}

}  // namespace

CurvatureBundle curvature(const MetricField& metric) {
    return metric.is_warped() ? warped_curvature(metric) : grid_curvature(metric);
}

NodeCurvature fd_curvature_from_samples(int n, std::span<const double> h,
                                        const std::function<Eigen::MatrixXd(std::span<const int>)>& sample) {
    std::vector<int> off(n, 0);
    auto at = [&](int a, int da, int b = -1, int db = 0) {
        std::fill(off.begin(), off.end(), 0);
        off[a] += da;
        if (b >= 0) off[b] += db;
        return sample(off);
    };
    const Eigen::MatrixXd g0 = at(0, 0);
    Eigen::LLT<Eigen::MatrixXd> llt(g0);
    if (llt.info() != Eigen::Success) throw DegenerateMetricError(0, "oracle metric not positive definite");
    const Eigen::MatrixXd gi = llt.solve(Eigen::MatrixXd::Identity(n, n));

    std::vector<Eigen::MatrixXd> d1(n);
    std::vector<std::vector<Eigen::MatrixXd>> d2(n, std::vector<Eigen::MatrixXd>(n));
    for (int a = 0; a < n; ++a) {
        const Eigen::MatrixXd up = at(a, 1), dn = at(a, -1);
        d1[a] = (up - dn) / (2.0 * h[a]);
        d2[a][a] = (up - 2.0 * g0 + dn) / (h[a] * h[a]);
        for (int b = a + 1; b < n; ++b) {
            d2[a][b] = (at(a, 1, b, 1) - at(a, 1, b, -1) - at(a, -1, b, 1) + at(a, -1, b, -1)) / (4.0 * h[a] * h[b]);
            d2[b][a] = d2[a][b];
        }
    }
    // Gamma^m_jk
    std::vector<double> G(n * n * n, 0.0);
    auto Gi = [&](int m, int j, int k) -> double& { return G[(m * n + j) * n + k]; };
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int p = 0; p < n; ++p) s += gi(m, p) * (d1[k](p, j) + d1[j](p, k) - d1[p](j, k));
                Gi(m, j, k) = 0.5 * s;
            }
    // R_{iklm} = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il) + g_np (G^n_kl G^p_im - G^n_km G^p_il)
    auto riemann = [&](int i, int k, int l, int m) {
        double r = 0.5 * (d2[k][l](i, m) + d2[i][m](k, l) - d2[k][m](i, l) - d2[i][l](k, m));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) r += g0(a, b) * (Gi(a, k, l) * Gi(b, i, m) - Gi(a, k, m) * Gi(b, i, l));
        return r;
    };
    NodeCurvature out;
    out.g = g0;
    out.ricci = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) s += gi(i, l) * riemann(i, k, l, m);
            out.ricci(k, m) = s;
        }
    out.ricci = 0.5 * (out.ricci + out.ricci.transpose());
    out.scalar = gi.cwiseProduct(out.ricci).sum();
    out.schouten = schouten_from(out.ricci, out.scalar, g0);
    out.schouten_eigenvalues = generalized_eigenvalues(g0, out.schouten);
    return out;
}

NodeCurvature fd_curvature_oracle(const MetricField& metric, std::size_t node) {
    const GridChart& c = metric.chart;
    if (node >= c.node_count()) throw ArgumentError("oracle node out of range");
    const int n = c.n;
    if (!metric.is_warped()) {
        const auto idx = c.multi_index(node);
        for (int a = 0; a < c.axes(); ++a)
            if (!c.periodic(a) && (idx[a] == 0 || idx[a] == c.shape[a] - 1))
                throw ArgumentError("oracle stencil unavailable on a boundary face");
        return fd_curvature_from_samples(n, c.spacing, [&](std::span<const int> off) {
            std::vector<int> j(idx);
            for (int a = 0; a < n; ++a) j[a] += off[a];
            return metric.sample(j);
        });
    }
    const int N = c.shape[0];
    const int i = static_cast<int>(node);
    if (i == 0 || i == N - 1 || metric.is_pole(node))
        throw ArgumentError("oracle stencil unavailable at a pole or boundary node");
    const double h = c.spacing[0];
    const std::vector<double> spacing(n, h);
    // Local hyperspherical chart (r, theta_1, ..., theta_{n-1}) centred at theta = pi/2.
    return fd_curvature_from_samples(n, spacing, [&](std::span<const int> off) {
        const double phi = metric.profile.phi[i + off[0]];
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        g(0, 0) = 1.0;
        double w = phi * phi;
        for (int a = 1; a < n; ++a) {
            g(a, a) = w;
            const double s = std::sin(0.5 * kPi + off[a] * h);
            w *= s * s;
        }
        return g;
    });
}

double boundary_second_fundamental_form(const MetricField& metric) {
    const GridChart& c = metric.chart;
    if (metric.is_warped()) {
        const auto& p = metric.profile;
        const int N = c.shape[0];
        double tau = 0.0;
        if (!p.pole_at_start) tau = std::max(tau, std::abs(p.dphi[0] / p.phi[0]));
        if (!p.pole_at_end) tau = std::max(tau, std::abs(p.dphi[N - 1] / p.phi[N - 1]));
        return tau;
    }
    if (c.backend != Backend::slab) return 0.0;
    const int b = c.boundary_axis;
    const int N = c.shape[b];
    const double h = c.spacing[b];
    double worst = 0.0;
    for (std::size_t node = 0; node < c.node_count(); ++node) {
        auto idx = c.multi_index(node);
        if (idx[b] != 0 && idx[b] != N - 1) continue;
        const int dir = idx[b] == 0 ? 1 : -1;
        auto i1 = idx, i2 = idx;
        i1[b] += dir;
        i2[b] += 2 * dir;
        const Eigen::MatrixXd dn =
            dir * (-3.0 * metric.g[node] + 4.0 * metric.sample(i1) - metric.sample(i2)) / (2.0 * h);
        for (int a = 0; a < c.n; ++a)
            for (int e = 0; e < c.n; ++e)
                if (a != b && e != b) worst = std::max(worst, std::abs(0.5 * dn(a, e)));
    }
    return worst;
}

// ---- doubling ----------------------------------------------------------------

double neumann_violation(const GridChart& c, std::span<const double> u) {
    if (u.size() != c.node_count()) throw ArgumentError("field size does not match chart");
    if (c.backend == Backend::torus) return 0.0;
    const int b = c.backend == Backend::slab ? c.boundary_axis : 0;
    const int N = c.shape[b];
    const double h = c.spacing[b];
    double worst = 0.0;
    for (std::size_t node = 0; node < c.node_count(); ++node) {
        auto idx = c.multi_index(node);
        const bool lo = idx[b] == 0, hi = idx[b] == N - 1;
        if (!lo && !hi) continue;
        // warped: only a non-pole end is a boundary
        if (c.backend == Backend::warped && lo && c.r_min == 0.0) continue;
        const int dir = lo ? 1 : -1;
        auto i1 = idx, i2 = idx;
        i1[b] += dir;
        i2[b] += 2 * dir;
        const double d = (-3.0 * u[node] + 4.0 * u[c.linear_index(i1)] - u[c.linear_index(i2)]) / (2.0 * h);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

DoubledField double_field(const GridChart& c, std::span<const double> u, double tolerance) {
    if (c.backend == Backend::torus) throw ArgumentError("a torus has no boundary to double across");
    const double viol = neumann_violation(c, u);
    if (viol > tolerance) {
        std::ostringstream os;
        os << "field violates the Neumann condition: max |du/dnu| = " << viol << " > " << tolerance;
        throw PreconditionError(os.str());
    }
    DoubledField out;
    out.chart = c;
    const int b = c.backend == Backend::slab ? c.boundary_axis : 0;
    const int N = c.shape[b];
    out.chart.shape[b] = 2 * (N - 1) + (c.backend == Backend::warped ? 1 : 0);
    if (c.backend == Backend::slab) {
        out.chart.backend = Backend::torus;
        out.chart.boundary_axis = -1;
    } else {
        out.chart.r_max = 2.0 * c.r_max - c.r_min;
    }
    out.values.resize(out.chart.node_count());
    for (std::size_t node = 0; node < out.values.size(); ++node) {
        auto idx = out.chart.multi_index(node);
        if (idx[b] > N - 1) idx[b] = 2 * (N - 1) - idx[b];
        out.values[node] = u[c.linear_index(idx)];
    }
    return out;
}

MetricField double_metric(const MetricField& m) {
    const GridChart& c = m.chart;
    if (c.backend == Backend::torus) throw ArgumentError("a torus has no boundary to double across");
    std::vector<double> dummy(c.node_count(), 0.0);
    MetricField out;
    out.recipe = m.recipe;
    out.chart = double_field(c, dummy).chart;
    if (m.is_warped()) {
        if (m.profile.pole_at_end) throw ArgumentError("warped chart ends in a pole; nothing to double across");
        const int N = c.shape[0];
        const int M = out.chart.shape[0];
        auto& p = out.profile;
        p.pole_at_start = m.profile.pole_at_start;
        p.pole_at_end = m.profile.pole_at_start;
        p.phi.resize(M);
        p.dphi.resize(M);
        p.ddphi.resize(M);
        p.dddphi.resize(M);
        for (int j = 0; j < M; ++j) {
            const bool mirrored = j > N - 1;
            const int src = mirrored ? 2 * (N - 1) - j : j;
            const double sgn = mirrored ? -1.0 : 1.0;
            p.phi[j] = m.profile.phi[src];
            p.dphi[j] = sgn * m.profile.dphi[src];
            p.ddphi[j] = m.profile.ddphi[src];
            p.dddphi[j] = sgn * m.profile.dddphi[src];
        }
        return out;
    }
    out.g.resize(out.chart.node_count());
    for (std::size_t node = 0; node < out.g.size(); ++node) {
        // indices past the far face reflect with tensor parity
        out.g[node] = m.sample(out.chart.multi_index(node));
    }
    return out;
}

double chart_distance(const GridChart& c, std::size_t a, std::size_t b) {
    const auto ia = c.multi_index(a), ib = c.multi_index(b);
    double d2 = 0.0;
    for (int ax = 0; ax < c.axes(); ++ax) {
        double d = std::abs(ia[ax] - ib[ax]) * c.spacing[ax];
        if (c.periodic(ax)) {
            d = std::min(d, c.length(ax) - d);
        } else if (c.backend == Backend::slab) {
            // distance on the doubled chart: the mirror image across either face
            const double xa = c.coordinate(ax, ia[ax]), xb = c.coordinate(ax, ib[ax]);
            const double L = c.length(ax);
            d = std::min({d, xa + xb, 2.0 * L - xa - xb});
        }
        d2 += d * d;
    }
    return std::sqrt(d2);
}

double sphere_area(int m) {
    const double d = m + 1.0;
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace schouten
