#include "schouten/conformal.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace schouten {

// ---- stencils -------------------------------------------------------------------

void Stencil::add(std::size_t index, double coef) {
    for (auto& [i, c] : terms)
        if (i == index) {
            c += coef;
            return;
        }
    terms.emplace_back(index, coef);
}

Stencil& Stencil::operator+=(const Stencil& other) {
    for (const auto& [i, c] : other.terms) add(i, c);
    return *this;
}

Stencil Stencil::scaled(double c) const {
    Stencil s = *this;
    for (auto& t : s.terms) t.second *= c;
    return s;
}

namespace {

std::size_t neighbour(const GridChart& c, std::vector<int> idx, int axis_a, int da, int axis_b = -1, int db = 0) {
    idx[axis_a] += da;
    if (axis_b >= 0) idx[axis_b] += db;
    bool flipped = false;
    for (int a = 0; a < c.axes(); ++a) idx[a] = c.resolve(a, idx[a], flipped);
    return c.linear_index(idx);
}

}  // namespace

Discretization::Discretization(const MetricField& metric, const CurvatureBundle& curv) : n_(metric.chart.n) {
    const GridChart& c = metric.chart;
    const std::size_t N = c.node_count();
    const int n = n_;
    g_.resize(N);
    ginv_.resize(N);
    A_ = curv.schouten;
    grad_.assign(N, std::vector<Stencil>(n));
    hess_.assign(N, std::vector<Stencil>(n * n));
    weights_.assign(N, 0.0);

    if (metric.is_warped()) {
        const double h = c.spacing[0];
        const auto& p = metric.profile;
        const double area = sphere_area(n - 1);
        const int M = c.shape[0];
        for (std::size_t node = 0; node < N; ++node) {
            g_[node] = Eigen::MatrixXd::Identity(n, n);
            ginv_[node] = g_[node];
            const std::vector<int> idx{static_cast<int>(node)};
            const std::size_t up = neighbour(c, idx, 0, 1), dn = neighbour(c, idx, 0, -1);
            Stencil d1, d2;
            d1.add(up, 0.5 / h);
            d1.add(dn, -0.5 / h);
            d2.add(up, 1.0 / (h * h));
            d2.add(node, -2.0 / (h * h));
            d2.add(dn, 1.0 / (h * h));
            grad_[node][0] = d1;
            hess_[node][0] = d2;
            // tangential Hessian (phi'/phi) u', which tends to u'' at a pole
            const Stencil tang = metric.is_pole(node) ? d2 : d1.scaled(p.dphi[node] / p.phi[node]);
            for (int a = 1; a < n; ++a) hess_[node][a * n + a] = tang;
            const double trap = (node == 0 || static_cast<int>(node) == M - 1) ? 0.5 * h : h;
            weights_[node] = trap * std::pow(p.phi[node], n - 1) * area;
        }
    } else {
        double cell = 1.0;
        for (double h : c.spacing) cell *= h;
        for (std::size_t node = 0; node < N; ++node) {
            g_[node] = metric.g[node];
            ginv_[node] = g_[node].llt().solve(Eigen::MatrixXd::Identity(n, n));
            const auto idx = c.multi_index(node);
            std::vector<Stencil> d1(n);
            for (int k = 0; k < n; ++k) {
                const double h = c.spacing[k];
                d1[k].add(neighbour(c, idx, k, 1), 0.5 / h);
                d1[k].add(neighbour(c, idx, k, -1), -0.5 / h);
            }
            grad_[node] = d1;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    Stencil s;
                    if (i == j) {
                        const double h2 = c.spacing[i] * c.spacing[i];
                        s.add(neighbour(c, idx, i, 1), 1.0 / h2);
                        s.add(node, -2.0 / h2);
                        s.add(neighbour(c, idx, i, -1), 1.0 / h2);
                    } else {
                        const double q = 1.0 / (4.0 * c.spacing[i] * c.spacing[j]);
                        s.add(neighbour(c, idx, i, 1, j, 1), q);
                        s.add(neighbour(c, idx, i, 1, j, -1), -q);
                        s.add(neighbour(c, idx, i, -1, j, 1), -q);
                        s.add(neighbour(c, idx, i, -1, j, -1), q);
                    }
                    for (int k = 0; k < n; ++k) {
                        const double G = curv.gamma(node, k, i, j);
                        if (G != 0.0) s += d1[k].scaled(-G);
                    }
                    hess_[node][i * n + j] = s;
                    hess_[node][j * n + i] = s;
                }
            double w = cell * std::sqrt(g_[node].determinant());
            if (c.backend == Backend::slab) {
                const int b = c.boundary_axis;
                if (idx[b] == 0 || idx[b] == c.shape[b] - 1) w *= 0.5;
            }
            weights_[node] = w;
        }
    }
    volume_ = 0.0;
    for (double w : weights_) volume_ += w;
}

double varsigma(const Discretization& disc, const SymFuncSpec& F) {
    const int n = disc.n();
    return std::pow(disc.volume(), 2.0 / (n + 1)) / (n * F.rho);
}

Problem make_problem(MetricField metric, const SymFuncSpec& F, std::vector<double> f, PsiSchedule psi) {
    if (F.n != metric.chart.n) throw ArgumentError("curvature function dimension differs from the manifold's");
    if (f.size() != metric.chart.node_count()) throw ArgumentError("f must have one value per node");
    for (double v : f)
        if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("prescribed f must be positive everywhere");
    Problem p;
    p.curvature = curvature(metric);
    p.metric = std::move(metric);
    p.disc = std::make_shared<const Discretization>(p.metric, p.curvature);
    p.F = F;
    p.f = std::move(f);
    p.varsigma = varsigma(*p.disc, F);
    p.psi = psi;
    return p;
}

// ---- pointwise algebra ---------------------------------------------------------------

namespace {

struct NodeTensor {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    Eigen::MatrixXd B;
};

// c_g g + c_A A + hess + du (x) du - |du|^2 g / 2
NodeTensor node_tensor(const Discretization& d, std::size_t node, std::span<const double> u, double c_g,
                       double c_A) {
    const int n = d.n();
    NodeTensor t;
    t.grad.resize(n);
    for (int i = 0; i < n; ++i) t.grad[i] = d.gradient(node, i).apply(u);
    t.hess.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) t.hess(i, j) = t.hess(j, i) = d.hessian(node, i, j).apply(u);
    const Eigen::MatrixXd& g = d.g(node);
    const double grad2 = t.grad.dot(d.g_inv(node) * t.grad);
    t.B = t.hess + t.grad * t.grad.transpose() + (c_g - 0.5 * grad2) * g;
    if (c_A != 0.0) t.B += c_A * d.schouten(node);
    return t;
}

struct Spectral {
    EigenTuple lam;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd Linv;
};

Spectral spectral(const Eigen::MatrixXd& g, const Eigen::MatrixXd& B, bool vectors) {
    const int n = static_cast<int>(g.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw DegenerateMetricError(0, "metric is not positive definite");
    Spectral s;
    s.Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd M = s.Linv * B * s.Linv.transpose();
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    s.lam = es.eigenvalues();
    if (vectors) s.Q = es.eigenvectors();
    return s;
}

double ricci_min(const EigenTuple& lam) {
    const double n = static_cast<double>(lam.size());
    return lam.minCoeff() + lam.sum() / (n - 2.0);
}

void note_margin(AdmissibilityReport& r, std::size_t node, double margin, bool& first) {
    if (first || margin < r.worst_margin) {
        r.worst_margin = margin;
        r.worst_node = node;
        first = false;
    }
}

AdmissibilityReport scan(std::span<const double> u, const Problem& p, const ConeSpec& cone, double c_g,
                         double c_A, double ricci_tolerance) {
    AdmissibilityReport r;
    bool first = true;
    bool first_ric = true;
    const Discretization& d = *p.disc;
    for (std::size_t node = 0; node < d.node_count(); ++node) {
        const NodeTensor t = node_tensor(d, node, u, c_g, c_A);
        const EigenTuple lam = spectral(d.g(node), t.B, false).lam;
        note_margin(r, node, cone_margin(lam, cone), first);
        const double rm = ricci_min(lam);
        if (first_ric || rm < r.worst_ricci_eigenvalue) {
            r.worst_ricci_eigenvalue = rm;
            r.worst_ricci_node = node;
            first_ric = false;
        }
    }
    r.all_admissible = r.worst_margin > 0.0;
    r.ricci_inequality = r.worst_ricci_eigenvalue >= -ricci_tolerance;
    return r;
}

}  // namespace

EigenTuple eigen_pointwise(const Eigen::MatrixXd& g, const Eigen::MatrixXd& W) {
    return spectral(g, W, false).lam;
}

Eigen::MatrixXd f_coefficients(const SymFuncSpec& F, const Eigen::MatrixXd& g, const Eigen::MatrixXd& B) {
    const Spectral s = spectral(g, B, true);
    const EigenTuple dF = f_gradient(F, s.lam);
    const Eigen::MatrixXd QL = s.Q.transpose() * s.Linv;
    Eigen::MatrixXd C = QL.transpose() * dF.asDiagonal() * QL;
    return 0.5 * (C + C.transpose());
}

ConformalState assemble_w(std::span<const double> u, const Discretization& d, double neumann_tolerance,
                          const GridChart& chart) {
    if (u.size() != d.node_count()) throw ArgumentError("field size does not match chart");
    if (neumann_tolerance > 0.0) {
        const double v = neumann_violation(chart, u);
        if (v > neumann_tolerance) {
            std::ostringstream os;
            os << "field violates the Neumann condition: max |du/dnu| = " << v;
            throw PreconditionError(os.str());
        }
    }
    ConformalState s;
    s.u.assign(u.begin(), u.end());
    s.grad.resize(u.size());
    s.hess.resize(u.size());
    s.W.resize(u.size());
    for (std::size_t node = 0; node < u.size(); ++node) {
        NodeTensor t = node_tensor(d, node, u, 0.0, 1.0);
        s.grad[node] = std::move(t.grad);
        s.hess[node] = std::move(t.hess);
        s.W[node] = std::move(t.B);
    }
    return s;
}

ConformalState assemble_w(std::span<const double> u, const Problem& problem, double neumann_tolerance) {
    return assemble_w(u, *problem.disc, neumann_tolerance, problem.metric.chart);
}

AdmissibilityReport admissibility(std::span<const double> u, const Problem& problem, const ConeSpec& cone,
                                  double ricci_tolerance) {
    return scan(u, problem, cone, 0.0, 1.0, ricci_tolerance);
}

AdmissibilityReport admissibility_at(std::span<const double> u, double t, const Problem& problem,
                                     const ConeSpec& cone, double ricci_tolerance) {
    const double ps = problem.psi(t);
    return scan(u, problem, cone, problem.varsigma * (1.0 - ps), ps, ricci_tolerance);
}

double nonlocal_integral(std::span<const double> u, const Discretization& d) {
    const int n = d.n();
    const auto w = d.weights();
    double J = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) J += w[i] * std::exp(-(n + 1.0) * u[i]);
    return std::pow(J, 2.0 / (n + 1));
}

bool try_residual(std::span<const double> u, double t, const Problem& p, double margin, std::vector<double>& out,
                  AdmissibilityReport& report) {
    const Discretization& d = *p.disc;
    if (u.size() != d.node_count()) throw ArgumentError("field size does not match chart");
    const double ps = p.psi(t);
    const double c_g = p.varsigma * (1.0 - ps);
    const double nonlocal = (1.0 - t) == 0.0 ? 0.0 : (1.0 - t) * nonlocal_integral(u, d);
    const ConeSpec cone = p.F.cone();
    out.assign(u.size(), 0.0);
    report = AdmissibilityReport{};
    bool first = true;
    for (std::size_t node = 0; node < u.size(); ++node) {
        const NodeTensor nt = node_tensor(d, node, u, c_g, ps);
        const EigenTuple lam = spectral(d.g(node), nt.B, false).lam;
        const double m = cone_margin(lam, cone);
        note_margin(report, node, m, first);
        if (!(m > margin) || !cone_contains(lam, cone)) {
            out[node] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        out[node] = f_eval(p.F, lam) - ps * p.f[node] * std::exp(-2.0 * u[node]) - nonlocal;
    }
    report.all_admissible = report.worst_margin > margin;
    return report.all_admissible;
}

std::vector<double> residual(std::span<const double> u, double t, const Problem& problem) {
    std::vector<double> out;
    AdmissibilityReport rep;
    if (!try_residual(u, t, problem, 0.0, out, rep)) {
        std::ostringstream os;
        os << "augmented tensor leaves the cone at node " << rep.worst_node << " (margin " << rep.worst_margin
           << ")";
        throw InadmissibleError(os.str(), rep);
    }
    return out;
}

// ---- linearization -------------------------------------------------------------------

LinearOperator linearize(std::span<const double> u, double t, const Problem& p) {
    const Discretization& d = *p.disc;
    const std::size_t N = d.node_count();
    const int n = d.n();
    if (u.size() != N) throw ArgumentError("field size does not match chart");
    const double ps = p.psi(t);
    const double c_g = p.varsigma * (1.0 - ps);
    const ConeSpec cone = p.F.cone();

    LinearOperator op;
    op.coefficients.resize(N);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(N * (n == 3 ? 27 : 81));
    Stencil row;
    for (std::size_t node = 0; node < N; ++node) {
        const NodeTensor nt = node_tensor(d, node, u, c_g, ps);
        const Spectral sp = spectral(d.g(node), nt.B, true);
        if (!cone_contains(sp.lam, cone)) {
            AdmissibilityReport rep = admissibility_at(u, t, p, cone);
            std::ostringstream os;
            os << "cannot linearize: node " << node << " is not admissible";
            throw InadmissibleError(os.str(), rep);
        }
        const EigenTuple dF = f_gradient(p.F, sp.lam);
        const Eigen::MatrixXd QL = sp.Q.transpose() * sp.Linv;
        Eigen::MatrixXd C = QL.transpose() * dF.asDiagonal() * QL;
        C = 0.5 * (C + C.transpose());
        op.coefficients[node] = C;

        // d B_ij = dH_ij + du_i dv_j + dv_i du_j - (g^{kl} du_k dv_l) g_ij
        const Eigen::MatrixXd& g = d.g(node);
        const Eigen::VectorXd first = 2.0 * C * nt.grad - C.cwiseProduct(g).sum() * (d.g_inv(node) * nt.grad);
        row.terms.clear();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (C(i, j) != 0.0)
                    for (const auto& [m, c] : d.hessian(node, i, j).terms) row.add(m, C(i, j) * c);
        for (int l = 0; l < n; ++l)
            if (first[l] != 0.0)
                for (const auto& [m, c] : d.gradient(node, l).terms) row.add(m, first[l] * c);
        row.add(node, 2.0 * ps * p.f[node] * std::exp(-2.0 * u[node]));
        for (const auto& [m, c] : row.terms) trip.emplace_back(static_cast<int>(node), static_cast<int>(m), c);
    }
    op.local.resize(static_cast<int>(N), static_cast<int>(N));
    op.local.setFromTriplets(trip.begin(), trip.end());
    op.local.makeCompressed();

    // -(1-t) d/du (J^{2/(n+1)}),  J = sum w e^{-(n+1)u}
    const auto w = d.weights();
    op.b.resize(N);
    double J = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        op.b[i] = w[i] * std::exp(-(n + 1.0) * u[i]);
        J += op.b[i];
    }
    const double scale = 2.0 * (1.0 - t) * std::pow(J, (1.0 - n) / (n + 1.0));
    op.a = Eigen::VectorXd::Constant(N, scale);
    return op;
}

Eigen::VectorXd LinearOperator::apply(const Eigen::VectorXd& v) const { return local * v + a * b.dot(v); }

Eigen::MatrixXd LinearOperator::dense() const {
    return Eigen::MatrixXd(local) + a * b.transpose();
}

Eigen::VectorXd LinearOperator::solve(const Eigen::VectorXd& rhs) const {
    const int N = static_cast<int>(local.rows());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(local.nonZeros() + 2 * N + 1);
    for (int k = 0; k < local.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(local, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < N; ++i) {
        if (a[i] != 0.0) trip.emplace_back(i, N, a[i]);
        if (b[i] != 0.0) trip.emplace_back(N, i, b[i]);
    }
    trip.emplace_back(N, N, -1.0);
    Eigen::SparseMatrix<double> K(N + 1, N + 1);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw std::runtime_error("Jacobian factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd ext = Eigen::VectorXd::Zero(N + 1);
    ext.head(N) = rhs;
    const Eigen::VectorXd x = lu.solve(ext);
    if (lu.info() != Eigen::Success) throw std::runtime_error("Jacobian solve failed");
    return x.head(N);
}

}  // namespace schouten
