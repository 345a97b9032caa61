#include "schouten/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace schouten {

namespace {

double max_abs(const std::vector<double>& r) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

double l2(const std::vector<double>& r, const Discretization& d) {
    const auto w = d.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += w[i] * r[i] * r[i];
    return std::sqrt(s / d.volume());
}

}  // namespace

std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::converged_t1: return "converged_t1";
        case OutcomeKind::blowup_detected: return "blowup_detected";
        case OutcomeKind::step_failure: return "step_failure";
    }
    return "?";
}

NewtonResult newton_solve(std::vector<double> u, double t, const Problem& problem, const SolverOptions& opts) {
    NewtonResult res;
    std::vector<double> r;
    AdmissibilityReport rep;
    if (!try_residual(u, t, problem, opts.safeguard_margin, r, rep)) {
        std::ostringstream os;
        os << "Newton start is not admissible at t=" << t << ": margin " << rep.worst_margin << " at node "
           << rep.worst_node;
        throw PreconditionError(os.str());
    }
    const std::size_t N = u.size();
    double norm = max_abs(r);
    std::vector<double> trial(N), r_trial;
    for (int it = 0;; ++it) {
        res.stats.residual_history.push_back(norm);
        if (norm <= opts.newton_tol) {
            res.stats.converged = true;
            break;
        }
        if (it >= opts.max_newton_iters) {
            res.stats.failure = "Newton iteration limit reached";
            break;
        }
        const LinearOperator J = linearize(u, t, problem);
        Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(N));
        Eigen::VectorXd delta;
        try {
            delta = J.solve(rhs);
        } catch (const std::exception& e) {
            res.stats.failure = e.what();
            break;
        }
        if (!delta.allFinite()) {
            res.stats.failure = "non-finite Newton update";
            break;
        }
        bool accepted = false;
        bool any_admissible = false;
        for (double alpha = 1.0; alpha >= opts.min_step_fraction; alpha *= 0.5) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = u[i] + alpha * delta[i];
            if (!try_residual(trial, t, problem, opts.safeguard_margin, r_trial, rep)) continue;
            any_admissible = true;
            const double trial_norm = max_abs(r_trial);
            if (trial_norm < norm) {
                u.swap(trial);
                r.swap(r_trial);
                norm = trial_norm;
                accepted = true;
                break;
            }
        }
        res.stats.iterations = it + 1;
        if (!accepted) {
            res.stats.cone_boundary = !any_admissible;
            res.stats.failure = any_admissible ? "line search stalled"
                                               : "admissibility lost on every step size (cone boundary?)";
            res.stats.residual_history.push_back(norm);
            break;
        }
    }
    res.u = std::move(u);
    return res;
}

ContinuationState summarize(const std::vector<double>& u, double t, const Problem& problem, int iters, double dt) {
    ContinuationState s;
    s.t = t;
    std::vector<double> r;
    AdmissibilityReport rep;
    try_residual(u, t, problem, 0.0, r, rep);
    s.residual_max = max_abs(r);
    s.residual_l2 = l2(r, *problem.disc);
    s.newton_iters = iters;
    s.margin = rep.worst_margin;
    s.margin_node = rep.worst_node;
    s.integral_value = nonlocal_integral(u, *problem.disc);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    s.min_u = *lo;
    s.max_u = *hi;
    s.dt = dt;
    s.u = u;
    return s;
}

RunOutcome run_path(const Problem& problem, const SolverOptions& opts) {
    RunOutcome out;
    const std::size_t N = problem.size();
    std::vector<double> u(N, 0.0);
    double t = 0.0;

    NewtonResult start;
    try {
        start = newton_solve(u, 0.0, problem, opts);
    } catch (const PreconditionError& e) {
        out.kind = OutcomeKind::step_failure;
        out.message = e.what();
        return out;
    }
    if (!start.stats.converged) {
        out.kind = OutcomeKind::step_failure;
        out.message = "corrector failed at t=0: " + start.stats.failure;
        out.final_state = summarize(start.u, 0.0, problem, start.stats.iterations, 0.0);
        return out;
    }
    u = start.u;
    out.history.push_back(summarize(u, 0.0, problem, start.stats.iterations, 0.0));

    std::vector<double> u_prev;
    double t_prev = 0.0;
    double dt = opts.dt_initial;
    std::vector<double> pred(N), r;
    AdmissibilityReport rep;
    int steps = 0;
    std::string last_failure;

    while (t < 1.0) {
        if (++steps > opts.max_steps) {
            out.kind = OutcomeKind::step_failure;
            out.message = "step limit reached at t=" + std::to_string(t);
            break;
        }
        const double t_try = std::min(1.0, t + dt);
        pred = u;
        if (opts.secant_predictor && !u_prev.empty() && t > t_prev) {
            const double s = (t_try - t) / (t - t_prev);
            for (std::size_t i = 0; i < N; ++i) pred[i] = u[i] + s * (u[i] - u_prev[i]);
            if (!try_residual(pred, t_try, problem, opts.safeguard_margin, r, rep)) pred = u;
        }
        NewtonResult step;
        bool ok = false;
        try {
            step = newton_solve(pred, t_try, problem, opts);
            ok = step.stats.converged;
            if (!ok) last_failure = step.stats.failure;
        } catch (const PreconditionError& e) {
            last_failure = e.what();
        }
        if (ok) {
            u_prev = u;
            t_prev = t;
            u = std::move(step.u);
            t = t_try;
            out.history.push_back(summarize(u, t, problem, step.stats.iterations, dt));
            if (step.stats.iterations <= opts.easy_iters) dt = std::min(dt * opts.grow, opts.dt_max);
            continue;
        }
        dt *= opts.shrink;
        if (dt < opts.dt_min) {
            const double min_u = out.history.back().min_u;
            out.kind = min_u < opts.blowup_threshold ? OutcomeKind::blowup_detected : OutcomeKind::step_failure;
            std::ostringstream os;
            os << "step size fell below " << opts.dt_min << " at t=" << t << " (min u = " << min_u
               << "): " << last_failure;
            out.message = os.str();
            break;
        }
    }
    if (t >= 1.0) {
        out.kind = OutcomeKind::converged_t1;
        out.message = "reached t=1";
    }
    out.final_state = out.history.back();
    return out;
}

std::vector<double> smooth_random_field(const GridChart& c, double amplitude, int modes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> wave(0, 3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> u(c.node_count(), 0.0);
    for (int m = 0; m < modes; ++m) {
        std::vector<int> k(c.axes());
        std::vector<double> phase(c.axes());
        for (int a = 0; a < c.axes(); ++a) {
            k[a] = wave(rng);
            phase[a] = std::numbers::pi * unit(rng);
        }
        const double coef = unit(rng);
        for (std::size_t node = 0; node < u.size(); ++node) {
            const auto idx = c.multi_index(node);
            double v = coef;
            for (int a = 0; a < c.axes(); ++a) {
                const double x = c.coordinate(a, idx[a]) - (c.backend == Backend::warped ? c.r_min : 0.0);
                const double L = c.length(a);
                v *= c.periodic(a) ? std::cos(2.0 * std::numbers::pi * k[a] * x / L + phase[a])
                                   : std::cos(std::numbers::pi * k[a] * x / L);
            }
            u[node] += v;
        }
    }
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    if (m > 0.0)
        for (double& v : u) v *= amplitude / m;
    return u;
}

T0Report verify_t0(const Problem& problem, int trials, double amplitude, std::uint64_t seed,
                   const SolverOptions& opts) {
    T0Report rep;
    const std::vector<double> zero(problem.size(), 0.0);
    rep.max_residual = max_abs(residual(zero, 0.0, problem));
    for (int k = 0; k < trials; ++k) {
        T0Trial tr;
        auto u0 = smooth_random_field(problem.metric.chart, amplitude, 4, seed + static_cast<std::uint64_t>(k));
        tr.initial_inf_norm = max_abs(u0);
        try {
            const NewtonResult nr = newton_solve(u0, 0.0, problem, opts);
            tr.iterations = nr.stats.iterations;
            tr.converged = nr.stats.converged;
            tr.final_inf_norm = max_abs(nr.u);
        } catch (const PreconditionError&) {
            tr.converged = false;
            tr.final_inf_norm = tr.initial_inf_norm;
        }
        rep.trials.push_back(tr);
    }
    return rep;
}

MonitorReport estimate_monitor(std::span<const double> u, const Problem& problem, std::vector<double> radii,
                               int center_stride) {
    const GridChart& c = problem.metric.chart;
    const Discretization& d = *problem.disc;
    const ConformalState st = assemble_w(u, d, 0.0, c);
    const std::size_t N = u.size();
    std::vector<double> q(N);
    for (std::size_t i = 0; i < N; ++i) {
        const Eigen::MatrixXd& gi = d.g_inv(i);
        const Eigen::MatrixXd Hm = gi * st.hess[i];
        const double hess_norm = std::sqrt(std::max(0.0, (Hm * Hm.transpose()).trace()));
        q[i] = hess_norm + st.grad[i].dot(gi * st.grad[i]);
    }
    MonitorReport rep;
    rep.radii = radii;
    rep.per_radius.assign(radii.size(), 0.0);
    if (center_stride <= 0) center_stride = std::max(1, c.shape[0] / 32);
    const double expand = 2.0 * std::sqrt(10.0);
    for (std::size_t x = 0; x < N; ++x) {
        const auto idx = c.multi_index(x);
        bool on_lattice = true;
        for (int v : idx) on_lattice = on_lattice && (v % center_stride == 0);
        if (!on_lattice) continue;
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const double r = radii[k];
            double q_max = 0.0, inf_u = std::numeric_limits<double>::infinity();
            std::size_t arg = x;
            for (std::size_t y = 0; y < N; ++y) {
                const double dist = chart_distance(c, x, y);
                if (dist <= expand * r) inf_u = std::min(inf_u, u[y]);
                if (dist <= r && q[y] > q_max) {
                    q_max = q[y];
                    arg = y;
                }
            }
            const double ratio = q_max / (1.0 / (r * r) + std::exp(-2.0 * inf_u));
            rep.per_radius[k] = std::max(rep.per_radius[k], ratio);
            if (ratio > rep.constant) {
                rep.constant = ratio;
                rep.center = x;
                rep.point = arg;
                rep.radius = r;
            }
        }
    }
    return rep;
}

}  // namespace schouten
