#pragma once

#include "schouten/conformal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace schouten {

struct SolverOptions {
    double newton_tol = 1e-9;
    int max_newton_iters = 30;
    double safeguard_margin = 1e-8;
    double min_step_fraction = 1.0 / 1024.0;  // smallest line-search damping
    double dt_initial = 0.05;
    double dt_min = 1e-4;
    double dt_max = 0.1;
    double shrink = 0.5;
    double grow = 1.5;
    int easy_iters = 3;
    double blowup_threshold = -12.0;
    int max_steps = 5000;
    bool secant_predictor = true;
};

struct NewtonStats {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // max-norm before each iteration and at exit
    bool cone_boundary = false;            // every damped trial left the admissible set
    std::string failure;
};

struct NewtonResult {
    std::vector<double> u;
    NewtonStats stats;
};

/// Damped Newton on the discrete residual at fixed t, with backtracking on the
/// max-norm and rejection of trial iterates whose admissibility margin drops
/// below the safeguard. Throws PreconditionError if u0 is not admissible.
NewtonResult newton_solve(std::vector<double> u0, double t, const Problem& problem, const SolverOptions& opts = {});

struct ContinuationState {
    double t = 0.0;
    double residual_max = 0.0;
    double residual_l2 = 0.0;
    int newton_iters = 0;
    double margin = 0.0;
    std::size_t margin_node = 0;
    double integral_value = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double dt = 0.0;
    std::vector<double> u;
};

enum class OutcomeKind { converged_t1, blowup_detected, step_failure };

std::string to_string(OutcomeKind k);

struct RunOutcome {
    OutcomeKind kind = OutcomeKind::step_failure;
    ContinuationState final_state;
    std::vector<ContinuationState> history;
    std::string message;
};

/// Summary of an accepted state at parameter t.
ContinuationState summarize(const std::vector<double>& u, double t, const Problem& problem, int iters, double dt);

/// Follows the deformation from (t = 0, u = 0) to t = 1 with secant
/// prediction, Newton correction and adaptive steps.
RunOutcome run_path(const Problem& problem, const SolverOptions& opts = {});

struct T0Trial {
    double initial_inf_norm = 0.0;
    double final_inf_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct T0Report {
    double max_residual = 0.0;  // of u = 0 at t = 0
    std::vector<T0Trial> trials;
};

/// Exactness of u = 0 at t = 0, plus Newton runs from smooth random
/// perturbations of amplitude `amplitude` (numerical local uniqueness).
T0Report verify_t0(const Problem& problem, int trials, double amplitude, std::uint64_t seed,
                   const SolverOptions& opts = {});

/// Smooth random field satisfying the even-reflection boundary symmetry of
/// the chart, scaled to the given max-norm.
std::vector<double> smooth_random_field(const GridChart& chart, double amplitude, int modes, std::uint64_t seed);

struct MonitorReport {
    double constant = 0.0;  // max ratio over centres, radii and points
    std::size_t center = 0;
    std::size_t point = 0;
    double radius = 0.0;
    std::vector<double> radii;
    std::vector<double> per_radius;  // max ratio for each radius
};

/// Empirical constant of the local estimate
///   (|nabla^2 u| + |nabla u|^2)(x') <= C (r^{-2} + exp(-2 inf_{B(x, 2 sqrt(10) r)} u)),  x' in B(x, r).
MonitorReport estimate_monitor(std::span<const double> u, const Problem& problem,
                               std::vector<double> radii = {0.05, 0.1, 0.2, 0.4}, int center_stride = 0);

}  // namespace schouten
