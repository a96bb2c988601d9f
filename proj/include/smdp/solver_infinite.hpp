#pragma once

#include "smdp/bellman.hpp"
#include "smdp/utility.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace smdp {

class NonConvergenceError : public std::runtime_error {
  public:
    NonConvergenceError(const std::string& msg, double gap, double bound, int n_iters)
        : std::runtime_error(msg), gap(gap), bound(bound), n_iters(n_iters) {}
    double gap;
    double bound;
    int n_iters;
};

struct IterationRecord {
    int n;
    double gap;   // max node-wise (upper - lower)
    double bound; // max node-wise analytic envelope at this n
};

/// Discretization error budget reported alongside solver output.
///   clamp  - pinch of the value bracket at the w_min slice; queries below
///            w_min are clamped there, so no table can resolve values finer
///   interp - bilinear interpolation error estimate from second differences
///            of the computed table, amplified by the one-jump discount of
///            the quadrature kernel to account for accumulation across sweeps
struct GridBudget {
    double interp = 0;
    double clamp = 0;
    double total() const { return interp + clamp; }
};

/// Bracket pinch at the clamp slice: max over lambda nodes of
/// U(lambda + w_min c_bar/alpha) - U(lambda). Sandwich gaps cannot shrink
/// below this, so solvers stop at tol + clamp floor and report both.
double clamp_gap_floor(const Utility& utility, const SmdpModel& model, const AugGrid& grid);

GridBudget estimate_grid_budget(const ValueTable& table, const Utility& utility,
                                const SmdpModel& model, const QuadratureRule& quad);

/// Geometric error envelope for the n-jump approximation of the infinite
/// horizon value, with e^{-alpha t} carried as w and decay base
/// rho = 1 - eps + eps e^{-alpha delta}:
///   concave (and linear):  U'_-(lambda) . w c_bar/alpha . rho^n
///   convex:                U'_+(w c_bar/alpha + lambda) . w c_bar/alpha . rho^n
double error_bound(const Utility& utility, const SmdpModel& model,
                   const Assumption1Certificate& cert, int n, double w, double lam);

struct SandwichResult {
    ValueTable lower;  // T^n applied to U(lambda)
    ValueTable upper;  // T^n applied to U(w c_bar/alpha + lambda)
    ValueTable bound;  // analytic envelope at the final n, per node
    PolicyTable policy; // argmin of the final lower table
    int n_iters = 0;
    double gap = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
    GridBudget budget;

    double lower_at_origin(int i) const { return lower.at(i, 0, 0); }
    double upper_at_origin(int i) const { return upper.at(i, 0, 0); }
    /// J_inf(i) estimate: sandwich midpoint at (w = 1, lambda = 0).
    double j_value(int i) const { return 0.5 * (lower_at_origin(i) + upper_at_origin(i)); }
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Sandwich value iteration from both envelopes; stops once the max node
/// gap falls to tol + clamp floor (the floor is unavoidable on a clamped
/// grid) or throws NonConvergenceError after max_iter sweeps.
SandwichResult solve_infinite(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                              const QuadratureRule& quad, const Assumption1Certificate& cert,
                              double tol, int max_iter, int threads = 1,
                              const IterationCallback& on_iteration = {});

/// Fixed-point value of a stationary policy by sandwich iteration of the
/// policy operator; returns the midpoint table (and the final gap via
/// out_gap when given).
ValueTable evaluate_stationary(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                               const QuadratureRule& quad, const PolicyTable& f, double tol,
                               int max_iter, int threads = 1, double* out_gap = nullptr);

struct ImprovedPolicy {
    PolicyTable policy;
    bool improved = false;
    ValueTable value; // V_f of the input policy
};

/// One policy-improvement round: at nodes where some action beats V_f by
/// more than `margin` (default 10 tol, guarding against discretization
/// chatter), switch to the minimizing action.
ImprovedPolicy improve_policy(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                              const QuadratureRule& quad, const PolicyTable& f, double tol,
                              int max_iter, int threads = 1, double margin = -1);

} // namespace smdp
