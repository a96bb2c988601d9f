#pragma once

#include "smdp/bellman.hpp"
#include "smdp/solver_infinite.hpp"

#include <vector>

namespace smdp {

/// Reduced value table for exponential utility U(x) = (1/gamma) e^{gamma x}:
/// the accumulated-cost coordinate drops and the full value function splits
/// as V(w, i, lambda) = e^{gamma lambda} h(w, i).
///
/// When log_scale is set the entries store ln|h| instead of h (used when
/// |gamma| c_bar/alpha is large enough that e^{gamma lambda} factors would
/// overflow); h() decodes either way.
struct HTable {
    std::vector<double> w_nodes;
    std::vector<double> log_w;
    int n_states = 0;
    double gamma = 0;
    bool log_scale = false;
    std::vector<double> values; // (state, w), w fastest

    double& at(int i, int wi) { return values[static_cast<std::size_t>(i) * w_nodes.size() + wi]; }
    double at(int i, int wi) const { return values[static_cast<std::size_t>(i) * w_nodes.size() + wi]; }
    double h(int i, int wi) const;
};

/// Stationary policy on (state, w) alone; under exponential utility the
/// optimal action does not depend on the accumulated cost.
struct WPolicy {
    std::vector<double> w_nodes;
    int n_states = 0;
    std::vector<int> choice;

    int& at(int i, int wi) { return choice[static_cast<std::size_t>(i) * w_nodes.size() + wi]; }
    int at(int i, int wi) const { return choice[static_cast<std::size_t>(i) * w_nodes.size() + wi]; }
};

struct ExponentialOptions {
    double tol = 1e-4;
    int max_iter = 10000;
    int threads = 1;
    /// switch to log-domain iteration when |gamma| c_bar/alpha exceeds this
    double log_domain_threshold = 30.0;
    /// cap on exponent arguments in the plain path; capped terms are counted
    double exp_cap = 700.0;
};

/// One application of the reduced operator:
///   h'(w, i) = min_a sum_j P(j|i,a) mean_m
///              e^{gamma (C(i,a)/alpha) w (1 - e^{-alpha s_m})} h(w e^{-alpha s_m}, j)
/// with 1-D interpolation in log w. capped_terms, when given, counts
/// exponent arguments hitting the overflow cap.
HTable h_step(const HTable& h, const SmdpModel& model, const QuadratureRule& quad,
              int threads = 1, double exp_cap = 700.0, long* capped_terms = nullptr);

struct ExponentialResult {
    HTable h;     // midpoint of the final envelopes
    HTable lower; // iterate started from pointwise-min envelope
    HTable upper;
    WPolicy policy;
    int n_iters = 0;
    double gap = 0; // absolute in h units, relative in log-domain mode
    bool converged = false;
    bool log_domain = false;
    long capped_terms = 0;
    std::vector<IterationRecord> history;

    /// J_inf(i) = h at (i, w = 1).
    double j_value(int i) const { return h.h(i, 0); }
};

/// Sandwich iteration of the reduced operator between the envelopes
/// h = 1/gamma and h = (1/gamma) e^{gamma w c_bar/alpha} (bracketed
/// pointwise by min/max, so both signs of gamma are covered).
ExponentialResult solve_exponential(const SmdpModel& model, double gamma, const AugGrid& grid,
                                    const QuadratureRule& quad, const Assumption1Certificate& cert,
                                    const ExponentialOptions& options = {});

/// Expands a (state, w) policy over a full augmented grid, replicating the
/// choice across lambda nodes.
PolicyTable broadcast_policy(const WPolicy& policy, const AugGrid& grid);

/// Max node-wise |V(i,w,lambda) - e^{gamma lambda} h(i,w)| between a general
/// solver table and a reduced table on matching grids.
double splitting_residual(const ValueTable& v, const HTable& h);

} // namespace smdp
