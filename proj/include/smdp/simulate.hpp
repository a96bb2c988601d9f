#pragma once

#include "smdp/bellman.hpp"
#include "smdp/utility.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace smdp {

/// One controlled trajectory up to the N-th jump. accum_cost[n] is the
/// discounted cost accumulated on [0, T_n]; increments follow
///   C_{n+1} - C_n = e^{-alpha T_n} (C(X_n, A_n)/alpha)(1 - e^{-alpha (T_{n+1}-T_n)}).
struct TrajectorySample {
    std::vector<double> jump_times; // T_0 = 0 .. T_N
    std::vector<int> states;        // X_0 .. X_N
    std::vector<int> actions;       // A_0 .. A_{N-1}
    std::vector<double> accum_cost; // C_0 = 0 .. C_N
};

/// Nearest grid node to an off-grid query, w compared in log scale.
std::pair<int, int> nearest_node(const AugGrid& grid, double w, double lam);

/// Draws a trajectory by inverse-CDF sampling with a per-trajectory random
/// stream derived from (seed, traj_index); identical arguments reproduce
/// the trajectory exactly. policy_seq holds either a single stationary
/// table or one table per jump (decision order); actions are read by
/// nearest-node lookup at (e^{-alpha T_n}, C_n).
TrajectorySample sample_trajectory(const SmdpModel& model, std::span<const PolicyTable> policy_seq,
                                   int initial_state, int n_jumps, std::uint64_t seed,
                                   std::uint64_t traj_index = 0);

struct ValueEstimate {
    double mean = 0; // sample mean of U(C_N)
    double se = 0;
    double ci_lo = 0, ci_hi = 0; // 95% normal-approximation interval
    // infinite-horizon bracket: C_inf of any continuation lies pathwise in
    // [C_N, C_N + e^{-alpha T_N} c_bar/alpha], so E[U(C_inf)] lies between
    // these two sample means (up to their own Monte Carlo error)
    double bracket_lo = 0, bracket_hi = 0;
    double bracket_lo_se = 0, bracket_hi_se = 0;
    int n_jumps = 0;
    long n_traj = 0;

    /// Widest interval consistent with the estimate: CI united with the
    /// bracket means extended by their own 95% margins.
    double outer_lo() const;
    double outer_hi() const;
};

/// Monte Carlo estimate of E[U(C_N)] (finite mode) or a bracket on
/// E[U(C_inf)] (infinite mode, truncated at n_jumps). Trajectories are
/// independent work items; aggregation uses pairwise summation over the
/// trajectory-indexed buffer, so results do not depend on thread count.
ValueEstimate estimate_value(const SmdpModel& model, const Utility& utility,
                             std::span<const PolicyTable> policy_seq, int initial_state,
                             int n_jumps, bool infinite_bracket, long n_traj, std::uint64_t seed,
                             int threads = 1);

/// Smallest N whose analytic truncation envelope falls below tol; used to
/// pick the default truncation depth for infinite-mode estimation.
int default_truncation_depth(const Utility& utility, const SmdpModel& model,
                             const Assumption1Certificate& cert, double tol, int max_depth = 100000);

} // namespace smdp
