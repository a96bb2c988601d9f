#include "smdp/simulate.hpp"

#include "smdp/parallel.hpp"
#include "smdp/solver_infinite.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace smdp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform draw in the open interval (0,1); mt19937_64 is fully specified by
// the standard and the mantissa construction avoids platform-dependent
// distribution implementations.
double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t traj_index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(traj_index + 1)));
}

int sample_destination(const std::vector<double>& row, double u) {
    double cum = 0;
    int last_admissible = 0;
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        if (row[j] <= 0) continue;
        cum += row[j];
        last_admissible = j;
        if (u <= cum) return j;
    }
    return last_admissible; // u landed in the rounding residue of the row sum
}

} // namespace

std::pair<int, int> nearest_node(const AugGrid& grid, double w, double lam) {
    const double lw = std::log(std::clamp(w, grid.w_min(), 1.0));
    const int W = grid.W();
    const double step = grid.log_w.back() / (W - 1); // negative
    int wi = std::clamp(static_cast<int>(std::lround(lw / step)), 0, W - 1);
    // guard for grids not built by build_grid
    if (wi > 0 && std::abs(grid.log_w[wi - 1] - lw) < std::abs(grid.log_w[wi] - lw)) --wi;
    if (wi + 1 < W && std::abs(grid.log_w[wi + 1] - lw) < std::abs(grid.log_w[wi] - lw)) ++wi;

    const double lam_clamped = std::clamp(lam, 0.0, grid.lam_max());
    const int L = grid.L();
    const double lstep = grid.lam_max() / (L - 1);
    int li = std::clamp(static_cast<int>(std::lround(lam_clamped / lstep)), 0, L - 1);
    if (li > 0 && std::abs(grid.lam_nodes[li - 1] - lam_clamped) < std::abs(grid.lam_nodes[li] - lam_clamped)) --li;
    if (li + 1 < L && std::abs(grid.lam_nodes[li + 1] - lam_clamped) < std::abs(grid.lam_nodes[li] - lam_clamped)) ++li;
    return {wi, li};
}

TrajectorySample sample_trajectory(const SmdpModel& model, std::span<const PolicyTable> policy_seq,
                                   int initial_state, int n_jumps, std::uint64_t seed,
                                   std::uint64_t traj_index) {
    if (n_jumps < 1) throw std::invalid_argument("sample_trajectory: n_jumps must be >= 1");
    if (initial_state < 0 || initial_state >= model.num_states())
        throw std::out_of_range("sample_trajectory: initial state out of range");
    if (policy_seq.empty())
        throw std::invalid_argument("sample_trajectory: empty policy sequence");
    const bool stationary = policy_seq.size() == 1;
    if (!stationary && static_cast<int>(policy_seq.size()) < n_jumps)
        throw std::invalid_argument("sample_trajectory: policy sequence shorter than the horizon");

    auto rng = trajectory_stream(seed, traj_index);
    TrajectorySample traj;
    traj.jump_times.reserve(n_jumps + 1);
    traj.states.reserve(n_jumps + 1);
    traj.actions.reserve(n_jumps);
    traj.accum_cost.reserve(n_jumps + 1);
    traj.jump_times.push_back(0.0);
    traj.states.push_back(initial_state);
    traj.accum_cost.push_back(0.0);

    for (int n = 0; n < n_jumps; ++n) {
        const int i = traj.states.back();
        const double t = traj.jump_times.back();
        const double lam = traj.accum_cost.back();
        const PolicyTable& table = stationary ? policy_seq[0] : policy_seq[n];
        const auto [wi, li] = nearest_node(table.grid, std::exp(-model.alpha * t), lam);
        const int a = table.at(i, wi, li);
        if (a < 0 || a >= model.num_actions(i))
            throw std::out_of_range("sample_trajectory: policy chose an inadmissible action");

        const int j = sample_destination(model.transition[i][a], uniform01(rng));
        const double s = model.sojourn[i][a][j].quantile(uniform01(rng));

        traj.actions.push_back(a);
        traj.states.push_back(j);
        traj.jump_times.push_back(t + s);
        traj.accum_cost.push_back(lam + std::exp(-model.alpha * t) * (model.cost[i][a] / model.alpha) *
                                            (-std::expm1(-model.alpha * s)));
    }
    return traj;
}

double ValueEstimate::outer_lo() const {
    return std::min(ci_lo, bracket_lo - 1.96 * bracket_lo_se);
}

double ValueEstimate::outer_hi() const {
    return std::max(ci_hi, bracket_hi + 1.96 * bracket_hi_se);
}

ValueEstimate estimate_value(const SmdpModel& model, const Utility& utility,
                             std::span<const PolicyTable> policy_seq, int initial_state,
                             int n_jumps, bool infinite_bracket, long n_traj, std::uint64_t seed,
                             int threads) {
    if (n_traj < 2) throw std::invalid_argument("estimate_value: n_traj must be >= 2");

    std::vector<double> lo_vals(n_traj), hi_vals(infinite_bracket ? n_traj : 0);
    const double lam_max = model.lambda_max();
    parallel_for(static_cast<std::size_t>(n_traj), threads, [&](std::size_t k) {
        const auto traj =
            sample_trajectory(model, policy_seq, initial_state, n_jumps, seed, k);
        const double c_n = traj.accum_cost.back();
        lo_vals[k] = utility.eval(c_n);
        if (infinite_bracket)
            hi_vals[k] = utility.eval(c_n + std::exp(-model.alpha * traj.jump_times.back()) * lam_max);
    });

    auto mean_se = [n_traj](const std::vector<double>& xs) {
        const double mean = pairwise_sum(xs) / static_cast<double>(n_traj);
        std::vector<double> sq(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) sq[k] = (xs[k] - mean) * (xs[k] - mean);
        const double var = pairwise_sum(sq) / static_cast<double>(n_traj - 1);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(n_traj)));
    };

    ValueEstimate est;
    est.n_jumps = n_jumps;
    est.n_traj = n_traj;
    std::tie(est.mean, est.se) = mean_se(lo_vals);
    est.ci_lo = est.mean - 1.96 * est.se;
    est.ci_hi = est.mean + 1.96 * est.se;
    if (infinite_bracket) {
        est.bracket_lo = est.mean;
        est.bracket_lo_se = est.se;
        std::tie(est.bracket_hi, est.bracket_hi_se) = mean_se(hi_vals);
    } else {
        est.bracket_lo = est.bracket_hi = est.mean;
        est.bracket_lo_se = est.bracket_hi_se = est.se;
    }
    return est;
}

int default_truncation_depth(const Utility& utility, const SmdpModel& model,
                             const Assumption1Certificate& cert, double tol, int max_depth) {
    if (!(tol > 0)) throw std::invalid_argument("default_truncation_depth: tol must be > 0");
    for (int n = 1; n <= max_depth; ++n)
        if (error_bound(utility, model, cert, n, 1.0, 0.0) <= tol) return n;
    return max_depth;
}

} // namespace smdp
