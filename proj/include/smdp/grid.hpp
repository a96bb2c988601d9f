#pragma once

#include "smdp/model.hpp"
#include "smdp/utility.hpp"

#include <functional>
#include <span>
#include <vector>

namespace smdp {

/// Discretization of the augmented coordinates. The elapsed-time coordinate
/// is carried as the discount weight w = e^{-alpha t} in (0, 1], so the
/// grid is compact; the accumulated-cost coordinate spans [0, c_bar/alpha],
/// the reachable range from lambda = 0.
struct AugGrid {
    std::vector<double> w_nodes;   // strictly decreasing, w_nodes[0] == 1
    std::vector<double> log_w;     // cached ln(w_nodes)
    std::vector<double> lam_nodes; // strictly increasing, [0, c_bar/alpha]

    int W() const { return static_cast<int>(w_nodes.size()); }
    int L() const { return static_cast<int>(lam_nodes.size()); }
    double w_min() const { return w_nodes.back(); }
    double lam_max() const { return lam_nodes.back(); }

    bool operator==(const AugGrid& other) const {
        return w_nodes == other.w_nodes && lam_nodes == other.lam_nodes;
    }
};

/// Geometric w spacing from 1 down to w_min, uniform lambda spacing over
/// [0, c_bar/alpha].
AugGrid build_grid(const SmdpModel& model, int W, int L, double w_min);

/// Value function samples over (state, w, lambda) grid nodes.
struct ValueTable {
    AugGrid grid;
    int n_states = 0;
    std::vector<double> values; // indexed (state, w, lambda), lambda fastest

    double& at(int i, int wi, int li) {
        return values[(static_cast<std::size_t>(i) * grid.W() + wi) * grid.L() + li];
    }
    double at(int i, int wi, int li) const {
        return values[(static_cast<std::size_t>(i) * grid.W() + wi) * grid.L() + li];
    }
};

/// Builds a table by evaluating fn(state, w, lambda) at every node.
ValueTable make_table(const AugGrid& grid, int n_states,
                      const std::function<double(int, double, double)>& fn);

/// Bilinear interpolation in (log w, lambda). Exact at nodes; queries below
/// w_min clamp to the w_min slice, lambda clamps to the grid range.
double interpolate(const ValueTable& table, int i, double w, double lam);

/// Largest violation of the value-set bracketing
/// U(lambda) <= v(i,w,lambda) <= U(w c_bar/alpha + lambda); 0 when the
/// table lies inside the bracket at every node.
double bracketing_violation(const ValueTable& table, const Utility& u, const SmdpModel& model);

/// Midpoint-quantile discretization of the sojourn kernel: per admissible
/// (i,a,j), M atoms s_m = F^{-1}((m-0.5)/M) with equal weights 1/M.
struct QuadratureRule {
    int M = 0;
    double weight = 0; // 1/M, shared by all atoms

    std::span<const double> atoms(int i, int a, int j) const {
        const std::size_t off = offsets_[index_[i][a] + j];
        return off == kAbsent ? std::span<const double>{}
                              : std::span<const double>(storage_.data() + off, M);
    }

    // populated by build_quadrature
    static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::vector<std::size_t>> index_; // index_[i][a] -> base into offsets_
    std::vector<std::size_t> offsets_;            // per (i,a,j), kAbsent if P(j|i,a)=0
    std::vector<double> storage_;
};

QuadratureRule build_quadrature(const SmdpModel& model, int M);

/// Mean one-jump discount sup_(i,a) sum_j P(j|i,a) mean_m e^{-alpha s_m}
/// under the quadrature atoms; always < 1 since atoms are positive.
double quadrature_discount_bound(const SmdpModel& model, const QuadratureRule& quad);

} // namespace smdp
