#pragma once

#include "smdp/grid.hpp"
#include "smdp/model.hpp"
#include "smdp/utility.hpp"

#include <utility>
#include <vector>

namespace smdp {

/// Action choice per grid node, indices into the per-state action lists.
struct PolicyTable {
    AugGrid grid;
    int n_states = 0;
    std::vector<int> choice; // (state, w, lambda), lambda fastest

    int& at(int i, int wi, int li) {
        return choice[(static_cast<std::size_t>(i) * grid.W() + wi) * grid.L() + li];
    }
    int at(int i, int wi, int li) const {
        return choice[(static_cast<std::size_t>(i) * grid.W() + wi) * grid.L() + li];
    }
};

/// Constant policy f(i) = action_per_state[i] replicated over all nodes.
PolicyTable constant_policy(const AugGrid& grid, const SmdpModel& model,
                            const std::vector<int>& action_per_state);

/// One-jump expectation of v from augmented point (w, i, lambda) under
/// action a:
///   sum_j P(j|i,a) mean_m v(j, w e^{-alpha s_m},
///                            lambda + (C(i,a)/alpha) w (1 - e^{-alpha s_m}))
/// with s_m the quadrature atoms of F(.|i,a,j). Every interpolated sample
/// is clamped into the value bracket [U(lam'), U(w' c_bar/alpha + lam')] at
/// its query point, so the operator maps bracketed tables to bracketed
/// tables exactly, clamped-grid artifacts notwithstanding.
double apply_L(const ValueTable& v, const SmdpModel& model, const QuadratureRule& quad,
               const Utility& utility, int i, double w, double lam, int a);

/// Policy operator: node-wise apply_L with the policy's action choice.
ValueTable apply_Tf(const ValueTable& v, const SmdpModel& model, const QuadratureRule& quad,
                    const Utility& utility, const PolicyTable& f, int threads = 1);

/// Optimality operator: node-wise minimum of apply_L over admissible
/// actions, plus the argmin policy. Ties break to the lowest action index;
/// reduction order is fixed, so results are identical for any thread count.
std::pair<ValueTable, PolicyTable> apply_T(const ValueTable& v, const SmdpModel& model,
                                           const QuadratureRule& quad, const Utility& utility,
                                           int threads = 1);

} // namespace smdp
