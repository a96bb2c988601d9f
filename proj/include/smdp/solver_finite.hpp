#pragma once

#include "smdp/bellman.hpp"
#include "smdp/utility.hpp"

#include <vector>

namespace smdp {

/// Backward value iteration result for the N-jump problem. values[n] is
/// V_n (values[0] = U(lambda)); policies[n-1] is the minimizer f*_n of
/// V_{n-1}. The optimal action at the k-th jump of an N-horizon run is
/// f*_{N-k}, i.e. policies are consumed highest index first.
struct FiniteSolution {
    std::vector<ValueTable> values;
    std::vector<PolicyTable> policies;

    /// J_N(i): value at the unaugmented start (w = 1, lambda = 0).
    double j_value(int i) const { return values.back().at(i, 0, 0); }

    /// Optimal policy sequence in decision order (f*_N, ..., f*_1).
    std::vector<PolicyTable> decision_order_policies() const {
        return {policies.rbegin(), policies.rend()};
    }
};

FiniteSolution solve_finite(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                            const QuadratureRule& quad, int n_jumps, int threads = 1);

/// Value of a Markov policy sequence (decision order: policy_seq[k] acts at
/// jump k): composes the policy operators right to left over V_0 = U(lambda).
ValueTable evaluate_markov_policy(const SmdpModel& model, const Utility& utility,
                                  const AugGrid& grid, const QuadratureRule& quad,
                                  const std::vector<PolicyTable>& policy_seq, int threads = 1);

} // namespace smdp
