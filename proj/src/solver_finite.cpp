#include "smdp/solver_finite.hpp"

#include <stdexcept>

namespace smdp {

FiniteSolution solve_finite(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                            const QuadratureRule& quad, int n_jumps, int threads) {
    if (n_jumps < 1) throw std::invalid_argument("solve_finite: horizon must be >= 1");
    FiniteSolution sol;
    sol.values.reserve(n_jumps + 1);
    sol.policies.reserve(n_jumps);
    sol.values.push_back(make_table(grid, model.num_states(),
                                    [&](int, double, double lam) { return utility.eval(lam); }));
    for (int n = 1; n <= n_jumps; ++n) {
        auto [value, policy] = apply_T(sol.values.back(), model, quad, utility, threads);
        sol.values.push_back(std::move(value));
        sol.policies.push_back(std::move(policy));
    }
    return sol;
}

ValueTable evaluate_markov_policy(const SmdpModel& model, const Utility& utility,
                                  const AugGrid& grid, const QuadratureRule& quad,
                                  const std::vector<PolicyTable>& policy_seq, int threads) {
    if (policy_seq.empty()) throw std::invalid_argument("evaluate_markov_policy: empty policy sequence");
    ValueTable value = make_table(grid, model.num_states(),
                                  [&](int, double, double lam) { return utility.eval(lam); });
    for (auto it = policy_seq.rbegin(); it != policy_seq.rend(); ++it)
        value = apply_Tf(value, model, quad, utility, *it, threads);
    return value;
}

} // namespace smdp
