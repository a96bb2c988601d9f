#include "smdp/bellman.hpp"

#include "smdp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smdp {

namespace {

// Precomputed one-jump kernel for a single (state, action): admissible
// destinations with their probabilities and per-atom discount factors
// e^{-alpha s_m}. eval() below is the single code path for the L operator,
// so standalone apply_L and the sweep operators agree bit for bit.
struct ActionPlan {
    double cost_over_alpha = 0;
    double lam_max = 0;
    double weight = 0;
    int n_atoms = 0;
    const Utility* utility = nullptr;
    std::vector<int> dests;
    std::vector<double> probs;
    std::vector<double> discounts; // (dest, atom), atom fastest

    double eval(const ValueTable& v, double w, double lam) const {
        double acc = 0;
        const double* disc = discounts.data();
        for (std::size_t d = 0; d < dests.size(); ++d) {
            const int j = dests[d];
            double inner = 0;
            for (int m = 0; m < n_atoms; ++m) {
                const double e = disc[d * n_atoms + m];
                const double w2 = w * e;
                const double lam2 = lam + cost_over_alpha * (w - w2);
                const double raw = interpolate(v, j, w2, lam2);
                inner += std::clamp(raw, utility->eval(lam2), utility->eval(w2 * lam_max + lam2));
            }
            acc += probs[d] * (weight * inner);
        }
        return acc;
    }
};

ActionPlan make_plan(const SmdpModel& model, const QuadratureRule& quad, const Utility& utility,
                     int i, int a) {
    ActionPlan plan;
    plan.cost_over_alpha = model.cost[i][a] / model.alpha;
    plan.lam_max = model.lambda_max();
    plan.weight = quad.weight;
    plan.n_atoms = quad.M;
    plan.utility = &utility;
    for (int j = 0; j < model.num_states(); ++j) {
        const double p = model.transition[i][a][j];
        if (p <= 0) continue;
        plan.dests.push_back(j);
        plan.probs.push_back(p);
        for (double s : quad.atoms(i, a, j)) plan.discounts.push_back(std::exp(-model.alpha * s));
    }
    return plan;
}

std::vector<std::vector<ActionPlan>> make_plans(const SmdpModel& model, const QuadratureRule& quad,
                                                const Utility& utility) {
    std::vector<std::vector<ActionPlan>> plans(model.num_states());
    for (int i = 0; i < model.num_states(); ++i)
        for (int a = 0; a < model.num_actions(i); ++a)
            plans[i].push_back(make_plan(model, quad, utility, i, a));
    return plans;
}

void check_compatible(const ValueTable& v, const SmdpModel& model) {
    if (v.n_states != model.num_states())
        throw std::invalid_argument("bellman: table state count does not match the model");
}

} // namespace

PolicyTable constant_policy(const AugGrid& grid, const SmdpModel& model,
                            const std::vector<int>& action_per_state) {
    if (static_cast<int>(action_per_state.size()) != model.num_states())
        throw std::invalid_argument("constant_policy: one action per state required");
    PolicyTable f;
    f.grid = grid;
    f.n_states = model.num_states();
    f.choice.resize(static_cast<std::size_t>(f.n_states) * grid.W() * grid.L());
    for (int i = 0; i < f.n_states; ++i) {
        const int a = action_per_state[i];
        if (a < 0 || a >= model.num_actions(i))
            throw std::invalid_argument("constant_policy: action index out of range");
        for (int wi = 0; wi < grid.W(); ++wi)
            for (int li = 0; li < grid.L(); ++li) f.at(i, wi, li) = a;
    }
    return f;
}

double apply_L(const ValueTable& v, const SmdpModel& model, const QuadratureRule& quad,
               const Utility& utility, int i, double w, double lam, int a) {
    check_compatible(v, model);
    if (i < 0 || i >= model.num_states()) throw std::out_of_range("apply_L: state out of range");
    if (a < 0 || a >= model.num_actions(i)) throw std::out_of_range("apply_L: action out of range");
    return make_plan(model, quad, utility, i, a).eval(v, w, lam);
}

ValueTable apply_Tf(const ValueTable& v, const SmdpModel& model, const QuadratureRule& quad,
                    const Utility& utility, const PolicyTable& f, int threads) {
    check_compatible(v, model);
    if (!(f.grid == v.grid)) throw std::invalid_argument("apply_Tf: policy grid does not match table grid");
    const auto plans = make_plans(model, quad, utility);
    const AugGrid& g = v.grid;
    ValueTable out;
    out.grid = g;
    out.n_states = v.n_states;
    out.values.resize(v.values.size());
    const int W = g.W(), L = g.L();
    parallel_for(static_cast<std::size_t>(v.n_states) * W, threads, [&](std::size_t row) {
        const int i = static_cast<int>(row) / W;
        const int wi = static_cast<int>(row) % W;
        const double w = g.w_nodes[wi];
        for (int li = 0; li < L; ++li)
            out.at(i, wi, li) = plans[i][f.at(i, wi, li)].eval(v, w, g.lam_nodes[li]);
    });
    return out;
}

std::pair<ValueTable, PolicyTable> apply_T(const ValueTable& v, const SmdpModel& model,
                                           const QuadratureRule& quad, const Utility& utility,
                                           int threads) {
    check_compatible(v, model);
    const auto plans = make_plans(model, quad, utility);
    const AugGrid& g = v.grid;
    ValueTable out;
    out.grid = g;
    out.n_states = v.n_states;
    out.values.resize(v.values.size());
    PolicyTable argmin;
    argmin.grid = g;
    argmin.n_states = v.n_states;
    argmin.choice.resize(v.values.size());
    const int W = g.W(), L = g.L();
    parallel_for(static_cast<std::size_t>(v.n_states) * W, threads, [&](std::size_t row) {
        const int i = static_cast<int>(row) / W;
        const int wi = static_cast<int>(row) % W;
        const double w = g.w_nodes[wi];
        for (int li = 0; li < L; ++li) {
            const double lam = g.lam_nodes[li];
            double best = std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < static_cast<int>(plans[i].size()); ++a) {
                const double val = plans[i][a].eval(v, w, lam);
                if (val < best) {
                    best = val;
                    best_a = a;
                }
            }
            out.at(i, wi, li) = best;
            argmin.at(i, wi, li) = best_a;
        }
    });
    return {std::move(out), std::move(argmin)};
}

} // namespace smdp
