#include "smdp/solver_infinite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smdp {

namespace {

double max_gap(const ValueTable& upper, const ValueTable& lower) {
    double gap = 0;
    for (std::size_t k = 0; k < lower.values.size(); ++k)
        gap = std::max(gap, upper.values[k] - lower.values[k]);
    return gap;
}

ValueTable midpoint(const ValueTable& lower, const ValueTable& upper) {
    ValueTable mid = lower;
    for (std::size_t k = 0; k < mid.values.size(); ++k)
        mid.values[k] = 0.5 * (lower.values[k] + upper.values[k]);
    return mid;
}

ValueTable lower_envelope(const SmdpModel& model, const Utility& utility, const AugGrid& grid) {
    return make_table(grid, model.num_states(),
                      [&](int, double, double lam) { return utility.eval(lam); });
}

ValueTable upper_envelope(const SmdpModel& model, const Utility& utility, const AugGrid& grid) {
    const double lam_span = model.lambda_max();
    return make_table(grid, model.num_states(),
                      [&](int, double w, double lam) { return utility.eval(w * lam_span + lam); });
}

} // namespace

double clamp_gap_floor(const Utility& utility, const SmdpModel& model, const AugGrid& grid) {
    const double pinch_span = grid.w_min() * model.lambda_max();
    double floor = 0;
    for (double lam : grid.lam_nodes)
        floor = std::max(floor, utility.eval(lam + pinch_span) - utility.eval(lam));
    return floor;
}

GridBudget estimate_grid_budget(const ValueTable& table, const Utility& utility,
                                const SmdpModel& model, const QuadratureRule& quad) {
    const AugGrid& g = table.grid;
    // bilinear error within a cell is ~ |second difference| / 8 per axis
    double d2w = 0, d2l = 0;
    for (int i = 0; i < table.n_states; ++i) {
        for (int li = 0; li < g.L(); ++li)
            for (int wi = 1; wi + 1 < g.W(); ++wi)
                d2w = std::max(d2w, std::abs(table.at(i, wi - 1, li) - 2 * table.at(i, wi, li) +
                                             table.at(i, wi + 1, li)));
        for (int wi = 0; wi < g.W(); ++wi)
            for (int li = 1; li + 1 < g.L(); ++li)
                d2l = std::max(d2l, std::abs(table.at(i, wi, li - 1) - 2 * table.at(i, wi, li) +
                                             table.at(i, wi, li + 1)));
    }
    // every sweep re-injects the one-cell error; the geometric accumulation
    // factor is bounded through the mean one-jump discount of the kernel
    const double rho_q = std::min(quadrature_discount_bound(model, quad), 1.0 - 1e-6);
    GridBudget budget;
    budget.interp = (d2w + d2l) / 8.0 / (1.0 - rho_q);
    budget.clamp = clamp_gap_floor(utility, model, table.grid);
    return budget;
}

double error_bound(const Utility& utility, const SmdpModel& model,
                   const Assumption1Certificate& cert, int n, double w, double lam) {
    if (n < 0) throw std::invalid_argument("error_bound: n must be >= 0");
    const double rho = contraction_base(cert, model.alpha);
    const double envelope = w * model.lambda_max();
    const double decay = std::pow(rho, n);
    if (utility.is_concave()) return utility.deriv_left(lam) * envelope * decay;
    return utility.deriv_right(envelope + lam) * envelope * decay;
}

SandwichResult solve_infinite(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                              const QuadratureRule& quad, const Assumption1Certificate& cert,
                              double tol, int max_iter, int threads,
                              const IterationCallback& on_iteration) {
    if (!(tol > 0)) throw std::invalid_argument("solve_infinite: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solve_infinite: max_iter must be >= 1");

    SandwichResult res;
    res.lower = lower_envelope(model, utility, grid);
    res.upper = upper_envelope(model, utility, grid);
    const double floor = clamp_gap_floor(utility, model, grid);

    auto bound_at = [&](int n) {
        double worst = 0;
        for (double w : grid.w_nodes)
            for (double lam : grid.lam_nodes)
                worst = std::max(worst, error_bound(utility, model, cert, n, w, lam));
        return worst;
    };

    for (int n = 1; n <= max_iter; ++n) {
        auto [lower_next, policy] = apply_T(res.lower, model, quad, utility, threads);
        res.lower = std::move(lower_next);
        res.upper = apply_T(res.upper, model, quad, utility, threads).first;
        res.n_iters = n;
        res.gap = max_gap(res.upper, res.lower);
        const IterationRecord rec{n, res.gap, bound_at(n)};
        res.history.push_back(rec);
        if (on_iteration) on_iteration(rec);
        if (res.gap <= tol + floor) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) {
        std::ostringstream os;
        os << "solve_infinite: gap " << res.gap << " > tol " << tol << " + clamp floor " << floor
           << " after " << res.n_iters << " iterations (analytic bound " << res.history.back().bound
           << ")";
        throw NonConvergenceError(os.str(), res.gap, res.history.back().bound, res.n_iters);
    }

    res.policy = apply_T(res.lower, model, quad, utility, threads).second;
    res.bound = make_table(grid, model.num_states(), [&](int, double w, double lam) {
        return error_bound(utility, model, cert, res.n_iters, w, lam);
    });
    res.budget = estimate_grid_budget(res.lower, utility, model, quad);
    return res;
}

ValueTable evaluate_stationary(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                               const QuadratureRule& quad, const PolicyTable& f, double tol,
                               int max_iter, int threads, double* out_gap) {
    if (!(tol > 0)) throw std::invalid_argument("evaluate_stationary: tol must be > 0");
    ValueTable lower = lower_envelope(model, utility, grid);
    ValueTable upper = upper_envelope(model, utility, grid);
    const double floor = clamp_gap_floor(utility, model, grid);
    double gap = max_gap(upper, lower);
    for (int n = 1; n <= max_iter; ++n) {
        lower = apply_Tf(lower, model, quad, utility, f, threads);
        upper = apply_Tf(upper, model, quad, utility, f, threads);
        gap = max_gap(upper, lower);
        if (gap <= tol + floor) {
            if (out_gap) *out_gap = gap;
            return midpoint(lower, upper);
        }
    }
    std::ostringstream os;
    os << "evaluate_stationary: gap " << gap << " > tol " << tol << " + clamp floor " << floor
       << " after " << max_iter << " iterations";
    throw NonConvergenceError(os.str(), gap, 0.0, max_iter);
}

ImprovedPolicy improve_policy(const SmdpModel& model, const Utility& utility, const AugGrid& grid,
                              const QuadratureRule& quad, const PolicyTable& f, double tol,
                              int max_iter, int threads, double margin) {
    if (!(f.grid == grid)) throw std::invalid_argument("improve_policy: policy grid mismatch");
    if (margin < 0) margin = 10 * tol;

    ImprovedPolicy result;
    result.value = evaluate_stationary(model, utility, grid, quad, f, tol, max_iter, threads);
    auto [min_values, argmin] = apply_T(result.value, model, quad, utility, threads);

    result.policy = f;
    for (std::size_t k = 0; k < min_values.values.size(); ++k) {
        if (min_values.values[k] < result.value.values[k] - margin) {
            result.policy.choice[k] = argmin.choice[k];
            result.improved = true;
        }
    }
    return result;
}

} // namespace smdp
