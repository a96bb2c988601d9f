#include "smdp/exponential.hpp"

#include "smdp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace smdp {

namespace {

// 1-D interpolation in log w on the decreasing w axis; clamps to the
// w_min slice below the grid exactly like the full-table interpolation.
double interp_h(const HTable& h, int i, double w) {
    const int n = static_cast<int>(h.w_nodes.size());
    const double lw = std::log(std::min(w, 1.0));
    if (lw >= 0) return h.at(i, 0);
    if (lw <= h.log_w.back()) return h.at(i, n - 1);
    const double step = h.log_w.back() / (n - 1);
    int k = std::clamp(static_cast<int>(lw / step), 0, n - 2);
    if (!(h.log_w[k] >= lw && lw >= h.log_w[k + 1])) {
        auto it = std::lower_bound(h.log_w.begin(), h.log_w.end(), lw, std::greater<double>());
        k = std::clamp(static_cast<int>(it - h.log_w.begin()) - 1, 0, n - 2);
    }
    const double u = (lw - h.log_w[k]) / (h.log_w[k + 1] - h.log_w[k]);
    return (1 - u) * h.at(i, k) + u * h.at(i, k + 1);
}

struct HPlan {
    double cost_over_alpha = 0;
    double lam_max = 0;
    double weight = 0;
    int n_atoms = 0;
    std::vector<int> dests;
    std::vector<double> probs;
    std::vector<double> log_probs; // ln(P_j * weight), log path
    std::vector<double> discounts; // (dest, atom)
};

// interp_h clamped into the envelope bracket at the query point; keeps
// every sample inside [min, max] of {1/gamma, (1/gamma) e^{gamma w lam_max}}
// (or their logs), so the clamped w_min slice cannot drift.
double clamped_h(const HTable& h, int i, double w, double lam_max) {
    const double raw = interp_h(h, i, w);
    if (!h.log_scale) {
        const double e1 = 1.0 / h.gamma;
        const double e2 = std::exp(h.gamma * w * lam_max) / h.gamma;
        return std::clamp(raw, std::min(e1, e2), std::max(e1, e2));
    }
    const double g1 = -std::log(std::abs(h.gamma));
    const double g2 = g1 + h.gamma * w * lam_max;
    return std::clamp(raw, std::min(g1, g2), std::max(g1, g2));
}

std::vector<std::vector<HPlan>> make_h_plans(const SmdpModel& model, const QuadratureRule& quad) {
    std::vector<std::vector<HPlan>> plans(model.num_states());
    for (int i = 0; i < model.num_states(); ++i)
        for (int a = 0; a < model.num_actions(i); ++a) {
            HPlan plan;
            plan.cost_over_alpha = model.cost[i][a] / model.alpha;
            plan.lam_max = model.lambda_max();
            plan.weight = quad.weight;
            plan.n_atoms = quad.M;
            for (int j = 0; j < model.num_states(); ++j) {
                const double p = model.transition[i][a][j];
                if (p <= 0) continue;
                plan.dests.push_back(j);
                plan.probs.push_back(p);
                plan.log_probs.push_back(std::log(p * quad.weight));
                for (double s : quad.atoms(i, a, j))
                    plan.discounts.push_back(std::exp(-model.alpha * s));
            }
            plans[i].push_back(std::move(plan));
        }
    return plans;
}

// One reduced-operator sweep; fills `out` and, when requested, the argmin.
void h_sweep(const HTable& h, const std::vector<std::vector<HPlan>>& plans, int threads,
             double exp_cap, long* capped_terms, HTable& out, WPolicy* argmin) {
    const int W = static_cast<int>(h.w_nodes.size());
    const double gamma = h.gamma;
    std::vector<long> capped(h.n_states * static_cast<std::size_t>(W), 0);

    parallel_for(static_cast<std::size_t>(h.n_states) * W, threads, [&](std::size_t node) {
        const int i = static_cast<int>(node) / W;
        const int wi = static_cast<int>(node) % W;
        const double w = h.w_nodes[wi];
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        // in log scale the iterate is g = ln|h|; minimizing h means
        // minimizing g when h > 0 (gamma > 0) and maximizing g when h < 0
        const bool flip = h.log_scale && gamma < 0;
        for (int a = 0; a < static_cast<int>(plans[i].size()); ++a) {
            const HPlan& plan = plans[i][a];
            double val;
            if (!h.log_scale) {
                double acc = 0;
                for (std::size_t d = 0; d < plan.dests.size(); ++d) {
                    const int j = plan.dests[d];
                    double inner = 0;
                    for (int m = 0; m < plan.n_atoms; ++m) {
                        const double e = plan.discounts[d * plan.n_atoms + m];
                        double arg = gamma * plan.cost_over_alpha * (w - w * e);
                        if (arg > exp_cap) {
                            arg = exp_cap;
                            ++capped[node];
                        }
                        inner += std::exp(arg) * clamped_h(h, j, w * e, plan.lam_max);
                    }
                    acc += plan.probs[d] * (plan.weight * inner);
                }
                val = acc;
            } else {
                // log-sum-exp over all (dest, atom) terms
                double peak = -std::numeric_limits<double>::infinity();
                for (std::size_t d = 0; d < plan.dests.size(); ++d)
                    for (int m = 0; m < plan.n_atoms; ++m) {
                        const double e = plan.discounts[d * plan.n_atoms + m];
                        const double term = plan.log_probs[d] +
                                            gamma * plan.cost_over_alpha * (w - w * e) +
                                            clamped_h(h, plan.dests[d], w * e, plan.lam_max);
                        peak = std::max(peak, term);
                    }
                double sum = 0;
                for (std::size_t d = 0; d < plan.dests.size(); ++d)
                    for (int m = 0; m < plan.n_atoms; ++m) {
                        const double e = plan.discounts[d * plan.n_atoms + m];
                        const double term = plan.log_probs[d] +
                                            gamma * plan.cost_over_alpha * (w - w * e) +
                                            clamped_h(h, plan.dests[d], w * e, plan.lam_max);
                        sum += std::exp(term - peak);
                    }
                val = peak + std::log(sum);
            }
            const double keyed = flip ? -val : val;
            if (keyed < best) {
                best = keyed;
                best_a = a;
            }
        }
        out.at(i, wi) = flip ? -best : best;
        if (argmin) argmin->at(i, wi) = best_a;
    });

    if (capped_terms)
        for (long c : capped) *capped_terms += c;
}

HTable envelope_table(const AugGrid& grid, int n_states, double gamma, bool log_scale, bool upper,
                      double lam_max) {
    HTable t;
    t.w_nodes = grid.w_nodes;
    t.log_w = grid.log_w;
    t.n_states = n_states;
    t.gamma = gamma;
    t.log_scale = log_scale;
    t.values.resize(static_cast<std::size_t>(n_states) * grid.W());
    for (int i = 0; i < n_states; ++i)
        for (int wi = 0; wi < grid.W(); ++wi) {
            const double w = grid.w_nodes[wi];
            if (!log_scale) {
                const double e1 = 1.0 / gamma;
                const double e2 = std::exp(gamma * w * lam_max) / gamma;
                t.at(i, wi) = upper ? std::max(e1, e2) : std::min(e1, e2);
            } else {
                // g = ln|h|; which envelope is h-larger depends on sign(gamma)
                const double g1 = -std::log(std::abs(gamma));
                const double g2 = g1 + gamma * w * lam_max;
                const bool g2_is_upper_h = gamma > 0;
                const double up_g = g2_is_upper_h ? std::max(g1, g2) : std::min(g1, g2);
                const double lo_g = g2_is_upper_h ? std::min(g1, g2) : std::max(g1, g2);
                t.at(i, wi) = upper ? up_g : lo_g;
            }
        }
    return t;
}

} // namespace

double HTable::h(int i, int wi) const {
    const double v = at(i, wi);
    if (!log_scale) return v;
    const double mag = std::exp(v);
    return gamma < 0 ? -mag : mag;
}

HTable h_step(const HTable& h, const SmdpModel& model, const QuadratureRule& quad, int threads,
              double exp_cap, long* capped_terms) {
    if (h.n_states != model.num_states())
        throw std::invalid_argument("h_step: table state count does not match the model");
    const auto plans = make_h_plans(model, quad);
    HTable out = h;
    h_sweep(h, plans, threads, exp_cap, capped_terms, out, nullptr);
    return out;
}

ExponentialResult solve_exponential(const SmdpModel& model, double gamma, const AugGrid& grid,
                                    const QuadratureRule& quad, const Assumption1Certificate& cert,
                                    const ExponentialOptions& options) {
    if (gamma == 0) throw std::invalid_argument("solve_exponential: gamma must be nonzero");
    if (!(options.tol > 0)) throw std::invalid_argument("solve_exponential: tol must be > 0");

    const double lam_max = model.lambda_max();
    const bool log_domain = std::abs(gamma) * lam_max > options.log_domain_threshold;
    const auto plans = make_h_plans(model, quad);
    const double rho = contraction_base(cert, model.alpha);

    ExponentialResult res;
    res.log_domain = log_domain;
    res.lower = envelope_table(grid, model.num_states(), gamma, log_domain, false, lam_max);
    res.upper = envelope_table(grid, model.num_states(), gamma, log_domain, true, lam_max);

    // the clamp slice pinch, in the same units as the reported gap
    const double floor = log_domain
                             ? std::expm1(std::abs(gamma) * grid.w_min() * lam_max)
                             : std::abs(std::expm1(gamma * grid.w_min() * lam_max) / gamma);

    auto gap_of = [&](const HTable& lo, const HTable& hi) {
        double g = 0;
        for (std::size_t k = 0; k < lo.values.size(); ++k)
            g = std::max(g, log_domain ? std::expm1(std::abs(hi.values[k] - lo.values[k]))
                                       : std::abs(hi.values[k] - lo.values[k]));
        return g;
    };

    for (int n = 1; n <= options.max_iter; ++n) {
        HTable next_lo = res.lower, next_hi = res.upper;
        h_sweep(res.lower, plans, options.threads, options.exp_cap, &res.capped_terms,
                next_lo, nullptr);
        h_sweep(res.upper, plans, options.threads, options.exp_cap, &res.capped_terms,
                next_hi, nullptr);
        res.lower = std::move(next_lo);
        res.upper = std::move(next_hi);
        res.n_iters = n;
        res.gap = gap_of(res.lower, res.upper);
        // analytic envelope in h units at w = 1 (may be inf at extreme gamma)
        const double bound =
            lam_max * std::pow(rho, n) * (gamma > 0 ? std::exp(gamma * lam_max) : 1.0);
        res.history.push_back({n, res.gap, bound});
        if (res.gap <= options.tol + floor) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) {
        std::ostringstream os;
        os << "solve_exponential: gap " << res.gap << " > tol " << options.tol
           << " + clamp floor " << floor << " after " << res.n_iters << " iterations";
        throw NonConvergenceError(os.str(), res.gap, res.history.back().bound, res.n_iters);
    }

    res.policy.w_nodes = grid.w_nodes;
    res.policy.n_states = model.num_states();
    res.policy.choice.resize(res.lower.values.size());
    HTable discard = res.lower;
    h_sweep(res.lower, plans, options.threads, options.exp_cap, nullptr, discard,
            &res.policy);

    res.h = res.lower;
    for (std::size_t k = 0; k < res.h.values.size(); ++k)
        res.h.values[k] = 0.5 * (res.lower.values[k] + res.upper.values[k]);
    return res;
}

PolicyTable broadcast_policy(const WPolicy& policy, const AugGrid& grid) {
    if (policy.w_nodes != grid.w_nodes)
        throw std::invalid_argument("broadcast_policy: w nodes do not match the grid");
    PolicyTable f;
    f.grid = grid;
    f.n_states = policy.n_states;
    f.choice.resize(static_cast<std::size_t>(policy.n_states) * grid.W() * grid.L());
    for (int i = 0; i < policy.n_states; ++i)
        for (int wi = 0; wi < grid.W(); ++wi)
            for (int li = 0; li < grid.L(); ++li) f.at(i, wi, li) = policy.at(i, wi);
    return f;
}

double splitting_residual(const ValueTable& v, const HTable& h) {
    if (v.grid.w_nodes != h.w_nodes)
        throw std::invalid_argument("splitting_residual: w nodes do not match");
    if (v.n_states != h.n_states)
        throw std::invalid_argument("splitting_residual: state counts do not match");
    // compare on the reachable cone lambda + w lam_max <= lam_max only: the
    // rectangular lambda grid truncates the dynamics outside it, while the
    // reduced table has no lambda coordinate to truncate
    const double lam_max = v.grid.lam_max();
    double worst = 0;
    for (int i = 0; i < v.n_states; ++i)
        for (int wi = 0; wi < v.grid.W(); ++wi)
            for (int li = 0; li < v.grid.L(); ++li) {
                const double lam = v.grid.lam_nodes[li];
                if (lam + v.grid.w_nodes[wi] * lam_max > lam_max + 1e-9) continue;
                const double split = std::exp(h.gamma * lam) * h.h(i, wi);
                worst = std::max(worst, std::abs(v.at(i, wi, li) - split));
            }
    return worst;
}

} // namespace smdp
