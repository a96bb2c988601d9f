#include "smdp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smdp {

AugGrid build_grid(const SmdpModel& model, int W, int L, double w_min) {
    if (W < 2) throw std::invalid_argument("build_grid: W must be >= 2");
    if (L < 2) throw std::invalid_argument("build_grid: L must be >= 2");
    if (!(w_min > 0 && w_min < 1)) throw std::invalid_argument("build_grid: need 0 < w_min < 1");
    if (!(model.alpha > 0 && model.c_bar > 0))
        throw std::invalid_argument("build_grid: model needs alpha > 0 and c_bar > 0");

    AugGrid grid;
    grid.w_nodes.resize(W);
    grid.log_w.resize(W);
    const double log_w_min = std::log(w_min);
    for (int k = 0; k < W; ++k) {
        const double lw = log_w_min * k / (W - 1);
        grid.log_w[k] = lw;
        grid.w_nodes[k] = std::exp(lw);
    }
    grid.w_nodes.front() = 1.0;
    grid.log_w.front() = 0.0;
    grid.w_nodes.back() = w_min;
    grid.log_w.back() = log_w_min;

    const double lam_max = model.lambda_max();
    grid.lam_nodes.resize(L);
    for (int l = 0; l < L; ++l) grid.lam_nodes[l] = lam_max * l / (L - 1);
    grid.lam_nodes.front() = 0.0;
    grid.lam_nodes.back() = lam_max;
    return grid;
}

ValueTable make_table(const AugGrid& grid, int n_states,
                      const std::function<double(int, double, double)>& fn) {
    if (n_states < 1) throw std::invalid_argument("make_table: n_states must be >= 1");
    ValueTable table;
    table.grid = grid;
    table.n_states = n_states;
    table.values.resize(static_cast<std::size_t>(n_states) * grid.W() * grid.L());
    for (int i = 0; i < n_states; ++i)
        for (int wi = 0; wi < grid.W(); ++wi)
            for (int li = 0; li < grid.L(); ++li)
                table.at(i, wi, li) = fn(i, grid.w_nodes[wi], grid.lam_nodes[li]);
    return table;
}

namespace {

// Locates x on an increasing node axis: cell index k and fraction u with
// x ~ nodes[k]*(1-u) + nodes[k+1]*u, clamped to the axis range.
inline void locate(const std::vector<double>& nodes, double x, int& k, double& u) {
    const int n = static_cast<int>(nodes.size());
    if (x <= nodes.front()) {
        k = 0;
        u = 0;
        return;
    }
    if (x >= nodes.back()) {
        k = n - 2;
        u = 1;
        return;
    }
    // geometric/uniform axes built by build_grid are evenly spaced, so try
    // the direct index first and fall back to binary search
    const double step = (nodes.back() - nodes.front()) / (n - 1);
    int guess = static_cast<int>((x - nodes.front()) / step);
    guess = std::clamp(guess, 0, n - 2);
    if (nodes[guess] <= x && x <= nodes[guess + 1]) {
        k = guess;
    } else {
        k = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
        k = std::clamp(k, 0, n - 2);
    }
    u = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
}

} // namespace

double interpolate(const ValueTable& table, int i, double w, double lam) {
    if (i < 0 || i >= table.n_states) throw std::out_of_range("interpolate: state out of range");
    if (!(w > 0) || w > 1.0 + 1e-9) throw std::domain_error("interpolate: w must lie in (0, 1]");
    if (lam < -1e-9) throw std::domain_error("interpolate: lambda must be >= 0");

    const AugGrid& g = table.grid;
    // the w axis is decreasing; locate on the cached logs, which are evenly
    // spaced for grids from build_grid (direct index, binary-search fallback)
    int wk;
    double wu;
    {
        const double lw = std::log(std::min(w, 1.0));
        const int n = g.W();
        if (lw >= 0) {
            wk = 0;
            wu = 0;
        } else if (lw <= g.log_w.back()) {
            wk = n - 2;
            wu = 1; // clamp to the w_min slice
        } else {
            const double step = g.log_w.back() / (n - 1); // negative
            int guess = std::clamp(static_cast<int>(lw / step), 0, n - 2);
            if (!(g.log_w[guess] >= lw && lw >= g.log_w[guess + 1])) {
                auto it = std::lower_bound(g.log_w.begin(), g.log_w.end(), lw, std::greater<double>());
                guess = std::clamp(static_cast<int>(it - g.log_w.begin()) - 1, 0, n - 2);
            }
            wk = guess;
            wu = (lw - g.log_w[wk]) / (g.log_w[wk + 1] - g.log_w[wk]);
        }
    }

    int lk;
    double lu;
    locate(g.lam_nodes, std::clamp(lam, 0.0, g.lam_max()), lk, lu);

    const double v00 = table.at(i, wk, lk);
    const double v01 = table.at(i, wk, lk + 1);
    const double v10 = table.at(i, wk + 1, lk);
    const double v11 = table.at(i, wk + 1, lk + 1);
    return (1 - wu) * ((1 - lu) * v00 + lu * v01) + wu * ((1 - lu) * v10 + lu * v11);
}

double bracketing_violation(const ValueTable& table, const Utility& u, const SmdpModel& model) {
    double worst = 0;
    const AugGrid& g = table.grid;
    for (int i = 0; i < table.n_states; ++i)
        for (int wi = 0; wi < g.W(); ++wi)
            for (int li = 0; li < g.L(); ++li) {
                const double lam = g.lam_nodes[li];
                const double lo = u.eval(lam);
                const double hi = u.eval(g.w_nodes[wi] * model.lambda_max() + lam);
                const double v = table.at(i, wi, li);
                worst = std::max(worst, lo - v);
                worst = std::max(worst, v - hi);
            }
    return worst;
}

QuadratureRule build_quadrature(const SmdpModel& model, int M) {
    if (M < 1) throw std::invalid_argument("build_quadrature: M must be >= 1");
    QuadratureRule quad;
    quad.M = M;
    quad.weight = 1.0 / M;
    const int S = model.num_states();
    quad.index_.resize(S);
    for (int i = 0; i < S; ++i) {
        quad.index_[i].resize(model.num_actions(i));
        for (int a = 0; a < model.num_actions(i); ++a) {
            quad.index_[i][a] = quad.offsets_.size();
            for (int j = 0; j < S; ++j) {
                if (model.transition[i][a][j] > 0) {
                    quad.offsets_.push_back(quad.storage_.size());
                    const SojournDist& dist = model.sojourn[i][a][j];
                    for (int m = 1; m <= M; ++m)
                        quad.storage_.push_back(dist.quantile((m - 0.5) / M));
                } else {
                    quad.offsets_.push_back(QuadratureRule::kAbsent);
                }
            }
        }
    }
    return quad;
}

double quadrature_discount_bound(const SmdpModel& model, const QuadratureRule& quad) {
    double worst = 0;
    for (int i = 0; i < model.num_states(); ++i)
        for (int a = 0; a < model.num_actions(i); ++a) {
            double mean = 0;
            for (int j = 0; j < model.num_states(); ++j) {
                const double p = model.transition[i][a][j];
                if (p <= 0) continue;
                double inner = 0;
                for (double s : quad.atoms(i, a, j)) inner += std::exp(-model.alpha * s);
                mean += p * quad.weight * inner;
            }
            worst = std::max(worst, mean);
        }
    return worst;
}

} // namespace smdp
