#include "smdp/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace smdp {

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v << "\n";
    return os.str();
}

ValidationReport validate(const SmdpModel& model) {
    ValidationReport report;
    auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

    const int S = model.num_states();
    if (S < 1) {
        add("model has no states");
        return report;
    }
    if (!(std::isfinite(model.c_bar) && model.c_bar > 0)) add("c_bar must satisfy 0 < c_bar < inf");
    if (!(std::isfinite(model.alpha) && model.alpha > 0)) add("alpha must be > 0");

    bool shape_ok = true;
    auto shape = [&](bool ok, const std::string& msg) {
        if (!ok) {
            add(msg);
            shape_ok = false;
        }
    };
    shape(static_cast<int>(model.actions.size()) == S, "actions: one action list per state required");
    shape(static_cast<int>(model.transition.size()) == S, "transition: one block per state required");
    shape(static_cast<int>(model.sojourn.size()) == S, "sojourn: one block per state required");
    shape(static_cast<int>(model.cost.size()) == S, "cost: one row per state required");
    if (!shape_ok) return report; // element checks would be misleading

    for (int i = 0; i < S; ++i) {
        const int A = model.num_actions(i);
        if (A < 1) add("state " + model.states[i] + ": needs at least one action");
        if (static_cast<int>(model.transition[i].size()) != A ||
            static_cast<int>(model.sojourn[i].size()) != A ||
            static_cast<int>(model.cost[i].size()) != A) {
            add("state " + model.states[i] + ": transition/sojourn/cost must have one entry per action");
            continue;
        }
        for (int a = 0; a < A; ++a) {
            const std::string loc = "(" + model.states[i] + "," + model.actions[i][a] + ")";
            const auto& row = model.transition[i][a];
            if (static_cast<int>(row.size()) != S) {
                add("transition row has wrong length at " + loc);
                continue;
            }
            double sum = 0;
            bool negative = false;
            for (double p : row) {
                if (p < 0) negative = true;
                sum += p;
            }
            if (negative) add("negative transition probability at " + loc);
            if (std::abs(sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "row not stochastic at " << loc << " (sums to " << sum << ")";
                add(os.str());
            }
            const double c = model.cost[i][a];
            if (c < 0) add("negative cost at " + loc);
            if (c > model.c_bar) add("cost exceeds c_bar at " + loc);
            if (static_cast<int>(model.sojourn[i][a].size()) != S) {
                add("sojourn needs one law per destination at " + loc);
                continue;
            }
            for (int j = 0; j < S; ++j) {
                if (row[j] <= 0) continue;
                if (model.sojourn[i][a][j].cdf(0.0) != 0.0)
                    add("sojourn law has mass at 0 for " + loc + "->" + model.states[j]);
            }
        }
    }
    return report;
}

Assumption1Certificate certify_assumption1(const SmdpModel& model, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("certify_assumption1: delta must be > 0");
    double worst = 0; // sup over (i,a) of Q(delta, E | i, a)
    for (int i = 0; i < model.num_states(); ++i) {
        for (int a = 0; a < model.num_actions(i); ++a) {
            double mass = 0;
            for (int j = 0; j < model.num_states(); ++j) {
                const double p = model.transition[i][a][j];
                if (p > 0) mass += p * model.sojourn[i][a][j].cdf(delta);
            }
            worst = std::max(worst, mass);
        }
    }
    const double epsilon = 1.0 - worst;
    if (!(epsilon > 0)) {
        std::ostringstream os;
        os << "no certificate at delta=" << delta << ": sup Q(delta,E|i,a)=" << worst
           << " leaves epsilon<=0; pick a smaller delta";
        throw NoCertificateError(os.str());
    }
    return Assumption1Certificate{delta, epsilon};
}

double default_certificate_delta(const SmdpModel& model) {
    double smallest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < model.num_states(); ++i)
        for (int a = 0; a < model.num_actions(i); ++a)
            for (int j = 0; j < model.num_states(); ++j)
                if (model.transition[i][a][j] > 0)
                    smallest = std::min(smallest, model.sojourn[i][a][j].quantile(0.1));
    if (!std::isfinite(smallest))
        throw std::invalid_argument("default_certificate_delta: model has no admissible transitions");
    return 0.5 * smallest;
}

double contraction_base(const Assumption1Certificate& cert, double alpha) {
    return 1.0 - cert.epsilon + cert.epsilon * std::exp(-alpha * cert.delta);
}

} // namespace smdp
