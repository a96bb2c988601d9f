#pragma once

#include "smdp/sojourn.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace smdp {

/// Finite semi-Markov decision model with discounted running cost.
///
/// The jump kernel is factored as P(j|i,a) * F(ds|i,a,j): a row-stochastic
/// transition matrix per (state, action) and a sojourn law per destination.
/// Cost rates are bounded by c_bar and discounting is continuous at rate
/// alpha, so the discounted cost accumulated from time 0 can never exceed
/// c_bar / alpha.
struct SmdpModel {
    std::vector<std::string> states;
    std::vector<std::vector<std::string>> actions; // per state
    // transition[i][a][j], row-stochastic over j
    std::vector<std::vector<std::vector<double>>> transition;
    // sojourn[i][a][j]; entries with transition[i][a][j] == 0 are never used
    std::vector<std::vector<std::vector<SojournDist>>> sojourn;
    std::vector<std::vector<double>> cost; // cost[i][a], rate in [0, c_bar]
    double c_bar = 0;
    double alpha = 0;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions(int i) const { return static_cast<int>(actions.at(i).size()); }
    /// Upper bound on accumulated discounted cost, c_bar / alpha.
    double lambda_max() const { return c_bar / alpha; }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const;
};

/// Checks every model invariant and reports all violations found.
/// Violations are data, not failures: an invalid model simply yields a
/// non-empty report.
ValidationReport validate(const SmdpModel& model);

/// Witness that every sojourn exceeds delta with probability >= epsilon:
/// sup_{(i,a)} sum_j P(j|i,a) F(delta|i,a,j) <= 1 - epsilon.
struct Assumption1Certificate {
    double delta = 0;
    double epsilon = 0;
};

class NoCertificateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Computes the certificate for a given delta; throws NoCertificateError
/// when the kernel puts full mass below delta for some (i,a).
Assumption1Certificate certify_assumption1(const SmdpModel& model, double delta);

/// Default delta choice: half the smallest 10th-percentile sojourn time
/// over admissible (i,a,j).
double default_certificate_delta(const SmdpModel& model);

/// Geometric decay base rho = 1 - eps + eps * exp(-alpha * delta) in (0,1);
/// bounds E[e^{-alpha T_n}] <= rho^n under any policy.
double contraction_base(const Assumption1Certificate& cert, double alpha);

} // namespace smdp
