#pragma once

#include <string>
#include <variant>
#include <vector>

namespace smdp {

/// Sojourn-time law for one (state, action, destination) triple.
///
/// All kinds place zero mass at 0 and have a total mass of 1. The quantile
/// is the generalized inverse F^{-1}(p) = inf{s : F(s) >= p}, defined on
/// (0, 1); for the continuous kinds cdf(quantile(p)) == p up to rounding.
class SojournDist {
  public:
    struct Exponential { double rate; };
    struct Uniform { double lo, hi; };
    struct Weibull { double shape, scale; };
    struct Deterministic { double value; };
    struct Mixture {
        std::vector<double> weights;
        std::vector<SojournDist> components;
    };
    using Rep = std::variant<Exponential, Uniform, Weibull, Deterministic, Mixture>;

    static SojournDist exponential(double rate);
    static SojournDist uniform(double lo, double hi);
    static SojournDist weibull(double shape, double scale);
    static SojournDist deterministic(double value);
    static SojournDist mixture(std::vector<std::pair<double, SojournDist>> components);

    double cdf(double s) const;
    /// p must lie in (0,1); throws std::domain_error otherwise.
    double quantile(double p) const;

    /// True if the CDF is continuous (no deterministic atom anywhere).
    bool continuous() const;

    const Rep& rep() const { return rep_; }
    std::string describe() const;

  private:
    SojournDist() = default;
    Rep rep_;
};

} // namespace smdp
