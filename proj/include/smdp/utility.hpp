#pragma once

#include <string>

namespace smdp {

enum class UtilityKind { linear, exponential, power, log1p };

/// Shape class of the utility; linear counts as both concave and convex.
enum class Shape { concave, convex, linear };

/// Utility function on [0, inf): continuous, strictly increasing, with
/// closed-form one-sided derivatives. A closed enumeration rather than a
/// callback so the shape class and the derivatives used by the error
/// bounds are always available.
///
/// Kinds:
///   linear            U(x) = x
///   exponential(g)    U(x) = (1/g) e^{g x},  g != 0; convex for g > 0,
///                     concave for g < 0
///   power(p)          p > 1: U(x) = x^p (convex);
///                     p < 1: U(x) = (x+eta)^p - eta^p (concave; the shift
///                     eta > 0 keeps the derivative at 0 finite)
///   log1p             U(x) = ln(1+x) (concave)
class Utility {
  public:
    static Utility linear();
    static Utility exponential(double gamma);
    static Utility power(double p, double eta = 1e-3);
    static Utility log1p();

    /// Evaluates U(lam); lam must be >= 0.
    double eval(double lam) const;
    double operator()(double lam) const { return eval(lam); }

    // One-sided derivatives; the implemented kinds are smooth on (0, inf)
    // so both sides coincide, and at 0 both return the right derivative.
    double deriv_left(double lam) const;
    double deriv_right(double lam) const;

    Shape shape() const { return shape_; }
    bool is_concave() const { return shape_ != Shape::convex; }
    bool is_convex() const { return shape_ != Shape::concave; }

    UtilityKind kind() const { return kind_; }
    /// Risk parameter; only meaningful for the exponential kind.
    double gamma() const { return gamma_; }
    double power_exponent() const { return p_; }
    double power_shift() const { return eta_; }

    std::string describe() const;

  private:
    Utility(UtilityKind kind, Shape shape, double gamma, double p, double eta)
        : kind_(kind), shape_(shape), gamma_(gamma), p_(p), eta_(eta) {}

    double deriv(double lam) const;

    UtilityKind kind_;
    Shape shape_;
    double gamma_ = 0; // exponential
    double p_ = 0;     // power
    double eta_ = 0;   // power, concave branch shift
};

} // namespace smdp
