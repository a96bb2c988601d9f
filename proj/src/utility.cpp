#include "smdp/utility.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace smdp {

Utility Utility::linear() { return Utility(UtilityKind::linear, Shape::linear, 0, 0, 0); }

Utility Utility::exponential(double gamma) {
    if (!(std::isfinite(gamma)) || gamma == 0)
        throw std::invalid_argument("exponential utility: gamma must be nonzero");
    return Utility(UtilityKind::exponential, gamma > 0 ? Shape::convex : Shape::concave, gamma, 0, 0);
}

Utility Utility::power(double p, double eta) {
    if (!(std::isfinite(p) && p > 0) || p == 1.0)
        throw std::invalid_argument("power utility: need p > 0, p != 1");
    if (p < 1 && !(std::isfinite(eta) && eta > 0))
        throw std::invalid_argument("power utility: concave branch needs shift eta > 0");
    return Utility(UtilityKind::power, p > 1 ? Shape::convex : Shape::concave, 0, p, p < 1 ? eta : 0.0);
}

Utility Utility::log1p() { return Utility(UtilityKind::log1p, Shape::concave, 0, 0, 0); }

double Utility::eval(double lam) const {
    if (!(lam >= 0)) throw std::domain_error("utility: lam must be >= 0");
    switch (kind_) {
        case UtilityKind::linear: return lam;
        case UtilityKind::exponential: return std::exp(gamma_ * lam) / gamma_;
        case UtilityKind::power:
            if (p_ > 1) return std::pow(lam, p_);
            return std::pow(lam + eta_, p_) - std::pow(eta_, p_);
        case UtilityKind::log1p: return std::log1p(lam);
    }
    throw std::logic_error("utility: unknown kind");
}

double Utility::deriv(double lam) const {
    if (!(lam >= 0)) throw std::domain_error("utility derivative: lam must be >= 0");
    switch (kind_) {
        case UtilityKind::linear: return 1.0;
        case UtilityKind::exponential: return std::exp(gamma_ * lam);
        case UtilityKind::power:
            if (p_ > 1) return p_ * std::pow(lam, p_ - 1.0);
            return p_ * std::pow(lam + eta_, p_ - 1.0);
        case UtilityKind::log1p: return 1.0 / (1.0 + lam);
    }
    throw std::logic_error("utility: unknown kind");
}

double Utility::deriv_left(double lam) const { return deriv(lam); }
double Utility::deriv_right(double lam) const { return deriv(lam); }

std::string Utility::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case UtilityKind::linear: os << "linear"; break;
        case UtilityKind::exponential: os << "exponential(gamma=" << gamma_ << ")"; break;
        case UtilityKind::power:
            os << "power(p=" << p_;
            if (p_ < 1) os << ",eta=" << eta_;
            os << ")";
            break;
        case UtilityKind::log1p: os << "log1p"; break;
    }
    return os.str();
}

} // namespace smdp
