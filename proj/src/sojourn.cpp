#include "smdp/sojourn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace smdp {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

SojournDist SojournDist::exponential(double rate) {
    require(std::isfinite(rate) && rate > 0, "exponential sojourn: rate must be > 0");
    SojournDist d;
    d.rep_ = Exponential{rate};
    return d;
}

SojournDist SojournDist::uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo >= 0 && lo < hi,
            "uniform sojourn: need 0 <= lo < hi");
    SojournDist d;
    d.rep_ = Uniform{lo, hi};
    return d;
}

SojournDist SojournDist::weibull(double shape, double scale) {
    require(std::isfinite(shape) && shape > 0 && std::isfinite(scale) && scale > 0,
            "weibull sojourn: shape and scale must be > 0");
    SojournDist d;
    d.rep_ = Weibull{shape, scale};
    return d;
}

SojournDist SojournDist::deterministic(double value) {
    require(std::isfinite(value) && value > 0, "deterministic sojourn: value must be > 0");
    SojournDist d;
    d.rep_ = Deterministic{value};
    return d;
}

SojournDist SojournDist::mixture(std::vector<std::pair<double, SojournDist>> components) {
    require(!components.empty(), "mixture sojourn: needs at least one component");
    Mixture mix;
    double total = 0;
    for (auto& [w, comp] : components) {
        require(std::isfinite(w) && w > 0, "mixture sojourn: weights must be > 0");
        total += w;
        mix.weights.push_back(w);
        mix.components.push_back(std::move(comp));
    }
    require(std::abs(total - 1.0) <= 1e-10, "mixture sojourn: weights must sum to 1");
    // renormalize the rounding residue so the CDF tops out at exactly 1
    for (auto& w : mix.weights) w /= total;
    SojournDist d;
    d.rep_ = Mixture{std::move(mix.weights), std::move(mix.components)};
    return d;
}

double SojournDist::cdf(double s) const {
    if (!(s >= 0)) throw std::domain_error("sojourn cdf: s must be >= 0");
    return std::visit(
        [s](const auto& rep) -> double {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-rep.rate * s);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (s <= rep.lo) return 0.0;
                if (s >= rep.hi) return 1.0;
                return (s - rep.lo) / (rep.hi - rep.lo);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return -std::expm1(-std::pow(s / rep.scale, rep.shape));
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return s >= rep.value ? 1.0 : 0.0;
            } else {
                double acc = 0;
                for (std::size_t k = 0; k < rep.components.size(); ++k)
                    acc += rep.weights[k] * rep.components[k].cdf(s);
                return acc;
            }
        },
        rep_);
}

double SojournDist::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("sojourn quantile: p must lie in (0,1)");
    return std::visit(
        [p, this](const auto& rep) -> double {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-p) / rep.rate;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return rep.lo + p * (rep.hi - rep.lo);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return rep.scale * std::pow(-std::log1p(-p), 1.0 / rep.shape);
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                return rep.value;
            } else {
                // leftmost s with cdf(s) >= p, by bracketing + bisection
                double hi = 1.0;
                while (cdf(hi) < p) {
                    hi *= 2;
                    if (hi > 1e300) return hi;
                }
                double lo = 0.0;
                for (int iter = 0; iter < 200 && (hi - lo) > 1e-15 * std::max(1.0, hi); ++iter) {
                    double mid = 0.5 * (lo + hi);
                    if (cdf(mid) >= p)
                        hi = mid;
                    else
                        lo = mid;
                }
                return hi;
            }
        },
        rep_);
}

bool SojournDist::continuous() const {
    return std::visit(
        [](const auto& rep) -> bool {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return false;
            } else if constexpr (std::is_same_v<T, Mixture>) {
                return std::all_of(rep.components.begin(), rep.components.end(),
                                   [](const SojournDist& c) { return c.continuous(); });
            } else {
                return true;
            }
        },
        rep_);
}

std::string SojournDist::describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& rep) {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                os << "exponential(rate=" << rep.rate << ")";
            } else if constexpr (std::is_same_v<T, Uniform>) {
                os << "uniform(" << rep.lo << "," << rep.hi << ")";
            } else if constexpr (std::is_same_v<T, Weibull>) {
                os << "weibull(shape=" << rep.shape << ",scale=" << rep.scale << ")";
            } else if constexpr (std::is_same_v<T, Deterministic>) {
                os << "deterministic(" << rep.value << ")";
            } else {
                os << "mixture(" << rep.components.size() << " components)";
            }
        },
        rep_);
    return os.str();
}

} // namespace smdp
