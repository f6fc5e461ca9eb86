#include "endscope/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "endscope/errors.hpp"
#include "endscope/tridiagonal.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ProfileJet from_log(double log_value, double log_derivative, double d2_over_value) {
    ProfileJet j;
    j.log_value = log_value;
    j.value = std::exp(log_value);
    j.log_derivative = log_derivative;
    j.d2_over_value = d2_over_value;
    j.d1 = log_derivative * j.value;
    j.d2 = d2_over_value * j.value;
    return j;
}

ProfileJet from_value(double value, double d1, double d2) {
    ProfileJet j;
    j.value = value;
    j.d1 = d1;
    j.d2 = d2;
    j.log_value = std::log(value);
    j.log_derivative = d1 / value;
    j.d2_over_value = d2 / value;
    return j;
}

double default_t_min(const ProfileFn::Family& family) {
    return std::visit(Overloaded{
                          [](const PowerLaw& p) { return 1.0 - p.offset; },
                          [](const Sampled& s) { return s.knots.empty() ? 0.0 : s.knots.front(); },
                          [](const auto&) { return -kInf; },
                      },
                      family);
}

// Second derivatives of the natural cubic spline through the knots.
std::vector<double> natural_spline_moments(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> moments(n, 0.0);
    if (n < 3) return moments;
    const std::size_t k = n - 2;
    std::vector<double> lower(k > 0 ? k - 1 : 0), diag(k), upper(k > 0 ? k - 1 : 0), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        if (i + 2 < n) upper[i - 1] = h1;
        if (i > 1) lower[i - 2] = h0;
        rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    const auto inner = solve_tridiagonal(lower, diag, upper, rhs);
    std::copy(inner.begin(), inner.end(), moments.begin() + 1);
    return moments;
}

}  // namespace

ProfileFn::ProfileFn(Family family, std::optional<double> t_min)
    : family_(std::move(family)), t_min_(t_min.value_or(default_t_min(family_))) {
    std::visit(
        Overloaded{
            [this](const PowerLaw& p) {
                if (!std::isfinite(p.exponent) || !std::isfinite(p.offset)) {
                    throw DomainError("power profile needs finite exponent and offset");
                }
                if (!(t_min_ + p.offset > 0.0)) {
                    throw DomainError("power profile must start where t + offset > 0");
                }
            },
            [](const GaussianNeck& g) {
                if (!(g.scale > 0.0) || !std::isfinite(g.scale)) {
                    throw DomainError("gaussian neck scale must be positive");
                }
            },
            [](const ExpWarp& e) {
                if (!std::isfinite(e.rate)) throw DomainError("exp warp rate must be finite");
            },
            [](const Constant& c) {
                if (!(c.c > 0.0) || !std::isfinite(c.c)) {
                    throw DomainError("constant profile must be positive");
                }
            },
            [this](const Sampled& s) {
                if (s.knots.size() < 3 || s.knots.size() != s.values.size()) {
                    throw DomainError("sampled profile needs at least 3 knots with matching values");
                }
                for (std::size_t i = 0; i < s.knots.size(); ++i) {
                    if (!std::isfinite(s.knots[i]) || !(s.values[i] > 0.0)) {
                        throw DomainError("sampled profile knots must be finite with positive values");
                    }
                    if (i > 0 && !(s.knots[i] > s.knots[i - 1])) {
                        throw DomainError("sampled profile knots must be strictly increasing");
                    }
                }
                if (t_min_ < s.knots.front()) {
                    throw DomainError("sampled profile cannot extrapolate below its first knot");
                }
                if (s.tail) {
                    if (const auto* p = std::get_if<PowerTail>(&*s.tail);
                        p && !(s.knots.back() > 0.0)) {
                        throw DomainError("power tail needs a positive last knot");
                    }
                }
                spline_second_ = natural_spline_moments(s.knots, s.values);
            },
        },
        family_);
    if (std::isnan(t_min_)) throw DomainError("t_min must not be NaN");
}

ProfileFn ProfileFn::power(double exponent, double offset, std::optional<double> t_min) {
    return ProfileFn(PowerLaw{exponent, offset}, t_min);
}

ProfileFn ProfileFn::gaussian_neck(double scale) { return ProfileFn(GaussianNeck{scale}); }

ProfileFn ProfileFn::exp_warp(double rate) { return ProfileFn(ExpWarp{rate}); }

ProfileFn ProfileFn::constant(double c) { return ProfileFn(Constant{c}); }

ProfileFn ProfileFn::sampled(std::vector<double> knots, std::vector<double> values,
                             std::optional<TailModel> tail) {
    return ProfileFn(Sampled{std::move(knots), std::move(values), std::move(tail)});
}

double ProfileFn::t_max() const {
    if (const auto* s = std::get_if<Sampled>(&family_)) {
        if (!s->tail || std::holds_alternative<UnknownTail>(*s->tail)) return s->knots.back();
    }
    return kInf;
}

std::string ProfileFn::family_name() const {
    return std::visit(Overloaded{
                          [](const PowerLaw&) { return std::string("power"); },
                          [](const GaussianNeck&) { return std::string("gaussian_neck"); },
                          [](const ExpWarp&) { return std::string("exp_warp"); },
                          [](const Constant&) { return std::string("constant"); },
                          [](const Sampled&) { return std::string("sampled"); },
                      },
                      family_);
}

ProfileJet ProfileFn::jet(double t) const {
    if (std::isnan(t) || t < t_min_) {
        std::ostringstream msg;
        msg << family_name() << " profile evaluated at t = " << t << " below t_min = " << t_min_;
        throw DomainError(msg.str());
    }
    ProfileJet j = std::visit(
        Overloaded{
            [t](const PowerLaw& p) {
                const double x = t + p.offset;
                const double a = p.exponent;
                return from_log(a * std::log(x), a / x, a * (a - 1.0) / (x * x));
            },
            [t](const GaussianNeck& g) {
                const double s2 = g.scale * g.scale;
                return from_log(-t * t / s2, -2.0 * t / s2, 4.0 * t * t / (s2 * s2) - 2.0 / s2);
            },
            [t](const ExpWarp& e) { return from_log(e.rate * t, e.rate, e.rate * e.rate); },
            [](const Constant& c) { return from_value(c.c, 0.0, 0.0); },
            [this, t](const Sampled& s) { return sampled_jet(s, t); },
        },
        family_);
    if (!std::isfinite(j.log_value)) {
        std::ostringstream msg;
        msg << family_name() << " profile is not positive at t = " << t;
        throw DomainError(msg.str());
    }
    return j;
}

ProfileJet ProfileFn::sampled_jet(const Sampled& s, double t) const {
    const auto& x = s.knots;
    const auto& y = s.values;
    if (t > x.back()) {
        const double tn = x.back();
        const double vn = y.back();
        if (s.tail) {
            if (const auto* p = std::get_if<PowerTail>(&*s.tail)) {
                const double b = p->exponent;
                return from_log(std::log(vn) + b * std::log(t / tn), b / t, b * (b - 1.0) / (t * t));
            }
            if (const auto* e = std::get_if<ExpTail>(&*s.tail)) {
                return from_log(std::log(vn) + e->rate * (t - tn), e->rate, e->rate * e->rate);
            }
        }
        std::ostringstream msg;
        msg << "sampled profile has no tail model beyond t = " << tn << " (asked " << t << ")";
        throw DomainError(msg.str());
    }
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h;
    const double B = (t - x[i]) / h;
    const double m0 = spline_second_[i];
    const double m1 = spline_second_[i + 1];
    const double value =
        A * y[i] + B * y[i + 1] + ((A * A * A - A) * m0 + (B * B * B - B) * m1) * h * h / 6.0;
    const double d1 = (y[i + 1] - y[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m0 +
                      (3.0 * B * B - 1.0) / 6.0 * h * m1;
    const double d2 = A * m0 + B * m1;
    if (!(value > 0.0)) {
        std::ostringstream msg;
        msg << "sampled profile interpolant is not positive at t = " << t;
        throw DomainError(msg.str());
    }
    return from_value(value, d1, d2);
}

}  // namespace endscope
