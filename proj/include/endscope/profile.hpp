#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "endscope/verdict.hpp"

namespace endscope {

/// Value and derivatives of a profile at one point.
///
/// `log_value`, `log_derivative` (f'/f) and `d2_over_value` (f''/f) are
/// evaluated analytically, so they stay exact in tails where `value`
/// underflows to zero or overflows.
struct ProfileJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double log_value = 0.0;
    double log_derivative = 0.0;
    double d2_over_value = 0.0;
};

/// f(t) = (t + offset)^exponent
struct PowerLaw {
    double exponent = 1.0;
    double offset = 0.0;
};

/// f(t) = exp(-(t/scale)^2)
struct GaussianNeck {
    double scale = 1.0;
};

/// f(t) = exp(rate * t)
struct ExpWarp {
    double rate = 1.0;
};

struct Constant {
    double c = 1.0;
};

/// Natural cubic spline through (knots, values).  Evaluation past the last
/// knot is refused unless a tail model is attached; a PowerTail or ExpTail
/// continues the last knot value with that law.
struct Sampled {
    std::vector<double> knots;
    std::vector<double> values;
    std::optional<TailModel> tail;
};

/// A positive C^2 scalar function on a half-line [t_min, inf).
class ProfileFn {
public:
    using Family = std::variant<PowerLaw, GaussianNeck, ExpWarp, Constant, Sampled>;

    /// t_min defaults per family: 1 - offset for PowerLaw, the first knot
    /// for Sampled, -inf otherwise.
    explicit ProfileFn(Family family, std::optional<double> t_min = std::nullopt);

    static ProfileFn power(double exponent, double offset = 0.0,
                           std::optional<double> t_min = std::nullopt);
    static ProfileFn gaussian_neck(double scale = 1.0);
    static ProfileFn exp_warp(double rate = 1.0);
    static ProfileFn constant(double c = 1.0);
    static ProfileFn sampled(std::vector<double> knots, std::vector<double> values,
                             std::optional<TailModel> tail = std::nullopt);

    /// Throws DomainError for t < t_min, t past the last knot of an untailed
    /// sampled profile, or a non-positive value.
    ProfileJet jet(double t) const;

    double value(double t) const { return jet(t).value; }
    double derivative(double t) const { return jet(t).d1; }
    double second_derivative(double t) const { return jet(t).d2; }
    double log_value(double t) const { return jet(t).log_value; }

    double t_min() const { return t_min_; }
    /// Upper end of the evaluable range (finite only for untailed samples).
    double t_max() const;

    const Family& family() const { return family_; }
    std::string family_name() const;

private:
    ProfileJet sampled_jet(const Sampled& s, double t) const;

    Family family_;
    double t_min_;
    std::vector<double> spline_second_;
};

}  // namespace endscope
