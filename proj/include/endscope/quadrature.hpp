#pragma once

#include <functional>
#include <vector>

#include "endscope/verdict.hpp"

namespace endscope {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_depth = 48;
    int tail_windows = 6;      // dyadic windows used by every tail fit
    double tail_margin = 0.05; // half-width of the inconclusive band around exponent -1

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    /// Same config with both tolerances divided by `factor`.
    QuadratureConfig tightened(double factor) const;

    bool operator==(const QuadratureConfig&) const = default;
};

struct Estimate {
    double value = 0.0;
    double error_bound = 0.0;
};

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval.
///
/// The returned bound satisfies error_bound <= max(rel_tol * L1, abs_tol),
/// where L1 is the integral of |f|.  Throws MaxDepthExceeded (carrying the
/// partial value) when the bound cannot be met, and NonFiniteSample when f
/// returns inf or NaN.
Estimate integrate(const ScalarFn& f, double a, double b, const QuadratureConfig& cfg);

/// Integral of exp(log_f) over [a, b], computed as exp(shift) * integral of
/// exp(log_f - shift) with shift = max(log_f) on a coarse probe grid.
/// Returns {log value, relative error bound}; log value is -inf for a
/// vanishing integrand.
Estimate integrate_log(const ScalarFn& log_f, double a, double b, const QuadratureConfig& cfg);

/// Convergence classification of the integral of exp(log_f) over [a, inf).
///
/// The integrand is supplied through its logarithm so that Gaussian or
/// exponential tails can be fitted far past the range where the integrand
/// itself under- or overflows.  -inf means the integrand vanishes.
ConvergenceVerdict classify_improper_log(const ScalarFn& log_f, double a,
                                         const QuadratureConfig& cfg);

/// Same classification for an integrand given directly; f must be
/// eventually positive or eventually zero.
ConvergenceVerdict classify_improper(const ScalarFn& f, double a, const QuadratureConfig& cfg);

/// Value of a convergent improper integral.  Throws VerdictError when the
/// tail does not classify as Converges, or when the error bound could not
/// be driven below tolerance before the truncation cap 2^20 * max(a, 1).
Estimate improper_value_log(const ScalarFn& log_f, double a, const QuadratureConfig& cfg);
Estimate improper_value(const ScalarFn& f, double a, const QuadratureConfig& cfg);

/// Truncated-quadrature-plus-tail-remainder evaluation that starts doubling
/// the truncation point no earlier than `min_truncation`.  Used to
/// cross-check reported error bounds.
Converges evaluate_convergent_tail(const ScalarFn& log_f, double a, const TailModel& tail,
                                   const QuadratureConfig& cfg, double min_truncation = 0.0);

/// Running integral of exp(log_f) from a, kept in log form.  Breakpoints are
/// a, a + 1, a + 2, a + 4, ...; completed panels are cached, so the object is
/// not safe to share between threads.
class CumulativeLogIntegral {
public:
    CumulativeLogIntegral(ScalarFn log_f, double a, QuadratureConfig cfg);

    /// log of the integral over [a, t]; -inf at t == a.
    double log_integral_to(double t);

    /// log of the integral over breakpoint panel k ([a + 2^(k-1), a + 2^k],
    /// or [a, a + 1] for k = 0).
    double log_panel(int k);

    double breakpoint(int k) const;
    double start() const { return a_; }

private:
    void extend_to(int k);

    ScalarFn log_f_;
    double a_;
    QuadratureConfig cfg_;
    std::vector<double> log_panels_;
    std::vector<double> log_prefix_;  // log of integral over [a, breakpoint(k + 1)]
};

double log_add_exp(double x, double y);

}  // namespace endscope
