#pragma once

#include <functional>
#include <string>
#include <utility>

#include "endscope/quadrature.hpp"

namespace endscope {

enum class SlopeBehavior {
    Settled,      // log-log slopes converged to `exponent`
    RunawayDown,  // slopes decrease without bound (exponential or Gaussian decay)
    RunawayUp,    // slopes increase without bound, or the function overflowed
    Vanishing,    // the function is identically zero from some window on
    Unsettled,    // ran out of windows
    Invalid,      // evaluation failed or produced NaN
};

struct SlopeFit {
    SlopeBehavior behavior = SlopeBehavior::Unsettled;
    double exponent = 0.0;         // extrapolated slope (Settled) or last slope
    double last_slope = 0.0;
    double log_linear_rate = 0.0;  // d(log y)/dx over the last window, x linear
    double x_last = 0.0;           // abscissa of the last window's right end
    int windows = 0;               // number of sample points consumed
    std::string reason;
};

/// A sample (x, log y) at window index k.  Throwing DomainError ends the
/// scan with SlopeBehavior::Invalid.
using WindowSample = std::function<std::pair<double, double>(int)>;

/// Slope analysis of log y against log x over successive windows.
///
/// Settled means the last `tail_windows` slopes spread by at most
/// tail_margin / 10; the reported exponent is then Aitken-extrapolated when
/// the slope increments shrink geometrically.  Runaway means the last
/// slopes move monotonically with non-shrinking increments and already
/// exceed 8 in magnitude.
SlopeFit fit_window_slopes(const WindowSample& sample, int max_windows,
                           const QuadratureConfig& cfg);

/// fit_window_slopes with x_k = max(a, 1) * 2^k and y = exp(log_f(x)),
/// scanning up to x ~ 1e150.
SlopeFit fit_log_tail(const ScalarFn& log_f, double a, const QuadratureConfig& cfg);

/// Largest window count whose dyadic abscissa stays below ~1e150.
int max_dyadic_windows(double base);

}  // namespace endscope
