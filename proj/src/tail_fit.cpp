#include "endscope/tail_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "endscope/errors.hpp"

namespace endscope {

namespace {

constexpr double kRunawaySlope = 8.0;
constexpr int kVanishingRun = 3;

}  // namespace

int max_dyadic_windows(double base) {
    return std::max(8, static_cast<int>(std::floor(std::log2(1e150 / std::max(base, 1.0)))));
}

SlopeFit fit_window_slopes(const WindowSample& sample, int max_windows,
                           const QuadratureConfig& cfg) {
    const std::size_t window = static_cast<std::size_t>(std::max(cfg.tail_windows, 3));
    const double settle_tol = cfg.tail_margin / 10.0;

    SlopeFit fit;
    std::vector<double> slopes;
    double prev_x = std::numeric_limits<double>::quiet_NaN();
    double prev_ly = std::numeric_limits<double>::quiet_NaN();
    int zero_run = 0;

    for (int k = 0; k < max_windows; ++k) {
        std::pair<double, double> s;
        try {
            s = sample(k);
        } catch (const DomainError& e) {
            fit.behavior = SlopeBehavior::Invalid;
            fit.reason = e.what();
            return fit;
        }
        const auto [x, ly] = s;
        fit.windows = k + 1;
        fit.x_last = x;
        if (std::isnan(ly) || !(x > 0.0) || !std::isfinite(x)) {
            fit.behavior = SlopeBehavior::Invalid;
            fit.reason = "non-finite sample at x = " + std::to_string(x);
            return fit;
        }
        if (ly == std::numeric_limits<double>::infinity()) {
            fit.behavior = SlopeBehavior::RunawayUp;
            fit.reason = "function overflowed at x = " + std::to_string(x);
            fit.exponent = fit.last_slope = std::numeric_limits<double>::infinity();
            return fit;
        }
        if (ly == -std::numeric_limits<double>::infinity()) {
            if (++zero_run >= kVanishingRun) {
                fit.behavior = SlopeBehavior::Vanishing;
                fit.exponent = fit.last_slope = -std::numeric_limits<double>::infinity();
                return fit;
            }
            prev_x = std::numeric_limits<double>::quiet_NaN();
            slopes.clear();
            continue;
        }
        zero_run = 0;
        if (!std::isnan(prev_x)) {
            const double slope = (ly - prev_ly) / (std::log(x) - std::log(prev_x));
            fit.log_linear_rate = (ly - prev_ly) / (x - prev_x);
            slopes.push_back(slope);
            fit.last_slope = slope;
            fit.exponent = slope;
        }
        prev_x = x;
        prev_ly = ly;

        if (slopes.size() < window) continue;
        const auto last = slopes.end() - static_cast<std::ptrdiff_t>(window);
        const std::vector<double> recent(last, slopes.end());

        // Runaway: monotone slopes whose increments do not shrink.
        bool monotone = true;
        bool non_shrinking = true;
        double prev_diff = 0.0;
        for (std::size_t j = 1; j < recent.size(); ++j) {
            const double d = recent[j] - recent[j - 1];
            if (j > 1) {
                if (d * prev_diff <= 0.0) monotone = false;
                if (std::abs(d) < std::abs(prev_diff)) non_shrinking = false;
            }
            prev_diff = d;
        }
        if (monotone && non_shrinking && std::abs(recent.back()) > kRunawaySlope) {
            fit.behavior = recent.back() < 0.0 ? SlopeBehavior::RunawayDown : SlopeBehavior::RunawayUp;
            return fit;
        }

        const auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
        if (*hi - *lo <= settle_tol) {
            fit.behavior = SlopeBehavior::Settled;
            const double d1 = recent[recent.size() - 2] - recent[recent.size() - 3];
            const double d2 = recent.back() - recent[recent.size() - 2];
            double estimate = recent.back();
            if (d1 != 0.0) {
                const double rho = d2 / d1;
                if (rho > 0.0 && rho < 0.95) estimate += d2 * rho / (1.0 - rho);
            }
            fit.exponent = estimate;
            return fit;
        }
    }
    fit.behavior = SlopeBehavior::Unsettled;
    fit.reason = "tail slopes did not settle within the window budget";
    return fit;
}

SlopeFit fit_log_tail(const ScalarFn& log_f, double a, const QuadratureConfig& cfg) {
    const double base = std::max(a, 1.0);
    return fit_window_slopes(
        [&](int k) {
            const double x = std::ldexp(base, k);
            return std::make_pair(x, log_f(x));
        },
        max_dyadic_windows(base), cfg);
}

}  // namespace endscope
