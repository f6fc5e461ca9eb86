#include "endscope/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "endscope/errors.hpp"
#include "endscope/tail_fit.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kTruncationCapDoublings = 20;
// Bound on rule evaluations per finite integral.
constexpr int kMaxPanelEvaluations = 4001;
// c/t tails: log(t f(t)) must spread by less than this over the fit windows.
constexpr double kLogTailSpread = 2e-4;
// c/t tails: window integral over [T, 2T] must be within this of c log 2.
constexpr double kLogTailWindowTol = 1e-2;

double remainder_estimate(const ScalarFn& log_f, double T, const TailModel& tail) {
    const double lt = log_f(T);
    if (lt == -kInf) return 0.0;
    if (std::holds_alternative<PowerTail>(tail)) {
        const double local = (log_f(2.0 * T) - lt) / std::log(2.0);
        if (!(local < -1.0 - 1e-3)) return kNaN;
        return std::exp(lt) * T / (-local - 1.0);
    }
    if (std::holds_alternative<ExpTail>(tail)) {
        const double h = 1e-4 * T;
        const double rate = (log_f(T + h) - lt) / h;
        if (!(rate < 0.0)) return kNaN;
        return std::exp(lt) / -rate;
    }
    return 0.0;
}

// Dedicated test for tails f ~ c / t: t f(t) settles to a constant and the
// window integrals approach c log 2.
bool log_tail_detected(const ScalarFn& log_f, double base, int first_window,
                       const QuadratureConfig& cfg) {
    const std::size_t window = static_cast<std::size_t>(std::max(cfg.tail_windows, 3));
    std::vector<double> c;
    const int max_windows = max_dyadic_windows(base);
    for (int k = std::max(first_window - static_cast<int>(window), 0); k < max_windows; ++k) {
        const double x = std::ldexp(base, k);
        const double lx = log_f(x);
        if (!std::isfinite(lx)) return false;
        c.push_back(lx + std::log(x));
        if (c.size() < window) continue;
        const auto first = c.end() - static_cast<std::ptrdiff_t>(window);
        const auto [lo, hi] = std::minmax_element(first, c.end());
        if (*hi - *lo > kLogTailSpread) continue;
        QuadratureConfig loose = cfg;
        loose.rel_tol = std::max(cfg.rel_tol, 1e-8);
        const Estimate j = integrate([&](double t) { return std::exp(log_f(t) - lx); }, x,
                                     2.0 * x, loose);
        return std::abs(j.value / (x * std::log(2.0)) - 1.0) <= kLogTailWindowTol;
    }
    return false;
}

}  // namespace

std::string describe(const TailModel& tail) {
    std::ostringstream out;
    if (const auto* p = std::get_if<PowerTail>(&tail)) {
        out << "power tail t^" << p->exponent;
    } else if (const auto* e = std::get_if<ExpTail>(&tail)) {
        out << "exponential-type tail, log-rate " << e->rate;
    } else {
        out << "unknown tail";
    }
    return out.str();
}

std::string describe(const ConvergenceVerdict& verdict) {
    std::ostringstream out;
    if (const auto* c = std::get_if<Converges>(&verdict)) {
        out << "Converges(" << c->value << " +/- " << c->error_bound << ", " << describe(c->tail)
            << (c->within_tolerance ? "" : ", tolerance not met") << ")";
    } else if (const auto* d = std::get_if<Diverges>(&verdict)) {
        out << "Diverges(" << describe(d->rate) << ")";
    } else {
        out << "Inconclusive(" << std::get<Inconclusive>(verdict).reason << ")";
    }
    return out.str();
}

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw ConfigError("quadrature tolerances must be positive");
    }
    if (max_depth < 1 || max_depth > 64) throw ConfigError("quadrature max_depth must be in [1, 64]");
    if (tail_windows < 3) throw ConfigError("quadrature tail_windows must be at least 3");
    if (!(tail_margin > 0.0) || !(tail_margin < 0.5)) {
        throw ConfigError("quadrature tail_margin must be in (0, 0.5)");
    }
}

QuadratureConfig QuadratureConfig::tightened(double factor) const {
    QuadratureConfig out = *this;
    out.rel_tol /= factor;
    out.abs_tol /= factor;
    return out;
}

double log_add_exp(double x, double y) {
    if (x == -kInf) return y;
    if (y == -kInf) return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(-std::abs(x - y)));
}

Estimate integrate(const ScalarFn& f, double a, double b, const QuadratureConfig& cfg) {
    if (std::isnan(a) || std::isnan(b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw QuadratureError("integration limits must be finite");
    }
    if (a == b) return {0.0, 0.0};
    if (a > b) {
        const Estimate e = integrate(f, b, a, cfg);
        return {-e.value, e.error_bound};
    }
    auto checked = [&f](double t) {
        const double v = f(t);
        if (!std::isfinite(v)) throw NonFiniteSample(t);
        return v;
    };
    using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;

    // Globally adaptive: always bisect the panel with the largest error.
    struct Panel {
        double lo, hi, value, error, l1;
        int depth;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto eval = [&](double lo, double hi, int depth) {
        Panel p{lo, hi, 0.0, 0.0, 0.0, depth};
        p.value = Rule::integrate(checked, lo, hi, 0, 0.0, &p.error, &p.l1);
        // The single-rule error comes back on the reference interval [-1, 1].
        p.error *= 0.5 * (hi - lo);
        return p;
    };

    std::priority_queue<Panel> heap;
    std::vector<Panel> finished;  // panels at max depth
    Panel first = eval(a, b, 0);
    double value = first.value;
    double error = first.error;
    double l1 = first.l1;
    heap.push(first);
    int evaluations = 1;
    auto allowed = [&] { return std::max(cfg.rel_tol * std::max(l1, std::abs(value)), cfg.abs_tol); };
    while (error > allowed() && !heap.empty() && evaluations < kMaxPanelEvaluations) {
        const Panel p = heap.top();
        heap.pop();
        if (p.depth >= cfg.max_depth) {
            finished.push_back(p);
            continue;
        }
        const double mid = 0.5 * (p.lo + p.hi);
        const Panel left = eval(p.lo, mid, p.depth + 1);
        const Panel right = eval(mid, p.hi, p.depth + 1);
        evaluations += 2;
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        l1 += left.l1 + right.l1 - p.l1;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to drop the drift of the running updates.
    value = 0.0;
    error = 0.0;
    l1 = 0.0;
    for (const Panel& p : finished) {
        value += p.value;
        error += p.error;
        l1 += p.l1;
    }
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        l1 += heap.top().l1;
        heap.pop();
    }
    if (error > allowed()) throw MaxDepthExceeded(value, error);
    return {value, error};
}

Estimate integrate_log(const ScalarFn& log_f, double a, double b, const QuadratureConfig& cfg) {
    if (a == b) return {-kInf, 0.0};
    double shift = -kInf;
    constexpr int kProbes = 16;
    for (int i = 0; i <= kProbes; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / kProbes;
        const double v = log_f(t);
        if (std::isnan(v) || v == kInf) throw NonFiniteSample(t);
        shift = std::max(shift, v);
    }
    if (shift == -kInf) return {-kInf, 0.0};
    QuadratureConfig scaled = cfg;
    scaled.abs_tol = cfg.abs_tol * 1e-30;
    const Estimate e = integrate([&](double t) { return std::exp(log_f(t) - shift); }, a, b, scaled);
    if (!(e.value > 0.0)) return {-kInf, 0.0};
    return {std::log(e.value) + shift, e.error_bound / e.value};
}

Converges evaluate_convergent_tail(const ScalarFn& log_f, double a, const TailModel& tail,
                                   const QuadratureConfig& cfg, double min_truncation) {
    const double base = std::max(a, 1.0);
    const double cap = std::ldexp(base, kTruncationCapDoublings) * std::max(1.0, min_truncation / base);
    auto f = [&log_f](double t) { return std::exp(log_f(t)); };

    double sum = 0.0;
    double quad_err = 0.0;
    if (a < base) {
        const Estimate pre = integrate(f, a, base, cfg);
        sum = pre.value;
        quad_err = pre.error_bound;
    }

    Converges best;
    best.tail = tail;
    best.error_bound = kInf;
    best.within_tolerance = false;
    double prev_estimate = kNaN;
    double prev_change = kNaN;
    for (double lo = base;; lo *= 2.0) {
        const double hi = 2.0 * lo;
        const Estimate panel = integrate(f, lo, hi, cfg);
        sum += panel.value;
        quad_err += panel.error_bound;
        const double remainder = hi >= min_truncation ? remainder_estimate(log_f, hi, tail) : kNaN;
        if (std::isfinite(remainder)) {
            const double estimate = sum + remainder;
            if (!std::isnan(prev_estimate)) {
                const double change = std::abs(estimate - prev_estimate);
                if (!std::isnan(prev_change)) {
                    double tail_err = kInf;
                    if (change == 0.0) {
                        tail_err = 0.0;
                    } else if (prev_change > 0.0 && change < prev_change) {
                        tail_err = change / (1.0 - change / prev_change);
                    }
                    const double err = tail_err + quad_err +
                                       4.0 * std::numeric_limits<double>::epsilon() * std::abs(estimate);
                    if (err <= best.error_bound) {
                        best.value = estimate;
                        best.error_bound = err;
                        best.truncation = hi;
                    }
                    if (err <= std::max(cfg.rel_tol * std::abs(estimate), cfg.abs_tol)) {
                        best.value = estimate;
                        best.error_bound = err;
                        best.truncation = hi;
                        best.within_tolerance = true;
                        return best;
                    }
                }
                prev_change = change;
            }
            prev_estimate = estimate;
        }
        if (hi >= cap) break;
    }
    if (!std::isfinite(best.error_bound)) {
        best.value = std::isnan(prev_estimate) ? sum : prev_estimate;
        best.truncation = cap;
    }
    return best;
}

ConvergenceVerdict classify_improper_log(const ScalarFn& log_f, double a,
                                         const QuadratureConfig& cfg) {
    cfg.validate();
    const double base = std::max(a, 1.0);
    const SlopeFit fit = fit_log_tail(log_f, a, cfg);
    try {
        switch (fit.behavior) {
            case SlopeBehavior::Invalid:
                return Inconclusive{"tail evaluation failed: " + fit.reason};
            case SlopeBehavior::Unsettled:
                return Inconclusive{fit.reason};
            case SlopeBehavior::RunawayUp:
                return Diverges{ExpTail{fit.log_linear_rate}};
            case SlopeBehavior::Vanishing:
                return evaluate_convergent_tail(log_f, a, UnknownTail{}, cfg);
            case SlopeBehavior::RunawayDown:
                return evaluate_convergent_tail(log_f, a, ExpTail{fit.log_linear_rate}, cfg);
            case SlopeBehavior::Settled:
                break;
        }
        const double beta = fit.exponent;
        if (std::abs(beta + 1.0) <= cfg.tail_margin) {
            if (log_tail_detected(log_f, base, fit.windows, cfg)) return Diverges{PowerTail{-1.0}};
            std::ostringstream msg;
            msg << "tail exponent " << beta << " lies within +/-" << cfg.tail_margin
                << " of the critical value -1";
            return Inconclusive{msg.str()};
        }
        if (beta < -1.0) return evaluate_convergent_tail(log_f, a, PowerTail{beta}, cfg);
        return Diverges{PowerTail{beta}};
    } catch (const QuadratureError& e) {
        return Inconclusive{std::string("quadrature failed: ") + e.what()};
    } catch (const DomainError& e) {
        return Inconclusive{std::string("integrand evaluation failed: ") + e.what()};
    }
}

ConvergenceVerdict classify_improper(const ScalarFn& f, double a, const QuadratureConfig& cfg) {
    return classify_improper_log(
        [&f](double t) {
            const double v = f(t);
            if (v == 0.0) return -kInf;
            return v > 0.0 ? std::log(v) : kNaN;
        },
        a, cfg);
}

Estimate improper_value_log(const ScalarFn& log_f, double a, const QuadratureConfig& cfg) {
    const ConvergenceVerdict v = classify_improper_log(log_f, a, cfg);
    const auto* c = std::get_if<Converges>(&v);
    if (c == nullptr) throw VerdictError("improper_value requires a convergent tail, got " + describe(v));
    if (!c->within_tolerance) {
        throw VerdictError("improper integral did not reach tolerance before the truncation cap: " +
                           describe(v));
    }
    return {c->value, c->error_bound};
}

Estimate improper_value(const ScalarFn& f, double a, const QuadratureConfig& cfg) {
    return improper_value_log(
        [&f](double t) {
            const double v = f(t);
            if (v == 0.0) return -kInf;
            return v > 0.0 ? std::log(v) : kNaN;
        },
        a, cfg);
}

CumulativeLogIntegral::CumulativeLogIntegral(ScalarFn log_f, double a, QuadratureConfig cfg)
    : log_f_(std::move(log_f)), a_(a), cfg_(cfg) {}

double CumulativeLogIntegral::breakpoint(int k) const {
    return k == 0 ? a_ : a_ + std::ldexp(1.0, k - 1);
}

void CumulativeLogIntegral::extend_to(int k) {
    while (static_cast<int>(log_panels_.size()) <= k) {
        const int j = static_cast<int>(log_panels_.size());
        const double lp = integrate_log(log_f_, breakpoint(j), breakpoint(j + 1), cfg_).value;
        log_panels_.push_back(lp);
        log_prefix_.push_back(j == 0 ? lp : log_add_exp(log_prefix_.back(), lp));
    }
}

double CumulativeLogIntegral::log_panel(int k) {
    extend_to(k);
    return log_panels_[static_cast<std::size_t>(k)];
}

double CumulativeLogIntegral::log_integral_to(double t) {
    if (t <= a_) return -kInf;
    int k = 0;
    while (breakpoint(k + 1) < t) ++k;
    if (k > 0) extend_to(k - 1);
    const double head = k > 0 ? log_prefix_[static_cast<std::size_t>(k - 1)] : -kInf;
    return log_add_exp(head, integrate_log(log_f_, breakpoint(k), t, cfg_).value);
}

}  // namespace endscope
