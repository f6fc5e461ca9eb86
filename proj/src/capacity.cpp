#include "endscope/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "endscope/errors.hpp"
#include "endscope/tail_fit.hpp"
#include "endscope/tridiagonal.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kKnots = 64;
constexpr double kMonotoneTol = 1e-10;
constexpr double kLimitOneTol = 1e-6;

std::vector<double> profile_knots(double t_in, double t_out) {
    std::vector<double> knots;
    if (std::isfinite(t_out)) {
        const double span = t_out - t_in;
        for (int k = 0; k < kKnots; ++k) {
            knots.push_back(t_in + std::pow(span + 1.0, static_cast<double>(k) / kKnots) - 1.0);
        }
        knots.push_back(t_out);
    } else {
        for (int k = 0; k <= 2 * 40; ++k) knots.push_back(t_in + std::exp2(0.5 * k) - 1.0);
    }
    return knots;
}

}  // namespace

const char* to_string(Parabolicity p) {
    switch (p) {
        case Parabolicity::Parabolic: return "Parabolic";
        case Parabolicity::NonParabolic: return "NonParabolic";
        case Parabolicity::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

HarmonicProfile::HarmonicProfile(const ModelEnd& end, double t_in, double t_out,
                                 const QuadratureConfig& cfg)
    : end_(end), t_in_(t_in), t_out_(t_out), cfg_(cfg) {
    if (!(t_in >= end.t0())) throw DomainError("harmonic profile must start inside the end");
    if (!(t_out > t_in)) throw DomainError("harmonic profile needs t_out > t_in");

    knots_ = profile_knots(t_in, t_out);
    shift_ = -kInf;
    for (double k : knots_) shift_ = std::max(shift_, end_.log_capacity_density(k));
    if (!std::isfinite(shift_)) throw SolverError("capacity density is not finite");

    const std::size_t n = knots_.size();
    tail_from_knot_.assign(n, 0.0);
    double beyond = 0.0;
    if (!std::isfinite(t_out)) {
        const ConvergenceVerdict v = classify_improper_log(
            [this](double t) { return end_.log_capacity_density(t) - shift_; }, knots_.back(), cfg_);
        const auto* c = std::get_if<Converges>(&v);
        if (c == nullptr) {
            throw SolverError("limit profile needs a convergent capacity integral, got " +
                              describe(v));
        }
        beyond = c->value;
    }
    tail_from_knot_[n - 1] = beyond;
    for (std::size_t i = n - 1; i-- > 0;) {
        tail_from_knot_[i] = tail_from_knot_[i + 1] + scaled_integral(knots_[i], knots_[i + 1]);
    }
    total_ = tail_from_knot_[0];
    if (!(total_ > 0.0) || !std::isfinite(total_)) {
        throw SolverError("degenerate end: capacity integral over the annulus is not positive");
    }
}

double HarmonicProfile::scaled_density(double t) const {
    return std::exp(end_.log_capacity_density(t) - shift_);
}

double HarmonicProfile::scaled_integral(double lo, double hi) const {
    QuadratureConfig local = cfg_;
    local.abs_tol = std::min(cfg_.abs_tol, 1e-300);
    return integrate([this](double t) { return scaled_density(t); }, lo, hi, local).value;
}

double HarmonicProfile::operator()(double t) const {
    if (std::isnan(t) || t < t_in_) throw DomainError("harmonic profile evaluated before t_in");
    if (t >= t_out_) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    if (i + 1 >= knots_.size()) {
        const ConvergenceVerdict v = classify_improper_log(
            [this](double x) { return end_.log_capacity_density(x) - shift_; }, t, cfg_);
        const auto* c = std::get_if<Converges>(&v);
        return c ? c->value / total_ : 0.0;
    }
    return (tail_from_knot_[i + 1] + scaled_integral(t, knots_[i + 1])) / total_;
}

std::vector<double> HarmonicProfile::evaluate(std::span<const double> ts) const {
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back((*this)(t));
    return out;
}

double HarmonicProfile::derivative(double t) const {
    if (t < t_in_ || t > t_out_) throw DomainError("harmonic profile derivative outside its interval");
    return -scaled_density(t) / total_;
}

double HarmonicProfile::harmonicity_residual(int probes) const {
    const double hi_end = std::isfinite(t_out_) ? t_out_ : knots_.back();
    const double span = hi_end - t_in_;
    const double h = 1e-4 * span;
    std::vector<double> flux;
    for (int i = 1; i < probes; ++i) {
        const double t = t_in_ + span * static_cast<double>(i) / probes;
        const double df = ((*this)(t + h) - (*this)(t - h)) / (2.0 * h);
        // A/a = omega exp(-log_capacity_density); constant factors dropped.
        flux.push_back(df * std::exp(-(end_.log_capacity_density(t) - shift_)));
    }
    const auto [lo, hi] = std::minmax_element(flux.begin(), flux.end());
    const double ref = std::max(std::abs(*lo), std::abs(*hi));
    return ref > 0.0 ? (*hi - *lo) / ref : 0.0;
}

HarmonicProfile dirichlet_radial(const ModelEnd& end, double t_in, double t_out,
                                 const QuadratureConfig& cfg) {
    if (!std::isfinite(t_out)) throw DomainError("dirichlet_radial needs a finite outer radius");
    return HarmonicProfile(end, t_in, t_out, cfg);
}

DiscreteProfile fd_oracle(const ModelEnd& end, double t_in, double t_out, int n) {
    if (n < 16) throw DomainError("fd_oracle needs at least 16 intervals");
    if (!(t_in >= end.t0()) || !(t_out > t_in) || !std::isfinite(t_out)) {
        throw DomainError("fd_oracle needs t0 <= t_in < t_out < inf");
    }
    const double h = (t_out - t_in) / n;
    // Conductances A/a at cell midpoints, normalised by their maximum.
    std::vector<double> log_c(static_cast<std::size_t>(n));
    double top = -kInf;
    for (int i = 0; i < n; ++i) {
        log_c[static_cast<std::size_t>(i)] = -end.log_capacity_density(t_in + (i + 0.5) * h);
        top = std::max(top, log_c[static_cast<std::size_t>(i)]);
    }
    std::vector<double> c(log_c.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::exp(log_c[i] - top);

    const std::size_t unknowns = static_cast<std::size_t>(n - 1);
    std::vector<double> lower(unknowns - 1), diag(unknowns), upper(unknowns - 1), rhs(unknowns, 0.0);
    for (std::size_t r = 0; r < unknowns; ++r) {
        // Node r + 1 couples to its neighbours through c[r] (left) and c[r + 1] (right).
        diag[r] = c[r] + c[r + 1];
        if (r + 1 < unknowns) upper[r] = -c[r + 1];
        if (r > 0) lower[r - 1] = -c[r];
    }
    rhs[0] = c[0];

    DiscreteProfile out;
    const auto interior = solve_tridiagonal(lower, diag, upper, rhs);
    out.nodes.reserve(static_cast<std::size_t>(n) + 1);
    out.values.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) out.nodes.push_back(t_in + i * h);
    out.nodes.back() = t_out;
    out.values.push_back(1.0);
    out.values.insert(out.values.end(), interior.begin(), interior.end());
    out.values.push_back(0.0);
    return out;
}

VolumeGrowth volume_growth_test(const ModelEnd& end, const QuadratureConfig& cfg) {
    const double t0 = end.t0();
    CumulativeLogIntegral arc([&end](double t) { return end.log_radial_factor(t); }, t0, cfg);
    CumulativeLogIntegral vol([&end](double t) { return end.log_volume_density(t); }, t0, cfg);

    VolumeGrowth out;
    for (int i = 0; i < 72; ++i) {
        const double t = t0 + std::exp2(0.25 * i - 2.0);
        out.s.push_back(std::exp(arc.log_integral_to(t)));
        out.V.push_back(std::exp(vol.log_integral_to(t)));
    }

    const SlopeFit fit = fit_window_slopes(
        [&](int k) {
            const double t = t0 + std::ldexp(1.0, k);
            return std::make_pair(std::exp(arc.log_integral_to(t)), vol.log_integral_to(t));
        },
        max_dyadic_windows(1.0), cfg);
    out.exponent_settled = fit.behavior == SlopeBehavior::Settled;
    out.exponent = fit.behavior == SlopeBehavior::RunawayUp ? kInf : fit.exponent;

    out.criterion = classify_improper_log(
        [&](double t) {
            return arc.log_integral_to(t) + end.log_radial_factor(t) - vol.log_integral_to(t);
        },
        t0 + 1.0, cfg);
    out.implies_parabolic = diverges(out.criterion);
    return out;
}

ParabolicityReport parabolicity(const ModelEnd& end, const QuadratureConfig& cfg) {
    ParabolicityReport report;
    report.capacity = classify_improper_log(
        [&end](double t) { return end.log_capacity_density(t); }, end.t0(), cfg);
    if (diverges(report.capacity)) {
        report.verdict = Parabolicity::Parabolic;
    } else if (converges(report.capacity)) {
        report.verdict = Parabolicity::NonParabolic;
        report.harmonic_limit.emplace(end, end.t0(), kInf, cfg);
    }
    report.volume_growth = volume_growth_test(end, cfg);
    report.agreement =
        !(report.volume_growth.implies_parabolic && report.verdict == Parabolicity::NonParabolic);
    return report;
}

ExhaustionReport exhaustion_limit(const ModelEnd& end, std::span<const double> radii,
                                  std::span<const double> probes, const QuadratureConfig& cfg) {
    if (radii.empty()) throw DomainError("exhaustion needs at least one radius");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > end.t0()) || (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw DomainError("exhaustion radii must be strictly increasing and beyond t0");
        }
    }
    for (double p : probes) {
        if (!(p >= end.t0())) throw DomainError("exhaustion probes must lie in the end");
    }

    ExhaustionReport out;
    out.radii.assign(radii.begin(), radii.end());
    out.probes.assign(probes.begin(), probes.end());
    for (double r : radii) {
        const HarmonicProfile f(end, end.t0(), r, cfg);
        std::vector<double> row;
        for (double p : probes) {
            const double v = f(p);
            if (v < -kMonotoneTol || v > 1.0 + kMonotoneTol) {
                std::ostringstream msg;
                msg << "maximum principle violated: f_" << r << "(" << p << ") = " << v;
                throw ConsistencyError(msg.str());
            }
            row.push_back(v);
        }
        if (!out.values.empty()) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j] + kMonotoneTol < out.values.back()[j]) {
                    std::ostringstream msg;
                    msg << "exhaustion not monotone at probe " << probes[j] << ": "
                        << out.values.back()[j] << " > " << row[j];
                    throw ConsistencyError(msg.str());
                }
            }
        }
        out.values.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < probes.size(); ++j) {
        out.sup_increase = std::max(out.sup_increase, out.values.back()[j] - out.values.front()[j]);
    }

    // Shell increments of Q(t0, T) over [t0 + 2^(k-1), t0 + 2^k].
    CumulativeLogIntegral q([&end](double t) { return end.log_capacity_density(t); }, end.t0(), cfg);
    const SlopeFit fit = fit_window_slopes(
        [&](int k) { return std::make_pair(std::ldexp(1.0, k + 1), q.log_panel(k + 1)); },
        max_dyadic_windows(1.0), cfg);

    double sigma = 0.0;
    switch (fit.behavior) {
        case SlopeBehavior::RunawayUp:
            out.extrapolated = Parabolicity::Parabolic;
            out.increment_ratio = kInf;
            break;
        case SlopeBehavior::RunawayDown:
        case SlopeBehavior::Vanishing:
            out.extrapolated = Parabolicity::NonParabolic;
            out.increment_ratio = 0.0;
            break;
        case SlopeBehavior::Settled:
            sigma = fit.exponent;
            out.increment_ratio = std::exp2(sigma);
            if (sigma < -cfg.tail_margin) {
                out.extrapolated = Parabolicity::NonParabolic;
            } else if (sigma > cfg.tail_margin || std::abs(sigma) <= cfg.tail_margin / 10.0) {
                out.extrapolated = Parabolicity::Parabolic;
            }
            break;
        default:
            break;
    }

    if (out.extrapolated == Parabolicity::Parabolic) {
        out.limit.assign(probes.size(), 1.0);
    } else if (out.extrapolated == Parabolicity::NonParabolic) {
        const int last = fit.windows;
        double log_total = q.log_integral_to(q.breakpoint(last + 1));
        if (out.increment_ratio > 0.0) {
            const double rho = out.increment_ratio;
            log_total = log_add_exp(log_total, q.log_panel(last) + std::log(rho / (1.0 - rho)));
        }
        for (double p : probes) {
            out.limit.push_back(1.0 - std::exp(q.log_integral_to(p) - log_total));
        }
    } else {
        out.limit.assign(probes.size(), std::numeric_limits<double>::quiet_NaN());
    }
    out.limit_is_one = !out.limit.empty() && std::all_of(out.limit.begin(), out.limit.end(),
                                                         [](double v) { return v > 1.0 - kLimitOneTol; });
    if (out.extrapolated == Parabolicity::NonParabolic && out.limit_is_one) {
        out.extrapolated = Parabolicity::Parabolic;
    }
    return out;
}

EnergyTrace energy_trace(const ModelEnd& end, double r0, std::span<const double> radii,
                         double sobolev_constant, const QuadratureConfig& cfg) {
    const int m = end.dimension();
    if (m < 3) throw DomainError("energy trace needs m >= 3 (exponent 2m/(m-2))");
    if (!(sobolev_constant > 0.0)) throw DomainError("Sobolev constant must be positive");
    if (!(r0 >= end.t0())) throw DomainError("energy trace base radius lies before the end");
    const double q = 2.0 * m / (m - 2.0);

    EnergyTrace trace;
    trace.r0 = r0;
    trace.sobolev_constant = sobolev_constant;
    for (double r : radii) {
        if (r < r0) throw DomainError("energy trace radius below r0");
        EnergyTraceRow row;
        row.r = r;
        if (r > r0) {
            const HarmonicProfile f(end, end.t0(), r, cfg);
            std::vector<double> cuts{r0};
            for (double k : f.knots()) {
                if (k > r0 && k < r) cuts.push_back(k);
            }
            cuts.push_back(r);
            auto power_density = [&](double t, double power) {
                const double v = f(t);
                return v > 0.0 ? std::exp(power * std::log(v) + end.log_volume_density(t)) : 0.0;
            };
            double curv = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const Estimate e =
                    integrate([&](double t) { return power_density(t, q); }, cuts[i], cuts[i + 1], cfg);
                row.h += e.value;
                row.h_error += e.error_bound;
                if (end.has_mean_curvature()) {
                    curv += integrate(
                                [&](double t) {
                                    const double lh = end.log_mean_curvature(t);
                                    const double v = f(t);
                                    if (lh == -kInf || !(v > 0.0)) return 0.0;
                                    return std::exp(2.0 * (std::log(v) + lh) + end.log_volume_density(t));
                                },
                                cuts[i], cuts[i + 1], cfg)
                                .value;
                }
            }
            if (end.has_mean_curvature()) row.curvature_term = curv;
        } else if (end.has_mean_curvature()) {
            row.curvature_term = 0.0;
        }
        row.sobolev_lhs = std::pow(row.h, (m - 2.0) / m) / sobolev_constant;
        trace.rows.push_back(row);
    }
    return trace;
}

}  // namespace endscope
