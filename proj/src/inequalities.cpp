#include "endscope/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "endscope/errors.hpp"
#include "endscope/tridiagonal.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxInverseIterations = 50000;
constexpr double kEigenResidualTol = 1e-10;
constexpr double kBumpEdge = 1e-3;  // exp(-1/kBumpEdge) underflows, so eta = 0 there

void check_support(const ModelEnd& end, double lo, double hi) {
    if (!(lo >= end.t0())) throw DomainError("test function support leaves the end");
    if (!(hi > lo) || !std::isfinite(hi)) throw DomainError("test function support is degenerate");
}

// Largest log(omega g^{m-1}) on a probe grid; used as a common shift.
double area_shift(const ModelEnd& end, double lo, double hi) {
    double shift = -kInf;
    for (int i = 0; i <= 32; ++i) shift = std::max(shift, end.log_area(lo + (hi - lo) * i / 32.0));
    if (!std::isfinite(shift)) throw DomainError("cross-section area is not finite on the support");
    return shift;
}

// Sum of integrals of f over consecutive breakpoints.
double piecewise_integral(const ScalarFn& f, const std::vector<double>& cuts,
                          const QuadratureConfig& cfg) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], cfg).value;
    return total;
}

}  // namespace

const char* to_string(TestFamily family) {
    switch (family) {
        case TestFamily::Bump: return "bump";
        case TestFamily::Tent: return "tent";
        case TestFamily::TruncatedCosine: return "truncated_cosine";
        case TestFamily::Nodal: return "nodal";
    }
    return "nodal";
}

TestFunction TestFunction::bump(double center, double width) {
    TestFunction f;
    if (!(width > 0.0) || !std::isfinite(center) || !std::isfinite(width)) {
        throw DomainError("test function needs finite centre and positive width");
    }
    f.family_ = TestFamily::Bump;
    f.lo_ = center - 0.5 * width;
    f.hi_ = center + 0.5 * width;
    return f;
}

TestFunction TestFunction::tent(double center, double width) {
    TestFunction f = bump(center, width);
    f.family_ = TestFamily::Tent;
    return f;
}

TestFunction TestFunction::truncated_cosine(double center, double width) {
    TestFunction f = bump(center, width);
    f.family_ = TestFamily::TruncatedCosine;
    return f;
}

TestFunction TestFunction::nodal(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() < 3 || nodes.size() != values.size()) {
        throw DomainError("nodal test function needs at least 3 nodes and matching values");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw DomainError("nodal test function nodes must increase");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("nodal test function values must be finite");
    }
    if (values.front() != 0.0 || values.back() != 0.0) {
        throw DomainError("nodal test function must vanish at its end nodes");
    }
    TestFunction f;
    f.family_ = TestFamily::Nodal;
    f.lo_ = nodes.front();
    f.hi_ = nodes.back();
    f.nodes_ = std::move(nodes);
    f.values_ = std::move(values);
    return f;
}

double TestFunction::value(double t) const {
    if (!(t > lo_ && t < hi_)) return 0.0;
    if (family_ == TestFamily::Nodal) {
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        const double w = (t - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
        return scale_ * ((1.0 - w) * values_[i] + w * values_[i + 1]);
    }
    const double x = (t - center()) / (0.5 * width());
    switch (family_) {
        case TestFamily::Bump: {
            const double q = 1.0 - x * x;
            return q < kBumpEdge ? 0.0 : scale_ * std::exp(-1.0 / q);
        }
        case TestFamily::Tent: return scale_ * (1.0 - std::abs(x));
        case TestFamily::TruncatedCosine: return scale_ * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
        default: return 0.0;
    }
}

double TestFunction::derivative(double t) const {
    if (!(t > lo_ && t < hi_)) return 0.0;
    if (family_ == TestFamily::Nodal) {
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        return scale_ * (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
    }
    const double half = 0.5 * width();
    const double x = (t - center()) / half;
    switch (family_) {
        case TestFamily::Bump: {
            const double q = 1.0 - x * x;
            return q < kBumpEdge ? 0.0 : scale_ * std::exp(-1.0 / q) * (-2.0 * x / (q * q)) / half;
        }
        case TestFamily::Tent: return scale_ * (x > 0.0 ? -1.0 : 1.0) / half;
        case TestFamily::TruncatedCosine:
            return -scale_ * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * x) / half;
        default: return 0.0;
    }
}

std::vector<double> TestFunction::breakpoints() const {
    if (family_ == TestFamily::Nodal) return nodes_;
    if (family_ == TestFamily::Tent) return {lo_, center(), hi_};
    return {lo_, hi_};
}

TestFunction TestFunction::scaled(double lambda) const {
    if (!std::isfinite(lambda) || lambda == 0.0) throw DomainError("test function scale must be nonzero");
    TestFunction f = *this;
    f.scale_ *= lambda;
    return f;
}

std::string TestFunction::describe() const {
    std::ostringstream out;
    out << to_string(family_);
    if (family_ == TestFamily::Nodal) {
        out << "(" << nodes_.size() << " nodes on [" << lo_ << ", " << hi_ << "])";
    } else {
        out << "(center=" << center() << ", width=" << width() << ")";
    }
    return out.str();
}

double rayleigh_quotient(const ModelEnd& end, const TestFunction& eta, const QuadratureConfig& cfg) {
    const auto [lo, hi] = eta.support();
    check_support(end, lo, hi);
    const double shift = area_shift(end, lo, hi);
    const std::vector<double> cuts = eta.breakpoints();
    const double num = piecewise_integral(
        [&](double t) {
            const double d = eta.derivative(t);
            return d * d * std::exp(end.log_area(t) - end.log_radial_factor(t) - shift);
        },
        cuts, cfg);
    const double den = piecewise_integral(
        [&](double t) {
            const double v = eta.value(t);
            return v * v * std::exp(end.log_volume_density(t) - shift);
        },
        cuts, cfg);
    if (!(den > 0.0)) throw DomainError("Rayleigh quotient of a degenerate test function");
    return num / den;
}

std::optional<double> poincare_bound(const ModelEnd& end) {
    if (end.kind() != EndKind::AbstractWarped) return std::nullopt;
    const auto* a = std::get_if<Constant>(&end.radial_profile()->family());
    const auto* g = std::get_if<ExpWarp>(&end.warp().family());
    if (a == nullptr || g == nullptr) return std::nullopt;
    const double k = (end.dimension() - 1) * g->rate / a->c;
    return 0.25 * k * k;
}

std::vector<TestFunction> default_test_sweep(double t_a, double t_b, int per_family) {
    if (!(t_b > t_a) || per_family < 1) throw DomainError("test sweep needs t_a < t_b and per_family >= 1");
    const double c = 0.5 * (t_a + t_b);
    const double w = t_b - t_a;
    std::vector<TestFunction> out;
    for (int k = 1; k <= per_family; ++k) {
        const double width = w * k / per_family;
        out.push_back(TestFunction::tent(c, width));
        out.push_back(TestFunction::bump(c, width));
        out.push_back(TestFunction::truncated_cosine(c, width));
    }
    return out;
}

RayleighReport rayleigh_minimize(const ModelEnd& end, double t_a, double t_b, int n,
                                 std::span<const TestFunction> sweep, const QuadratureConfig& cfg) {
    if (n < 32) throw DomainError("rayleigh_minimize needs n >= 32");
    check_support(end, t_a, t_b);

    RayleighReport report;
    report.t_a = t_a;
    report.t_b = t_b;
    report.n = n;

    const double h = (t_b - t_a) / n;
    const double shift = area_shift(end, t_a, t_b);
    // Conductances W = omega g^{m-1} / a at midpoints, lumped masses rho h at nodes.
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = t_a + (i + 0.5) * h;
        w[static_cast<std::size_t>(i)] = std::exp(end.log_area(t) - end.log_radial_factor(t) - shift) / h;
    }
    const std::size_t dim = static_cast<std::size_t>(n - 1);
    std::vector<double> inv_sqrt_mass(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double t = t_a + static_cast<double>(i + 1) * h;
        inv_sqrt_mass[i] = 1.0 / std::sqrt(std::exp(end.log_volume_density(t) - shift) * h);
    }
    std::vector<double> diag(dim), off(dim - 1);
    for (std::size_t i = 0; i < dim; ++i) {
        diag[i] = (w[i] + w[i + 1]) * inv_sqrt_mass[i] * inv_sqrt_mass[i];
        if (i + 1 < dim) off[i] = -w[i + 1] * inv_sqrt_mass[i] * inv_sqrt_mass[i + 1];
    }
    auto apply = [&](const std::vector<double>& x) {
        std::vector<double> y(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            y[i] = diag[i] * x[i];
            if (i > 0) y[i] += off[i - 1] * x[i - 1];
            if (i + 1 < dim) y[i] += off[i] * x[i + 1];
        }
        return y;
    };
    auto norm = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    };

    // The ground state is positive, so a positive start overlaps it.
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = std::sin(std::numbers::pi * static_cast<double>(i + 1) / n);
    double nx = norm(x);
    for (double& v : x) v /= nx;

    bool converged = false;
    double lambda = kInf;
    for (int it = 1; it <= kMaxInverseIterations; ++it) {
        std::vector<double> y = solve_tridiagonal(off, diag, off, x);
        const double ny = norm(y);
        for (double& v : y) v /= ny;
        const std::vector<double> by = apply(y);
        double rq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) rq += y[i] * by[i];
        double res = 0.0;
        for (std::size_t i = 0; i < dim; ++i) res += (by[i] - rq * y[i]) * (by[i] - rq * y[i]);
        x = std::move(y);
        lambda = rq;
        report.iterations = it;
        if (std::sqrt(res) <= kEigenResidualTol * std::abs(rq)) {
            converged = true;
            break;
        }
    }
    if (!converged) throw SolverError("inverse iteration did not converge");
    report.min_quotient = lambda;

    report.min_sample_quotient = kInf;
    for (const TestFunction& eta : sweep) {
        const double q = rayleigh_quotient(end, eta, cfg);
        report.samples.push_back({eta.describe(), q});
        report.min_sample_quotient = std::min(report.min_sample_quotient, q);
    }
    report.bound = poincare_bound(end);
    if (report.bound) report.margin = std::min(report.min_quotient, report.min_sample_quotient) - *report.bound;
    return report;
}

double hk_identity_check(const ModelEnd& end, double kappa, const TestFunction& eta,
                         const QuadratureConfig& cfg) {
    if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
    const auto [lo, hi] = eta.support();
    check_support(end, lo, hi);
    if (kappa == 0.0) return 0.0;
    const int m = end.dimension();
    const QuadratureConfig tight = cfg.tightened(100.0);
    const std::vector<double> cuts = eta.breakpoints();
    const double laplacian_term = piecewise_integral(
        [&](double t) {
            const double a = end.radial_factor(t);
            const double lap = kappa * ((m - 1) * end.warp_log_derivative(t) / (a * a) -
                                        end.radial_factor_derivative(t) / (a * a * a));
            const double v = eta.value(t);
            return v * v * lap * std::exp(end.log_volume_density(t));
        },
        cuts, tight);
    const double gradient_term = piecewise_integral(
        [&](double t) {
            const double a = end.radial_factor(t);
            return 2.0 * eta.value(t) * eta.derivative(t) * kappa / (a * a) *
                   std::exp(end.log_volume_density(t));
        },
        cuts, tight);
    return std::abs(laplacian_term + gradient_term);
}

IsoperimetricScan isoperimetric_scan(const ModelEnd& end,
                                     std::span<const std::pair<double, double>> domains,
                                     const QuadratureConfig& cfg) {
    if (domains.empty()) throw DomainError("isoperimetric scan needs at least one domain");
    const int m = end.dimension();
    IsoperimetricScan scan;
    scan.inf_ratio = kInf;
    for (const auto& [ta, tb] : domains) {
        if (!(ta >= end.t0())) throw DomainError("isoperimetric domain leaves the end");
        if (!(tb > ta) || !std::isfinite(tb)) throw DomainError("degenerate isoperimetric domain");
        IsoperimetricSample s;
        s.t_a = ta;
        s.t_b = tb;
        const double log_vol =
            integrate_log([&end](double t) { return end.log_volume_density(t); }, ta, tb, cfg).value;
        double log_top = log_add_exp(end.log_area(ta), end.log_area(tb));
        s.boundary_area = std::exp(log_top);
        s.curvature_available = end.has_mean_curvature();
        if (s.curvature_available) {
            const double log_curv = integrate_log(
                [&end](double t) { return end.log_mean_curvature(t) + end.log_volume_density(t); },
                ta, tb, cfg).value;
            s.curvature_integral = std::exp(log_curv);
            log_top = log_add_exp(log_top, log_curv);
        }
        s.volume = std::exp(log_vol);
        s.ratio = std::exp(log_top - (m - 1.0) / m * log_vol);
        if (s.ratio < scan.inf_ratio ||
            (s.ratio == scan.inf_ratio && ta < scan.samples[scan.argmin].t_a)) {
            scan.inf_ratio = s.ratio;
            scan.argmin = scan.samples.size();
        }
        scan.samples.push_back(s);
    }
    return scan;
}

std::vector<std::pair<double, double>> default_isoperimetric_domains(const ModelEnd& end, int count) {
    if (count < 2) throw DomainError("need at least two isoperimetric domains");
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < count; ++i) {
        const double L = std::pow(10.0, -2.0 + 4.0 * i / (count - 1));
        out.emplace_back(end.t0(), end.t0() + L);
    }
    return out;
}

VolumeBoundReport volume_lower_bound_check(const ModelEnd& end, double s_obs,
                                           std::span<const double> radii,
                                           std::optional<double> t_q, const QuadratureConfig& cfg) {
    if (!(s_obs > 0.0) || !std::isfinite(s_obs)) throw DomainError("S_obs must be positive and finite");
    const double tq = t_q.value_or(end.t0());
    if (!(tq >= end.t0())) throw DomainError("ball centre lies outside the end");
    const int m = end.dimension();

    auto s_of = [&](double t) { return arc_length(end, t, cfg).value; };
    const double s_q = s_of(tq);
    auto t_of = [&](double target) {
        if (target <= 0.0) return end.t0();
        double lo = end.t0();
        double hi = end.t0() + 1.0;
        int doublings = 0;
        while (s_of(hi) < target) {
            lo = hi;
            hi = end.t0() + 2.0 * (hi - end.t0());
            if (++doublings > 60) throw SolverError("arc length stays bounded; cannot reach radius");
        }
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(
            [&](double t) { return s_of(t) - target; }, lo, hi,
            boost::math::tools::eps_tolerance<double>(48), iters);
        return 0.5 * (root.first + root.second);
    };

    VolumeBoundReport report;
    report.s_obs = s_obs;
    report.t_q = tq;
    for (double R : radii) {
        if (!(R > 0.0)) throw DomainError("ball radii must be positive");
        VolumeBoundRow row;
        row.R = R;
        const double lo = t_of(s_q - R);
        const double hi = t_of(s_q + R);
        row.volume = std::exp(
            integrate_log([&end](double t) { return end.log_volume_density(t); }, lo, hi, cfg).value);
        row.bound = std::pow(R, m) / (2.0 * s_obs * m);
        row.violated = row.volume < row.bound;
        if (row.violated) report.violations.push_back(R);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace endscope
