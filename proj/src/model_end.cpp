#include "endscope/model_end.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "endscope/errors.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe_profile(const ProfileFn& p) {
    std::ostringstream out;
    out << p.family_name() << "(";
    if (const auto* pw = std::get_if<PowerLaw>(&p.family())) {
        out << "exponent=" << pw->exponent << ", offset=" << pw->offset;
    } else if (const auto* g = std::get_if<GaussianNeck>(&p.family())) {
        out << "scale=" << g->scale;
    } else if (const auto* e = std::get_if<ExpWarp>(&p.family())) {
        out << "rate=" << e->rate;
    } else if (const auto* c = std::get_if<Constant>(&p.family())) {
        out << "c=" << c->c;
    } else if (const auto* s = std::get_if<Sampled>(&p.family())) {
        out << s->knots.size() << " knots";
    }
    out << ")";
    return out.str();
}

}  // namespace

double unit_sphere_volume(int n) {
    const double half = 0.5 * static_cast<double>(n + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

ModelEnd::ModelEnd(int m, double t0, std::optional<ProfileFn> radial, ProfileFn warp, double omega,
                   EndKind kind, Extrinsic extrinsic)
    : m_(m), t0_(t0), radial_(std::move(radial)), warp_(std::move(warp)), omega_(omega),
      kind_(kind), extrinsic_(extrinsic) {
    if (m_ < 2 || m_ > 64) throw DomainError("dimension m must lie in [2, 64]");
    if (!std::isfinite(t0_)) throw DomainError("end start t0 must be finite");
    if (!(omega_ > 0.0) || !std::isfinite(omega_)) {
        throw DomainError("cross-section volume omega must be positive");
    }
    if (t0_ < warp_.t_min() || (radial_ && t0_ < radial_->t_min())) {
        throw DomainError("end start t0 lies below the profile domain");
    }
    probe_positivity();
}

ModelEnd ModelEnd::warped(int m, double t0, ProfileFn radial, ProfileFn warp, double omega,
                          Extrinsic extrinsic) {
    return ModelEnd(m, t0, std::move(radial), std::move(warp), omega, EndKind::AbstractWarped,
                    extrinsic);
}

ModelEnd make_revolution_end(const ProfileFn& f, int m, double t0) {
    return ModelEnd(m, t0, std::nullopt, f, m >= 2 ? unit_sphere_volume(m - 1) : 1.0,
                    EndKind::RevolutionHypersurface, Extrinsic::Intrinsic);
}

void ModelEnd::probe_positivity() const {
    const double t_max = std::min(warp_.t_max(), radial_ ? radial_->t_max() : kInf);
    auto probe = [&](double t) {
        if (t > t_max) return;
        const double lv = log_volume_density(t);
        const double lc = log_capacity_density(t);
        if (std::isnan(lv) || std::isnan(lc)) {
            std::ostringstream msg;
            msg << "end geometry is degenerate at t = " << t;
            throw DomainError(msg.str());
        }
    };
    for (int i = 0; i <= 40; ++i) probe(t0_ + 0.25 * i);
    for (int k = 0; k <= 60; ++k) probe(t0_ + std::ldexp(1.0, k));
}

double ModelEnd::radial_factor(double t) const {
    if (radial_) return radial_->value(t);
    return std::hypot(1.0, warp_.jet(t).d1);
}

double ModelEnd::radial_factor_derivative(double t) const {
    if (radial_) return radial_->derivative(t);
    const ProfileJet j = warp_.jet(t);
    return j.d1 * j.d2 / std::hypot(1.0, j.d1);
}

double ModelEnd::log_radial_factor(double t) const {
    if (radial_) return radial_->log_value(t);
    return std::log(std::hypot(1.0, warp_.jet(t).d1));
}

double ModelEnd::log_area(double t) const {
    return std::log(omega_) + static_cast<double>(m_ - 1) * warp_.log_value(t);
}

double ModelEnd::log_volume_density(double t) const { return log_area(t) + log_radial_factor(t); }

double ModelEnd::log_capacity_density(double t) const {
    return log_radial_factor(t) - static_cast<double>(m_ - 1) * warp_.log_value(t);
}

double ModelEnd::warp_log_derivative(double t) const { return warp_.jet(t).log_derivative; }

bool ModelEnd::has_mean_curvature() const {
    return kind_ == EndKind::RevolutionHypersurface || extrinsic_ == Extrinsic::Minimal;
}

double ModelEnd::log_mean_curvature(double t) const {
    if (kind_ == EndKind::AbstractWarped) {
        if (extrinsic_ == Extrinsic::Minimal) {
            warp_.jet(t);
            return -kInf;
        }
        throw KindError("mean curvature is undefined for an intrinsic warped end");
    }
    const ProfileJet j = warp_.jet(t);
    const double s = std::hypot(1.0, j.d1);
    // m H f = (m-1)/s - f'' f / s^3; f'' f stays finite where f underflows.
    const double term = static_cast<double>(m_ - 1) / s - j.d2 * j.value / (s * s * s);
    if (term == 0.0) return -kInf;
    return std::log(std::abs(term)) - j.log_value - std::log(static_cast<double>(m_));
}

double ModelEnd::mean_curvature_norm(double t) const { return std::exp(log_mean_curvature(t)); }

std::string ModelEnd::describe() const {
    std::ostringstream out;
    if (kind_ == EndKind::RevolutionHypersurface) {
        out << "revolution(m=" << m_ << ", t0=" << t0_ << ", f=" << describe_profile(warp_) << ")";
    } else {
        out << "warped(m=" << m_ << ", t0=" << t0_ << ", a=" << describe_profile(*radial_)
            << ", g=" << describe_profile(warp_) << ", omega=" << omega_ << ", "
            << (extrinsic_ == Extrinsic::Minimal ? "minimal" : "intrinsic") << ")";
    }
    return out.str();
}

double mean_curvature(const ModelEnd& end, double t) {
    if (end.kind() != EndKind::RevolutionHypersurface) {
        throw KindError("mean_curvature requires a revolution hypersurface end");
    }
    return end.mean_curvature_norm(t);
}

Estimate arc_length(const ModelEnd& end, double t, const QuadratureConfig& cfg) {
    if (t < end.t0()) throw DomainError("arc length requested before the start of the end");
    return integrate([&end](double x) { return end.radial_factor(x); }, end.t0(), t, cfg);
}

GeometricSample sample_geometry(const ModelEnd& end, double t, const QuadratureConfig& cfg) {
    GeometricSample s;
    s.t = t;
    const Estimate arc = arc_length(end, t, cfg);
    s.area = std::exp(end.log_area(t));
    s.volume_element = std::exp(end.log_volume_density(t));
    s.mean_curvature_norm = end.has_mean_curvature() ? end.mean_curvature_norm(t)
                                                     : std::numeric_limits<double>::quiet_NaN();
    s.arc_length = arc.value;
    s.arc_length_error = arc.error_bound;
    return s;
}

}  // namespace endscope
