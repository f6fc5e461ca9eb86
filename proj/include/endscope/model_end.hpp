#pragma once

#include <optional>
#include <string>

#include "endscope/profile.hpp"
#include "endscope/quadrature.hpp"

namespace endscope {

enum class EndKind {
    RevolutionHypersurface,  // x(v, t) = (f(t) v, t) in R^{m+1}; a = sqrt(1 + f'^2), g = f
    AbstractWarped,          // metric a(t)^2 dt^2 + g(t)^2 g_P with a, g given
};

/// Extrinsic data attached to an abstract warped end.
enum class Extrinsic {
    Intrinsic,  // no immersion; mean curvature unavailable
    Minimal,    // |H| = 0 (e.g. a flat Euclidean end)
};

/// Volume of the unit n-sphere S^n in R^{n+1}.
double unit_sphere_volume(int n);

/// A rotationally symmetric end [t0, inf) x P with metric a^2 dt^2 + g^2 g_P.
///
/// Immutable; every query is a pure function of t.  Log-form accessors stay
/// finite where the corresponding quantity under- or overflows.
class ModelEnd {
public:
    static ModelEnd warped(int m, double t0, ProfileFn radial, ProfileFn warp, double omega,
                           Extrinsic extrinsic = Extrinsic::Intrinsic);

    int dimension() const { return m_; }
    double t0() const { return t0_; }
    double omega() const { return omega_; }
    EndKind kind() const { return kind_; }
    Extrinsic extrinsic() const { return extrinsic_; }

    /// The warp g (equal to the generating profile f for revolution ends).
    const ProfileFn& warp() const { return warp_; }
    /// The radial factor profile of an abstract end; empty for revolution ends.
    const std::optional<ProfileFn>& radial_profile() const { return radial_; }

    double radial_factor(double t) const;
    double radial_factor_derivative(double t) const;
    double log_radial_factor(double t) const;

    /// log(omega g^{m-1}): the level cross-section volume A(t).
    double log_area(double t) const;
    /// log(omega a g^{m-1}): the volume density dV/dt.
    double log_volume_density(double t) const;
    /// log(a / g^{m-1}): the integrand of the capacity integral.
    double log_capacity_density(double t) const;
    /// g'/g.
    double warp_log_derivative(double t) const;

    bool has_mean_curvature() const;
    /// log |H|(t); -inf where |H| vanishes.  Throws KindError on intrinsic ends.
    double log_mean_curvature(double t) const;
    double mean_curvature_norm(double t) const;

    std::string describe() const;

private:
    ModelEnd(int m, double t0, std::optional<ProfileFn> radial, ProfileFn warp, double omega,
             EndKind kind, Extrinsic extrinsic);

    void check_domain(double t) const;
    void probe_positivity() const;

    int m_;
    double t0_;
    std::optional<ProfileFn> radial_;
    ProfileFn warp_;
    double omega_;
    EndKind kind_;
    Extrinsic extrinsic_;

    friend ModelEnd make_revolution_end(const ProfileFn& f, int m, double t0);
};

/// Revolution hypersurface end generated by f on [t0, inf), with omega the
/// volume of the unit (m-1)-sphere.  Throws DomainError if f fails to be
/// positive on the probe grid or m is outside [2, 64].
ModelEnd make_revolution_end(const ProfileFn& f, int m, double t0);

/// |H|(t) for a revolution end from
///   m H = (m-1) / (f sqrt(1+f'^2)) - f'' / (1+f'^2)^{3/2}.
/// Throws KindError for non-revolution ends, DomainError for t < t_min.
double mean_curvature(const ModelEnd& end, double t);

struct GeometricSample {
    double t = 0.0;
    double area = 0.0;
    double volume_element = 0.0;
    double mean_curvature_norm = 0.0;  // NaN on intrinsic ends
    double arc_length = 0.0;
    double arc_length_error = 0.0;
};

GeometricSample sample_geometry(const ModelEnd& end, double t, const QuadratureConfig& cfg = {});

/// Arc length s(t) = integral of a over [t0, t].
Estimate arc_length(const ModelEnd& end, double t, const QuadratureConfig& cfg = {});

}  // namespace endscope
