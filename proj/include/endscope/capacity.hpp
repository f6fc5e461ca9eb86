#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endscope/model_end.hpp"
#include "endscope/quadrature.hpp"

namespace endscope {

/// Radial harmonic function on [t_in, t_out] with f = 1 at t_in and f = 0 at
/// t_out:
///
///   f(t) = Q(t, t_out) / Q(t_in, t_out),   Q(u, v) = integral of a / g^{m-1} over [u, v].
///
/// t_out = +inf gives the exhaustion limit of a non-parabolic end and
/// requires the capacity integral to converge.  All integrals are carried
/// with a common exponential shift, so ends whose capacity density
/// overflows (Gaussian necks) are handled.
class HarmonicProfile {
public:
    HarmonicProfile(const ModelEnd& end, double t_in, double t_out, const QuadratureConfig& cfg);

    /// f(t); 0 for t >= t_out.  Throws DomainError for t < t_in.
    double operator()(double t) const;

    /// Values at ascending points, sharing cumulative integrals.
    std::vector<double> evaluate(std::span<const double> ts) const;

    /// f'(t) = -a / g^{m-1} / Q(t_in, t_out).
    double derivative(double t) const;

    double t_in() const { return t_in_; }
    double t_out() const { return t_out_; }
    /// Quadrature breakpoints used internally; useful for splitting
    /// integrals of f against other densities.
    const std::vector<double>& knots() const { return knots_; }
    const ModelEnd& end() const { return end_; }
    /// Q(t_in, t_out) as a log.
    double log_total() const { return std::log(total_) + shift_; }

    /// Relative spread of the flux A f'/a over interior probe points, with f'
    /// taken from centred differences of f.  Harmonic means constant flux, so
    /// this is O(h^2) plus round-off.
    double harmonicity_residual(int probes = 32) const;

private:
    double scaled_density(double t) const;
    double scaled_integral(double lo, double hi) const;

    ModelEnd end_;
    double t_in_;
    double t_out_;
    QuadratureConfig cfg_;
    double shift_ = 0.0;
    double total_ = 0.0;
    std::vector<double> knots_;
    std::vector<double> tail_from_knot_;  // scaled Q(knot_i, t_out)
};

/// The annular Dirichlet solution f_r on [t_in, t_out].  Throws DomainError
/// for t_in < t0 or t_out <= t_in, SolverError for a degenerate end.
HarmonicProfile dirichlet_radial(const ModelEnd& end, double t_in, double t_out,
                                 const QuadratureConfig& cfg = {});

struct DiscreteProfile {
    std::vector<double> nodes;
    std::vector<double> values;
};

/// Three-point conservative discretisation of (A/a u')' = 0 on n uniform
/// intervals with u(t_in) = 1, u(t_out) = 0, solved by tridiagonal
/// elimination.  Independent of the quadrature route.
DiscreteProfile fd_oracle(const ModelEnd& end, double t_in, double t_out, int n);

enum class Parabolicity { Parabolic, NonParabolic, Inconclusive };

const char* to_string(Parabolicity p);

struct VolumeGrowth {
    std::vector<double> s;  // arc length samples
    std::vector<double> V;  // volume of {t0 <= t, s(t) <= s}
    double exponent = 0.0;  // settled slope of log V against log s
    bool exponent_settled = false;
    ConvergenceVerdict criterion = Inconclusive{"not computed"};  // integral of s / V(s) ds
    bool implies_parabolic = false;                               // criterion diverges
};

/// V(s) and the sufficient parabolicity test: divergence of the integral
/// of s / V(s) ds forces parabolicity; convergence says nothing.
VolumeGrowth volume_growth_test(const ModelEnd& end, const QuadratureConfig& cfg = {});

struct ParabolicityReport {
    Parabolicity verdict = Parabolicity::Inconclusive;
    ConvergenceVerdict capacity = Inconclusive{"not computed"};
    std::optional<HarmonicProfile> harmonic_limit;  // present iff NonParabolic
    VolumeGrowth volume_growth;
    bool agreement = true;  // volume test never says parabolic on a non-parabolic end
};

/// Capacity criterion: the end is parabolic iff the integral of a / g^{m-1}
/// over [t0, inf) diverges.
ParabolicityReport parabolicity(const ModelEnd& end, const QuadratureConfig& cfg = {});

struct ExhaustionReport {
    std::vector<double> radii;
    std::vector<double> probes;
    std::vector<std::vector<double>> values;  // values[i][j] = f_{radii[i]}(probes[j])
    double sup_increase = 0.0;                // max over probes of f_last - f_first
    std::vector<double> limit;                // extrapolated limit f at each probe
    bool limit_is_one = false;                // every limit value exceeds 1 - 1e-6
    double increment_ratio = 0.0;             // settled ratio of successive dyadic capacity increments
    Parabolicity extrapolated = Parabolicity::Inconclusive;
};

/// Monotone exhaustion f_r <= f_s for r <= s, checked on the probe grid
/// (ConsistencyError on violation beyond 1e-10), plus an extrapolated limit
/// that is independent of the power-law tail classifier: it looks at the
/// ratio of capacity increments over successive dyadic shells.
ExhaustionReport exhaustion_limit(const ModelEnd& end, std::span<const double> radii,
                                  std::span<const double> probes,
                                  const QuadratureConfig& cfg = {});

struct EnergyTraceRow {
    double r = 0.0;
    double h = 0.0;             // integral of f_r^{2m/(m-2)} dV over [r0, r]
    double h_error = 0.0;
    double sobolev_lhs = 0.0;   // S^{-1} h^{(m-2)/m}
    std::optional<double> curvature_term;  // integral of f_r^2 |H|^2 dV over [r0, r]
};

struct EnergyTrace {
    double r0 = 0.0;
    double sobolev_constant = 1.0;
    std::vector<EnergyTraceRow> rows;
};

/// h(r) for each radius; f_r solves the Dirichlet problem on [t0, r].
/// Throws DomainError for m = 2 or a radius below r0.
EnergyTrace energy_trace(const ModelEnd& end, double r0, std::span<const double> radii,
                         double sobolev_constant = 1.0, const QuadratureConfig& cfg = {});

}  // namespace endscope
