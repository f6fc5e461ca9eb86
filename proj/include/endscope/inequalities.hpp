#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "endscope/model_end.hpp"
#include "endscope/quadrature.hpp"

namespace endscope {

enum class TestFamily { Bump, Tent, TruncatedCosine, Nodal };

const char* to_string(TestFamily family);

/// Compactly supported radial test function eta(t).
///
/// Parametric families are centred at `center` with support of total width
/// `width`; Nodal is piecewise linear through the given node values and
/// must vanish at both end nodes.
class TestFunction {
public:
    static TestFunction bump(double center, double width);             // exp(-1 / (1 - x^2))
    static TestFunction tent(double center, double width);             // 1 - |x|
    static TestFunction truncated_cosine(double center, double width); // (1 + cos(pi x)) / 2
    static TestFunction nodal(std::vector<double> nodes, std::vector<double> values);

    double value(double t) const;
    double derivative(double t) const;

    std::pair<double, double> support() const { return {lo_, hi_}; }
    /// Points where eta may fail to be smooth (support ends, tent apex, nodes).
    std::vector<double> breakpoints() const;

    /// lambda * eta.
    TestFunction scaled(double lambda) const;

    TestFamily family() const { return family_; }
    double center() const { return 0.5 * (lo_ + hi_); }
    double width() const { return hi_ - lo_; }
    std::string describe() const;

private:
    TestFunction() = default;

    TestFamily family_ = TestFamily::Tent;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double scale_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> values_;
};

/// R(eta) = int |grad eta|^2 dV / int eta^2 dV for radial eta, that is
/// int eta'^2 omega g^{m-1} / a dt over int eta^2 omega a g^{m-1} dt.
/// Throws DomainError if the support leaves the end or the denominator
/// vanishes.
double rayleigh_quotient(const ModelEnd& end, const TestFunction& eta,
                         const QuadratureConfig& cfg = {});

/// Lower bound (m-1)^2 (r / c)^2 / 4 on the bottom of the spectrum for
/// warped ends with constant radial factor c and warp e^{r t}, the setting
/// of the h_kappa argument; empty for every other end.
std::optional<double> poincare_bound(const ModelEnd& end);

struct RayleighSample {
    std::string test_function;
    double quotient = 0.0;
};

struct RayleighReport {
    double t_a = 0.0;
    double t_b = 0.0;
    int n = 0;
    double min_quotient = 0.0;  // smallest discrete eigenvalue
    int iterations = 0;
    std::vector<RayleighSample> samples;  // parametric test functions, if any
    double min_sample_quotient = 0.0;     // +inf when no samples
    std::optional<double> bound;
    std::optional<double> margin;  // min(min_quotient, min_sample_quotient) - bound
};

/// Minimises the discrete Rayleigh quotient over piecewise-linear eta on n
/// uniform intervals of [t_a, t_b] vanishing at both ends.  The conservative
/// three-point stiffness and lumped mass give a symmetric tridiagonal
/// problem whose smallest eigenvalue is found by inverse iteration.
/// `sweep` test functions are evaluated alongside and reported as samples.
/// Throws DomainError for n < 32 or a bad support, SolverError when inverse
/// iteration does not converge.
RayleighReport rayleigh_minimize(const ModelEnd& end, double t_a, double t_b, int n,
                                 std::span<const TestFunction> sweep = {},
                                 const QuadratureConfig& cfg = {});

/// Tents, bumps and truncated cosines of `per_family` widths, nested in
/// [t_a, t_b] and anchored at its centre.
std::vector<TestFunction> default_test_sweep(double t_a, double t_b, int per_family = 6);

/// |int eta^2 Delta h dV + 2 int eta <grad eta, grad h> dV| for h = kappa t,
/// with Delta h = kappa ((m-1) g' / (g a^2) - a' / a^3) and
/// <grad eta, grad h> = kappa eta' / a^2.  The divergence theorem makes it
/// vanish; the residual measures quadrature error only.
double hk_identity_check(const ModelEnd& end, double kappa, const TestFunction& eta,
                         const QuadratureConfig& cfg = {});

struct IsoperimetricSample {
    double t_a = 0.0;
    double t_b = 0.0;
    double volume = 0.0;
    double boundary_area = 0.0;       // A(t_a) + A(t_b)
    double curvature_integral = 0.0;  // int_N |H| dV; 0 when |H| is unavailable
    bool curvature_available = true;
    double ratio = 0.0;               // (boundary + curvature) / volume^{(m-1)/m}
};

struct IsoperimetricScan {
    std::vector<IsoperimetricSample> samples;
    double inf_ratio = 0.0;
    std::size_t argmin = 0;  // ties go to the smallest t_a
};

/// Throws DomainError for a degenerate domain t_a >= t_b or one leaving the end.
IsoperimetricScan isoperimetric_scan(const ModelEnd& end,
                                     std::span<const std::pair<double, double>> domains,
                                     const QuadratureConfig& cfg = {});

/// [t0, t0 + L] for `count` log-spaced L in [1e-2, 1e2].
std::vector<std::pair<double, double>> default_isoperimetric_domains(const ModelEnd& end,
                                                                     int count = 64);

struct VolumeBoundRow {
    double R = 0.0;
    double volume = 0.0;  // vol of {t >= t0 : |s(t) - s(t_q)| <= R}
    double bound = 0.0;   // R^m / (2 S m)
    bool violated = false;
};

struct VolumeBoundReport {
    double s_obs = 0.0;
    double t_q = 0.0;
    std::vector<VolumeBoundRow> rows;
    std::vector<double> violations;  // R values with volume < bound
};

/// Radial-ball version of vol(B_R(q)) >= R^m / (2 S m).  Arc length is
/// inverted with a bracketing root finder.
VolumeBoundReport volume_lower_bound_check(const ModelEnd& end, double s_obs,
                                           std::span<const double> radii,
                                           std::optional<double> t_q = std::nullopt,
                                           const QuadratureConfig& cfg = {});

}  // namespace endscope
