#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "endscope/capacity.hpp"
#include "endscope/classify.hpp"
#include "endscope/config.hpp"
#include "endscope/inequalities.hpp"

namespace endscope {

struct HarmonicSamples {
    double r = 0.0;
    std::vector<double> t;
    std::vector<double> f;
};

struct AnalysisError {
    std::string analysis;
    bool consistency = false;  // a violated invariant rather than a numerical failure
    std::string message;
};

/// Everything `analyze` computes for one end.
struct EndAnalysis {
    std::string name;
    double t0 = 0.0;
    EndSignature signature;
    ConsistencyFlags flags;
    std::optional<ExhaustionReport> exhaustion;
    std::vector<HarmonicSamples> harmonic_profiles;
    std::optional<RayleighReport> rayleigh;
    std::optional<IsoperimetricScan> isoperimetric;
    std::optional<VolumeBoundReport> volume_bound;
    std::optional<EnergyTrace> energy_trace;
    std::vector<AnalysisError> errors;
    std::vector<std::pair<std::string, double>> timings;  // stage, wall seconds

    /// Theorem flag violated, Holder ordering broken, the two parabolicity
    /// criteria contradicting each other, or a consistency error.
    bool has_violation() const;
    /// Some verdict is Inconclusive, the sup norm is undecided, or an
    /// analysis failed numerically.
    bool has_inconclusive() const;
};

/// Radii t0 + {1, 2, 4, 8, 16, 32} when the config gives none.
std::vector<double> effective_radii(const RunConfig& config, double t0);
/// Probes t0 + {0.25, 0.5, 0.75, 1} when the config gives none.
std::vector<double> effective_probes(const RunConfig& config, double t0);

EndAnalysis analyze_end(const EndSpec& spec, const RunConfig& config, const QuadratureConfig& cfg);

}  // namespace endscope
