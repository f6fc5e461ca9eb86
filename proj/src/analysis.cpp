#include "endscope/analysis.hpp"

#include <algorithm>
#include <chrono>

#include "endscope/errors.hpp"

namespace endscope {

namespace {

const std::vector<double> kBallRadii{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
constexpr int kProfileSamples = 32;

bool wants(const RunConfig& config, const std::string& analysis) {
    return std::find(config.analyses.begin(), config.analyses.end(), analysis) != config.analyses.end();
}

class StageTimer {
public:
    StageTimer(EndAnalysis& out, std::string stage)
        : out_(out), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
        out_.timings.emplace_back(stage_, d.count());
    }

private:
    EndAnalysis& out_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

// Runs one optional analysis, recording failures instead of aborting the end.
template <typename F>
void guarded(EndAnalysis& out, const std::string& analysis, F&& body) {
    StageTimer timer(out, analysis);
    try {
        body();
    } catch (const ConsistencyError& e) {
        out.errors.push_back({analysis, true, e.what()});
    } catch (const Error& e) {
        out.errors.push_back({analysis, false, e.what()});
    }
}

}  // namespace

bool EndAnalysis::has_violation() const {
    if (flags.theorem1.failed() || flags.theoremB.failed()) return true;
    if (!signature.holder_consistent || !signature.parabolicity.agreement) return true;
    return std::any_of(errors.begin(), errors.end(), [](const AnalysisError& e) { return e.consistency; });
}

bool EndAnalysis::has_inconclusive() const {
    if (inconclusive(signature.volume) || inconclusive(signature.parabolicity.capacity)) return true;
    for (const auto& [p, v] : signature.lp_map) {
        if (inconclusive(v)) return true;
    }
    if (signature.sup_norm && !signature.sup_norm->finite) return true;
    return std::any_of(errors.begin(), errors.end(), [](const AnalysisError& e) { return !e.consistency; });
}

std::vector<double> effective_radii(const RunConfig& config, double t0) {
    if (!config.radii.empty()) return config.radii;
    std::vector<double> out;
    for (int k = 0; k <= 5; ++k) out.push_back(t0 + std::ldexp(1.0, k));
    return out;
}

std::vector<double> effective_probes(const RunConfig& config, double t0) {
    if (!config.probes.empty()) return config.probes;
    return {t0 + 0.25, t0 + 0.5, t0 + 0.75, t0 + 1.0};
}

EndAnalysis analyze_end(const EndSpec& spec, const RunConfig& config, const QuadratureConfig& cfg) {
    EndAnalysis out;
    out.name = spec.name;
    const ModelEnd end = spec.build();
    out.t0 = end.t0();
    {
        StageTimer timer(out, "signature");
        out.signature = end_signature(spec.name, end, config.p_grid, cfg);
    }
    const std::vector<double> radii = effective_radii(config, end.t0());
    const std::vector<double> probes = effective_probes(config, end.t0());

    if (wants(config, "exhaustion")) {
        guarded(out, "exhaustion", [&] {
            out.exhaustion = exhaustion_limit(end, radii, probes, cfg);
            for (double r : radii) {
                const HarmonicProfile f(end, end.t0(), r, cfg);
                HarmonicSamples s;
                s.r = r;
                for (int k = 0; k <= kProfileSamples; ++k) {
                    const double t = end.t0() + (r - end.t0()) * k / kProfileSamples;
                    s.t.push_back(t);
                    s.f.push_back(f(t));
                }
                out.harmonic_profiles.push_back(std::move(s));
            }
        });
    }
    if (wants(config, "rayleigh")) {
        guarded(out, "rayleigh", [&] {
            const double width = poincare_bound(end) ? 20.0 : 2.0;
            const auto [ta, tb] = spec.rayleigh_support.value_or(std::make_pair(end.t0(), end.t0() + width));
            const auto sweep = default_test_sweep(ta, tb);
            out.rayleigh = rayleigh_minimize(end, ta, tb, config.rayleigh_n, sweep, cfg);
        });
    }
    std::optional<double> sobolev_ratio;
    if (wants(config, "isoperimetric")) {
        guarded(out, "isoperimetric", [&] {
            const auto domains = default_isoperimetric_domains(end);
            out.isoperimetric = isoperimetric_scan(end, domains, cfg);
            sobolev_ratio = out.isoperimetric->inf_ratio;
            out.volume_bound = volume_lower_bound_check(end, 1.0 / out.isoperimetric->inf_ratio, kBallRadii,
                                                        std::nullopt, cfg);
        });
    }
    if (wants(config, "energy_trace") && end.dimension() >= 3) {
        guarded(out, "energy_trace", [&] {
            out.energy_trace = energy_trace(end, end.t0(), radii, config.sobolev_constant, cfg);
        });
    }
    {
        StageTimer timer(out, "flags");
        out.flags = consistency_flags(end, out.signature, config.p_grid, cfg, sobolev_ratio);
    }
    return out;
}

}  // namespace endscope
