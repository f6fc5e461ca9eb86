#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "endscope/classify.hpp"
#include "endscope/model_end.hpp"
#include "endscope/profile.hpp"
#include "endscope/quadrature.hpp"

namespace endscope {

/// A profile as written in a config file.  Only the fields of `family`
/// are read or written.
struct ProfileSpec {
    std::string family = "power";  // power | gaussian_neck | exp_warp | constant | sampled
    double exponent = 1.0;         // power
    double offset = 0.0;           // power
    std::optional<double> t_min;   // power
    double scale = 1.0;            // gaussian_neck
    double rate = 1.0;             // exp_warp
    double c = 1.0;                // constant
    std::vector<double> knots;     // sampled
    std::vector<double> values;    // sampled
    std::string tail;              // sampled: "", "power" or "exp"
    double tail_parameter = 0.0;   // sampled: exponent or rate

    ProfileFn build() const;
    bool operator==(const ProfileSpec&) const = default;
};

struct EndSpec {
    std::string name;
    std::string builtin;  // euclidean | cylinder | exp_warp | power_parabolic | gaussian_neck; empty for explicit ends
    std::string kind = "revolution";  // revolution | warped
    int m = 3;
    double t0 = 0.0;
    ProfileSpec profile;  // revolution
    ProfileSpec radial;   // warped
    ProfileSpec warp;     // warped
    std::optional<double> omega;          // warped; default unit sphere volume
    std::string extrinsic = "intrinsic";  // warped: intrinsic | minimal
    std::optional<std::pair<double, double>> rayleigh_support;

    /// Throws ConfigError (without location) or DomainError on invalid geometry.
    ModelEnd build() const;
    bool operator==(const EndSpec&) const = default;
};

struct OutputSpec {
    std::string dir = ".";
    std::string report = "report.json";
    std::string phase_csv = "phase.csv";
    std::string phase_json = "phase.json";

    bool operator==(const OutputSpec&) const = default;
};

/// Analyses run by `analyze` in addition to the signature and flags.
inline const std::vector<std::string> kAllAnalyses{"exhaustion", "rayleigh", "isoperimetric",
                                                   "energy_trace"};

struct RunConfig {
    std::vector<EndSpec> ends;
    std::vector<double> p_grid{2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0};
    std::vector<double> radii;   // absolute t values; empty means t0 + {1, 2, 4, ..., 32} per end
    std::vector<double> probes;  // absolute t values; empty means t0 + {0.25, 0.5, 0.75, 1} per end
    QuadratureConfig quadrature;
    std::optional<SweepSpec> sweep;
    OutputSpec output;
    std::vector<std::string> analyses = kAllAnalyses;
    double sobolev_constant = 1.0;
    int rayleigh_n = 2048;
    bool inconclusive_as_warning = false;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a YAML config.  Throws ConfigError carrying the
/// line and column of the offending node.
RunConfig parse_config(const std::string& text);

/// Reads `path` and parses it; unreadable files raise ConfigError.
RunConfig load_config(const std::string& path);

/// Canonical YAML text; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Hex SHA-256 of the canonical text.
std::string config_hash(const RunConfig& config);

}  // namespace endscope
