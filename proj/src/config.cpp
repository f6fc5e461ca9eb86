#include "endscope/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "endscope/builtin_ends.hpp"
#include "endscope/errors.hpp"

namespace endscope {

namespace {

const std::set<std::string> kFamilies{"power", "gaussian_neck", "exp_warp", "constant", "sampled"};
const std::set<std::string> kBuiltins{"euclidean", "cylinder", "exp_warp", "power_parabolic",
                                      "gaussian_neck"};

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) throw ConfigError(what);
    throw ConfigError(what, mark.line, mark.column);
}

void require_map(const YAML::Node& node, const std::string& what) {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail(node, what + " has the wrong type: '" + node.Scalar() + "'");
    }
}

double finite_double(const YAML::Node& node, const std::string& what) {
    const double v = scalar<double>(node, what);
    if (!std::isfinite(v)) fail(node, what + " must be finite");
    return v;
}

template <typename T>
std::vector<T> sequence(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    std::vector<T> out;
    for (const auto& item : node) {
        if constexpr (std::is_same_v<T, double>) {
            out.push_back(finite_double(item, what + " entry"));
        } else {
            out.push_back(scalar<T>(item, what + " entry"));
        }
    }
    return out;
}

// Runs `check`, re-raising location-free errors at `node`.
template <typename F>
void at(const YAML::Node& node, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        if (e.line >= 0) throw;
        fail(node, e.what());
    } catch (const DomainError& e) {
        fail(node, e.what());
    }
}

ProfileSpec parse_profile(const YAML::Node& node, const std::string& where) {
    require_map(node, where);
    ProfileSpec p;
    if (!node["family"]) fail(node, where + " needs a family");
    p.family = scalar<std::string>(node["family"], where + ".family");
    if (!kFamilies.count(p.family)) fail(node["family"], "unknown profile family '" + p.family + "'");
    if (p.family == "power") {
        check_keys(node, {"family", "exponent", "offset", "t_min"}, where);
        if (node["exponent"]) p.exponent = finite_double(node["exponent"], where + ".exponent");
        if (node["offset"]) p.offset = finite_double(node["offset"], where + ".offset");
        if (node["t_min"]) p.t_min = finite_double(node["t_min"], where + ".t_min");
    } else if (p.family == "gaussian_neck") {
        check_keys(node, {"family", "scale"}, where);
        if (node["scale"]) p.scale = finite_double(node["scale"], where + ".scale");
    } else if (p.family == "exp_warp") {
        check_keys(node, {"family", "rate"}, where);
        if (node["rate"]) p.rate = finite_double(node["rate"], where + ".rate");
    } else if (p.family == "constant") {
        check_keys(node, {"family", "c"}, where);
        if (node["c"]) p.c = finite_double(node["c"], where + ".c");
    } else {
        check_keys(node, {"family", "knots", "values", "tail", "tail_parameter"}, where);
        if (!node["knots"] || !node["values"]) fail(node, where + " needs knots and values");
        p.knots = sequence<double>(node["knots"], where + ".knots");
        p.values = sequence<double>(node["values"], where + ".values");
        if (node["tail"]) {
            p.tail = scalar<std::string>(node["tail"], where + ".tail");
            if (p.tail != "power" && p.tail != "exp") fail(node["tail"], "tail must be 'power' or 'exp'");
            if (!node["tail_parameter"]) fail(node, where + " needs tail_parameter");
            p.tail_parameter = finite_double(node["tail_parameter"], where + ".tail_parameter");
        } else if (node["tail_parameter"]) {
            fail(node["tail_parameter"], "tail_parameter given without tail");
        }
    }
    at(node, [&] { (void)p.build(); });
    return p;
}

EndSpec parse_end(const YAML::Node& node, std::size_t index) {
    const std::string where = "ends[" + std::to_string(index) + "]";
    require_map(node, where);
    EndSpec e;
    if (!node["name"]) fail(node, where + " needs a name");
    e.name = scalar<std::string>(node["name"], where + ".name");
    if (e.name.empty()) fail(node["name"], "end names must be nonempty");
    if (node["m"]) e.m = scalar<int>(node["m"], where + ".m");
    if (e.m < 2 || e.m > 64) fail(node["m"] ? node["m"] : node, "m must lie in [2, 64]");
    if (node["rayleigh_support"]) {
        const auto s = sequence<double>(node["rayleigh_support"], where + ".rayleigh_support");
        if (s.size() != 2 || !(s[1] > s[0])) {
            fail(node["rayleigh_support"], "rayleigh_support must be [t_a, t_b] with t_a < t_b");
        }
        e.rayleigh_support = std::make_pair(s[0], s[1]);
    }
    if (node["builtin"]) {
        check_keys(node, {"name", "builtin", "m", "rayleigh_support"}, where);
        e.builtin = scalar<std::string>(node["builtin"], where + ".builtin");
        if (!kBuiltins.count(e.builtin)) fail(node["builtin"], "unknown builtin end '" + e.builtin + "'");
    } else {
        if (node["kind"]) e.kind = scalar<std::string>(node["kind"], where + ".kind");
        if (node["t0"]) e.t0 = finite_double(node["t0"], where + ".t0");
        if (e.kind == "revolution") {
            check_keys(node, {"name", "kind", "m", "t0", "profile", "rayleigh_support"}, where);
            if (!node["profile"]) fail(node, where + " needs a profile");
            e.profile = parse_profile(node["profile"], where + ".profile");
        } else if (e.kind == "warped") {
            check_keys(node, {"name", "kind", "m", "t0", "radial", "warp", "omega", "extrinsic",
                              "rayleigh_support"},
                       where);
            if (!node["radial"] || !node["warp"]) fail(node, where + " needs radial and warp profiles");
            e.radial = parse_profile(node["radial"], where + ".radial");
            e.warp = parse_profile(node["warp"], where + ".warp");
            if (node["omega"]) {
                e.omega = finite_double(node["omega"], where + ".omega");
                if (!(*e.omega > 0.0)) fail(node["omega"], "omega must be positive");
            }
            if (node["extrinsic"]) {
                e.extrinsic = scalar<std::string>(node["extrinsic"], where + ".extrinsic");
                if (e.extrinsic != "intrinsic" && e.extrinsic != "minimal") {
                    fail(node["extrinsic"], "extrinsic must be 'intrinsic' or 'minimal'");
                }
            }
        } else {
            fail(node["kind"], "kind must be 'revolution' or 'warped'");
        }
    }
    at(node, [&] { (void)e.build(); });
    return e;
}

SweepSpec parse_sweep(const YAML::Node& node) {
    SweepSpec s;
    if (node.IsNull()) return s;
    require_map(node, "sweep");
    check_keys(node, {"family", "m", "alpha", "p"}, "sweep");
    if (node["family"]) {
        const auto family = scalar<std::string>(node["family"], "sweep.family");
        if (family != "power") fail(node["family"], "only the power family can be swept");
    }
    if (node["m"]) s.ms = sequence<int>(node["m"], "sweep.m");
    if (node["alpha"]) s.alphas = sequence<double>(node["alpha"], "sweep.alpha");
    if (node["p"]) s.ps = sequence<double>(node["p"], "sweep.p");
    at(node, [&] { s.validate(); });
    return s;
}

void emit_profile(YAML::Emitter& out, const ProfileSpec& p) {
    out << YAML::BeginMap << YAML::Key << "family" << YAML::Value << p.family;
    if (p.family == "power") {
        out << YAML::Key << "exponent" << YAML::Value << p.exponent;
        out << YAML::Key << "offset" << YAML::Value << p.offset;
        if (p.t_min) out << YAML::Key << "t_min" << YAML::Value << *p.t_min;
    } else if (p.family == "gaussian_neck") {
        out << YAML::Key << "scale" << YAML::Value << p.scale;
    } else if (p.family == "exp_warp") {
        out << YAML::Key << "rate" << YAML::Value << p.rate;
    } else if (p.family == "constant") {
        out << YAML::Key << "c" << YAML::Value << p.c;
    } else {
        out << YAML::Key << "knots" << YAML::Value << YAML::Flow << p.knots;
        out << YAML::Key << "values" << YAML::Value << YAML::Flow << p.values;
        if (!p.tail.empty()) {
            out << YAML::Key << "tail" << YAML::Value << p.tail;
            out << YAML::Key << "tail_parameter" << YAML::Value << p.tail_parameter;
        }
    }
    out << YAML::EndMap;
}

}  // namespace

ProfileFn ProfileSpec::build() const {
    if (family == "power") return ProfileFn::power(exponent, offset, t_min);
    if (family == "gaussian_neck") return ProfileFn::gaussian_neck(scale);
    if (family == "exp_warp") return ProfileFn::exp_warp(rate);
    if (family == "constant") return ProfileFn::constant(c);
    if (family == "sampled") {
        std::optional<TailModel> law;
        if (tail == "power") law = PowerTail{tail_parameter};
        if (tail == "exp") law = ExpTail{tail_parameter};
        return ProfileFn::sampled(knots, values, law);
    }
    throw ConfigError("unknown profile family '" + family + "'");
}

ModelEnd EndSpec::build() const {
    if (builtin == "euclidean") return euclidean_end(m);
    if (builtin == "cylinder") return cylinder_end(m);
    if (builtin == "exp_warp") return exp_warp_end(m);
    if (builtin == "power_parabolic") return power_parabolic_end(m);
    if (builtin == "gaussian_neck") return gaussian_neck_end(m);
    if (!builtin.empty()) throw ConfigError("unknown builtin end '" + builtin + "'");
    if (kind == "revolution") return make_revolution_end(profile.build(), m, t0);
    if (kind == "warped") {
        return ModelEnd::warped(m, t0, radial.build(), warp.build(),
                                omega.value_or(unit_sphere_volume(m - 1)),
                                extrinsic == "minimal" ? Extrinsic::Minimal : Extrinsic::Intrinsic);
    }
    throw ConfigError("kind must be 'revolution' or 'warped'");
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line, e.mark.column);
    }
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    require_map(root, "config");
    check_keys(root, {"version", "ends", "p_grid", "radii", "probes", "quadrature", "sweep", "output",
                      "analyses", "sobolev_constant", "rayleigh_n", "inconclusive_as_warning"},
               "config");
    if (root["version"]) {
        const int v = scalar<int>(root["version"], "version");
        if (v != 1) fail(root["version"], "unsupported config version " + std::to_string(v));
    }
    if (root["ends"]) {
        const YAML::Node ends = root["ends"];
        if (!ends.IsSequence()) fail(ends, "ends must be a list");
        std::set<std::string> names;
        for (std::size_t i = 0; i < ends.size(); ++i) {
            EndSpec e = parse_end(ends[i], i);
            if (!names.insert(e.name).second) fail(ends[i]["name"], "duplicate end name '" + e.name + "'");
            cfg.ends.push_back(std::move(e));
        }
    }
    if (root["p_grid"]) {
        cfg.p_grid = sequence<double>(root["p_grid"], "p_grid");
        if (cfg.p_grid.empty()) fail(root["p_grid"], "p_grid must be nonempty");
        for (double p : cfg.p_grid) {
            if (!(p >= 1.0 && p <= 64.0)) fail(root["p_grid"], "p_grid values must lie in [1, 64]");
        }
    }
    auto increasing = [&](const char* key, std::vector<double>& dst) {
        if (!root[key]) return;
        dst = sequence<double>(root[key], key);
        if (dst.empty()) fail(root[key], std::string(key) + " must be nonempty when given");
        for (std::size_t i = 1; i < dst.size(); ++i) {
            if (!(dst[i] > dst[i - 1])) fail(root[key], std::string(key) + " must be strictly increasing");
        }
    };
    increasing("radii", cfg.radii);
    increasing("probes", cfg.probes);
    if (root["quadrature"]) {
        const YAML::Node q = root["quadrature"];
        require_map(q, "quadrature");
        check_keys(q, {"rel_tol", "abs_tol", "max_depth", "tail_windows", "tail_margin"}, "quadrature");
        if (q["rel_tol"]) cfg.quadrature.rel_tol = finite_double(q["rel_tol"], "quadrature.rel_tol");
        if (q["abs_tol"]) cfg.quadrature.abs_tol = finite_double(q["abs_tol"], "quadrature.abs_tol");
        if (q["max_depth"]) cfg.quadrature.max_depth = scalar<int>(q["max_depth"], "quadrature.max_depth");
        if (q["tail_windows"]) {
            cfg.quadrature.tail_windows = scalar<int>(q["tail_windows"], "quadrature.tail_windows");
        }
        if (q["tail_margin"]) {
            cfg.quadrature.tail_margin = finite_double(q["tail_margin"], "quadrature.tail_margin");
        }
        at(q, [&] { cfg.quadrature.validate(); });
    }
    if (root["sweep"]) cfg.sweep = parse_sweep(root["sweep"]);
    if (root["output"]) {
        const YAML::Node o = root["output"];
        require_map(o, "output");
        check_keys(o, {"dir", "report", "phase_csv", "phase_json"}, "output");
        auto path = [&](const char* key, std::string& dst) {
            if (!o[key]) return;
            dst = scalar<std::string>(o[key], std::string("output.") + key);
            if (dst.empty()) fail(o[key], std::string("output.") + key + " must be nonempty");
        };
        path("dir", cfg.output.dir);
        path("report", cfg.output.report);
        path("phase_csv", cfg.output.phase_csv);
        path("phase_json", cfg.output.phase_json);
    }
    if (root["analyses"]) {
        cfg.analyses = sequence<std::string>(root["analyses"], "analyses");
        std::set<std::string> seen;
        for (const auto& a : cfg.analyses) {
            if (std::find(kAllAnalyses.begin(), kAllAnalyses.end(), a) == kAllAnalyses.end()) {
                fail(root["analyses"], "unknown analysis '" + a + "'");
            }
            if (!seen.insert(a).second) fail(root["analyses"], "analysis '" + a + "' listed twice");
        }
    }
    if (root["sobolev_constant"]) {
        cfg.sobolev_constant = finite_double(root["sobolev_constant"], "sobolev_constant");
        if (!(cfg.sobolev_constant > 0.0)) fail(root["sobolev_constant"], "sobolev_constant must be positive");
    }
    if (root["rayleigh_n"]) {
        cfg.rayleigh_n = scalar<int>(root["rayleigh_n"], "rayleigh_n");
        if (cfg.rayleigh_n < 32) fail(root["rayleigh_n"], "rayleigh_n must be at least 32");
    }
    if (root["inconclusive_as_warning"]) {
        cfg.inconclusive_as_warning = scalar<bool>(root["inconclusive_as_warning"], "inconclusive_as_warning");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string emit_config(const RunConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "version" << YAML::Value << 1;
    out << YAML::Key << "ends" << YAML::Value << YAML::BeginSeq;
    for (const EndSpec& e : cfg.ends) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << e.name;
        out << YAML::Key << "m" << YAML::Value << e.m;
        if (!e.builtin.empty()) {
            out << YAML::Key << "builtin" << YAML::Value << e.builtin;
        } else {
            out << YAML::Key << "kind" << YAML::Value << e.kind;
            out << YAML::Key << "t0" << YAML::Value << e.t0;
            if (e.kind == "revolution") {
                out << YAML::Key << "profile" << YAML::Value;
                emit_profile(out, e.profile);
            } else {
                out << YAML::Key << "radial" << YAML::Value;
                emit_profile(out, e.radial);
                out << YAML::Key << "warp" << YAML::Value;
                emit_profile(out, e.warp);
                if (e.omega) out << YAML::Key << "omega" << YAML::Value << *e.omega;
                out << YAML::Key << "extrinsic" << YAML::Value << e.extrinsic;
            }
        }
        if (e.rayleigh_support) {
            out << YAML::Key << "rayleigh_support" << YAML::Value << YAML::Flow << YAML::BeginSeq
                << e.rayleigh_support->first << e.rayleigh_support->second << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "p_grid" << YAML::Value << YAML::Flow << cfg.p_grid;
    if (!cfg.radii.empty()) out << YAML::Key << "radii" << YAML::Value << YAML::Flow << cfg.radii;
    if (!cfg.probes.empty()) out << YAML::Key << "probes" << YAML::Value << YAML::Flow << cfg.probes;
    const QuadratureConfig& q = cfg.quadrature;
    out << YAML::Key << "quadrature" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rel_tol" << YAML::Value << q.rel_tol;
    out << YAML::Key << "abs_tol" << YAML::Value << q.abs_tol;
    out << YAML::Key << "max_depth" << YAML::Value << q.max_depth;
    out << YAML::Key << "tail_windows" << YAML::Value << q.tail_windows;
    out << YAML::Key << "tail_margin" << YAML::Value << q.tail_margin;
    out << YAML::EndMap;
    if (cfg.sweep) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "family" << YAML::Value << "power";
        out << YAML::Key << "m" << YAML::Value << YAML::Flow << cfg.sweep->ms;
        out << YAML::Key << "alpha" << YAML::Value << YAML::Flow << cfg.sweep->alphas;
        out << YAML::Key << "p" << YAML::Value << YAML::Flow << cfg.sweep->ps;
        out << YAML::EndMap;
    }
    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << cfg.output.dir;
    out << YAML::Key << "report" << YAML::Value << YAML::DoubleQuoted << cfg.output.report;
    out << YAML::Key << "phase_csv" << YAML::Value << YAML::DoubleQuoted << cfg.output.phase_csv;
    out << YAML::Key << "phase_json" << YAML::Value << YAML::DoubleQuoted << cfg.output.phase_json;
    out << YAML::EndMap;
    out << YAML::Key << "analyses" << YAML::Value << YAML::Flow << cfg.analyses;
    out << YAML::Key << "sobolev_constant" << YAML::Value << cfg.sobolev_constant;
    out << YAML::Key << "rayleigh_n" << YAML::Value << cfg.rayleigh_n;
    out << YAML::Key << "inconclusive_as_warning" << YAML::Value << cfg.inconclusive_as_warning;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string config_hash(const RunConfig& config) {
    const std::string text = emit_config(config);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

}  // namespace endscope
