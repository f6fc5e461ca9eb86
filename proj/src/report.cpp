#include "endscope/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

#include "endscope/errors.hpp"

namespace endscope {

using nlohmann::json;

namespace {

json numbers(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

json flag_json(const FlagResult& f) { return {{"flag", to_string(f.flag)}, {"text", f.text}}; }

json hit_json(const QuestionHit& h) { return {{"hit", h.hit}, {"text", h.text}}; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string safe_name(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

// A report value printed as a plot column: numbers in shortest form,
// strings ("inf", "nan") verbatim, null as nan.
std::string column(const json& v) {
    if (v.is_number()) return fmt::format("{}", v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return "nan";
}

}  // namespace

json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json to_json(const TailModel& tail) {
    if (const auto* p = std::get_if<PowerTail>(&tail)) return {{"kind", "power"}, {"exponent", number(p->exponent)}};
    if (const auto* e = std::get_if<ExpTail>(&tail)) return {{"kind", "exp"}, {"rate", number(e->rate)}};
    return {{"kind", "unknown"}};
}

json to_json(const ConvergenceVerdict& verdict) {
    if (const auto* c = std::get_if<Converges>(&verdict)) {
        return {{"verdict", "Converges"},        {"value", number(c->value)},
                {"error_bound", number(c->error_bound)}, {"tail", to_json(c->tail)},
                {"within_tolerance", c->within_tolerance}, {"truncation", number(c->truncation)}};
    }
    if (const auto* d = std::get_if<Diverges>(&verdict)) return {{"verdict", "Diverges"}, {"tail", to_json(d->rate)}};
    return {{"verdict", "Inconclusive"}, {"reason", std::get<Inconclusive>(verdict).reason}};
}

json to_json(const EndAnalysis& a) {
    const EndSignature& sig = a.signature;
    json lp = json::array();
    for (const auto& [p, v] : sig.lp_map) lp.push_back({{"p", p}, {"verdict", to_json(v)}});
    json sup = nullptr;
    if (sig.sup_norm) {
        sup = {{"finite", sig.sup_norm->finite ? json(*sig.sup_norm->finite) : json(nullptr)},
               {"max_sampled", number(sig.sup_norm->value)},
               {"reason", sig.sup_norm->reason}};
    }
    const Thresholds& th = sig.thresholds;
    const ParabolicityReport& par = sig.parabolicity;
    const VolumeGrowth& vg = par.volume_growth;

    json out = {
        {"name", a.name},
        {"descriptor", sig.descriptor},
        {"m", sig.m},
        {"t0", number(a.t0)},
        {"signature",
         {{"volume", to_json(sig.volume)},
          {"lp", lp},
          {"sup_norm", sup},
          {"thresholds",
           {{"p_crit", th.p_crit ? number(*th.p_crit) : json(nullptr)},
            {"finite_side", to_string(th.side)},
            {"volume_tail", to_json(th.volume_tail)},
            {"capacity_tail", to_json(th.capacity_tail)}}},
          {"holder_consistent", sig.holder_consistent}}},
        {"parabolicity",
         {{"verdict", to_string(par.verdict)},
          {"capacity", to_json(par.capacity)},
          {"volume_growth",
           {{"exponent", number(vg.exponent)},
            {"exponent_settled", vg.exponent_settled},
            {"criterion", to_json(vg.criterion)},
            {"implies_parabolic", vg.implies_parabolic},
            {"s", numbers(vg.s)},
            {"V", numbers(vg.V)}}},
          {"agreement", par.agreement},
          {"harmonic_limit_log_capacity_integral",
           par.harmonic_limit ? number(par.harmonic_limit->log_total()) : json(nullptr)}}},
        {"flags",
         {{"theorem1", flag_json(a.flags.theorem1)},
          {"theoremB", flag_json(a.flags.theoremB)},
          {"theoremA_note", a.flags.theoremA_note},
          {"openQ1", hit_json(a.flags.openQ1)},
          {"openQ2", hit_json(a.flags.openQ2)}}},
    };

    if (a.exhaustion) {
        const ExhaustionReport& e = *a.exhaustion;
        json values = json::array();
        for (const auto& row : e.values) values.push_back(numbers(row));
        out["exhaustion"] = {{"radii", numbers(e.radii)},
                             {"probes", numbers(e.probes)},
                             {"values", values},
                             {"sup_increase", number(e.sup_increase)},
                             {"limit", numbers(e.limit)},
                             {"limit_is_one", e.limit_is_one},
                             {"increment_ratio", number(e.increment_ratio)},
                             {"extrapolated", to_string(e.extrapolated)}};
    }
    if (!a.harmonic_profiles.empty()) {
        json hp = json::array();
        for (const auto& s : a.harmonic_profiles) hp.push_back({{"r", number(s.r)}, {"t", numbers(s.t)}, {"f", numbers(s.f)}});
        out["harmonic_profiles"] = hp;
    }
    if (a.rayleigh) {
        const RayleighReport& r = *a.rayleigh;
        json samples = json::array();
        for (const auto& s : r.samples) samples.push_back({{"test_function", s.test_function}, {"quotient", number(s.quotient)}});
        out["rayleigh"] = {{"support", {number(r.t_a), number(r.t_b)}},
                           {"n", r.n},
                           {"min_quotient", number(r.min_quotient)},
                           {"iterations", r.iterations},
                           {"samples", samples},
                           {"min_sample_quotient", number(r.min_sample_quotient)},
                           {"bound", r.bound ? number(*r.bound) : json(nullptr)},
                           {"margin", r.margin ? number(*r.margin) : json(nullptr)}};
    }
    if (a.isoperimetric) {
        json samples = json::array();
        for (const auto& s : a.isoperimetric->samples) {
            samples.push_back({{"t_a", number(s.t_a)},
                               {"t_b", number(s.t_b)},
                               {"volume", number(s.volume)},
                               {"boundary_area", number(s.boundary_area)},
                               {"curvature_integral", number(s.curvature_integral)},
                               {"curvature_available", s.curvature_available},
                               {"ratio", number(s.ratio)}});
        }
        out["isoperimetric"] = {{"samples", samples},
                                {"inf_ratio", number(a.isoperimetric->inf_ratio)},
                                {"argmin", a.isoperimetric->argmin}};
    }
    if (a.volume_bound) {
        json rows = json::array();
        for (const auto& r : a.volume_bound->rows) {
            rows.push_back({{"R", number(r.R)}, {"volume", number(r.volume)}, {"bound", number(r.bound)}, {"violated", r.violated}});
        }
        out["volume_bound"] = {{"s_obs", number(a.volume_bound->s_obs)},
                               {"t_q", number(a.volume_bound->t_q)},
                               {"rows", rows},
                               {"violations", numbers(a.volume_bound->violations)}};
    }
    if (a.energy_trace) {
        json rows = json::array();
        for (const auto& r : a.energy_trace->rows) {
            rows.push_back({{"r", number(r.r)},
                            {"h", number(r.h)},
                            {"h_error", number(r.h_error)},
                            {"sobolev_lhs", number(r.sobolev_lhs)},
                            {"curvature_term", r.curvature_term ? number(*r.curvature_term) : json(nullptr)}});
        }
        out["energy_trace"] = {{"r0", number(a.energy_trace->r0)},
                               {"sobolev_constant", number(a.energy_trace->sobolev_constant)},
                               {"rows", rows}};
    }
    json errors = json::array();
    for (const auto& e : a.errors) {
        errors.push_back({{"analysis", e.analysis}, {"consistency", e.consistency}, {"message", e.message}});
    }
    out["errors"] = errors;
    json timings = json::object();
    for (const auto& [stage, seconds] : a.timings) timings[stage] = seconds;
    out["timings"] = timings;
    return out;
}

json to_json(const PhaseTable& table, const SweepSpec& spec) {
    json cells = json::array();
    for (const PhaseCell& c : table.cells) {
        cells.push_back({{"m", c.m},
                         {"alpha", c.alpha},
                         {"p", c.p},
                         {"analytic_verdict", c.analytic_verdict},
                         {"numeric_verdict", c.numeric_verdict},
                         {"agreement", to_string(c.agreement)},
                         {"notes", c.notes}});
    }
    json families = json::array();
    for (const FamilySummary& f : table.families) {
        families.push_back({{"m", f.m},
                            {"alpha", f.alpha},
                            {"analytic_parabolic", f.analytic_parabolic},
                            {"numeric_parabolicity", to_string(f.numeric_parabolicity)},
                            {"volume", to_json(f.volume)},
                            {"theorem1", flag_json(f.theorem1)},
                            {"theoremB", flag_json(f.theoremB)}});
    }
    return {{"family", "power"},
            {"grid", {{"m", spec.ms}, {"alpha", spec.alphas}, {"p", spec.ps}}},
            {"summary",
             {{"cells", table.cells.size()},
              {"agreements", table.agreements},
              {"disagreements", table.disagreements},
              {"excluded", table.excluded},
              {"inconclusive", table.inconclusive},
              {"theorem_failures", table.theorem_failures}}},
            {"cells", cells},
            {"families", families}};
}

json make_report(const std::string& config_hash, const std::vector<EndAnalysis>& ends,
                 const PhaseTable* sweep, const SweepSpec* spec) {
    json out = {{"version", kToolVersion}, {"schema_version", kSchemaVersion}, {"config_hash", config_hash}};
    json list = json::array();
    for (const EndAnalysis& a : ends) list.push_back(to_json(a));
    out["ends"] = list;
    out["sweep"] = sweep && spec ? to_json(*sweep, *spec) : json(nullptr);
    return out;
}

std::string dump(const json& report) { return report.dump(2) + "\n"; }

std::string phase_csv(const PhaseTable& table) {
    std::string out = "m,alpha,p,analytic_verdict,numeric_verdict,agreement,notes\n";
    for (const PhaseCell& c : table.cells) {
        out += fmt::format("{},{},{},{},{},{},{}\n", c.m, c.alpha, c.p, csv_field(c.analytic_verdict),
                           csv_field(c.numeric_verdict), to_string(c.agreement), csv_field(c.notes));
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move report into place at '" + path + "'");
    }
}

std::vector<std::pair<std::string, std::string>> plot_files(const json& report, const std::string& what) {
    if (std::find(kPlotKinds.begin(), kPlotKinds.end(), what) == kPlotKinds.end()) {
        throw ConfigError("unknown plot data '" + what + "' (expected harmonic_profiles, V_of_s, h_trace or phase)");
    }
    std::vector<std::pair<std::string, std::string>> files;
    if (what == "phase") {
        if (!report.contains("sweep") || report["sweep"].is_null()) throw ConfigError("report has no sweep data");
        std::string text = "# power family phase table, long form\n# columns: m alpha p verdict agreement\n";
        for (const json& c : report["sweep"]["cells"]) {
            const std::string numeric = c["numeric_verdict"].get<std::string>();
            text += fmt::format("{} {} {} {} {}\n", c["m"].get<int>(), column(c["alpha"]), column(c["p"]),
                                numeric.substr(0, numeric.find('|')), c["agreement"].get<std::string>());
        }
        files.emplace_back("phase.dat", text);
        return files;
    }
    if (!report.contains("ends")) throw ConfigError("report has no ends");
    for (const json& e : report["ends"]) {
        const std::string name = e["name"].get<std::string>();
        if (what == "harmonic_profiles" && e.contains("harmonic_profiles")) {
            std::string text = "# end " + name + "\n# columns: r t f_r(t)\n";
            for (const json& s : e["harmonic_profiles"]) {
                for (std::size_t i = 0; i < s["t"].size(); ++i) {
                    text += column(s["r"]) + " " + column(s["t"][i]) + " " + column(s["f"][i]) + "\n";
                }
            }
            files.emplace_back(safe_name(name) + "_harmonic_profiles.dat", text);
        } else if (what == "V_of_s") {
            const json& vg = e["parabolicity"]["volume_growth"];
            std::string text = "# end " + name + "\n# fitted exponent " + column(vg["exponent"]) +
                               (vg["exponent_settled"].get<bool>() ? " (settled)" : " (not settled)") +
                               "\n# columns: s V(s)\n";
            for (std::size_t i = 0; i < vg["s"].size(); ++i) {
                text += column(vg["s"][i]) + " " + column(vg["V"][i]) + "\n";
            }
            files.emplace_back(safe_name(name) + "_V_of_s.dat", text);
        } else if (what == "h_trace" && e.contains("energy_trace")) {
            std::string text = "# end " + name + "\n# r0 " + column(e["energy_trace"]["r0"]) +
                               "\n# columns: r h sobolev_lhs curvature_term\n";
            for (const json& r : e["energy_trace"]["rows"]) {
                text += column(r["r"]) + " " + column(r["h"]) + " " + column(r["sobolev_lhs"]) + " " +
                        column(r["curvature_term"]) + "\n";
            }
            files.emplace_back(safe_name(name) + "_h_trace.dat", text);
        }
    }
    if (files.empty()) throw ConfigError("report has no " + what + " data");
    return files;
}

}  // namespace endscope
