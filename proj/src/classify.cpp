#include "endscope/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "endscope/builtin_ends.hpp"
#include "endscope/errors.hpp"
#include "endscope/inequalities.hpp"
#include "endscope/tail_fit.hpp"

namespace endscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRecheckFactor = 100.0;
// p_crit is read off the window [T, 2T] for the first of these T / base
// where every log density is finite.
constexpr int kThresholdWindowExponents[] = {40, 30, 20, 10};

TailModel tail_of(const ConvergenceVerdict& v) {
    if (const auto* c = std::get_if<Converges>(&v)) return c->tail;
    if (const auto* d = std::get_if<Diverges>(&v)) return d->rate;
    return UnknownTail{};
}

std::string fmt_double(double x) {
    std::ostringstream out;
    out.precision(12);
    out << x;
    return out.str();
}

void compute_thresholds(const ModelEnd& end, EndSignature& sig, const QuadratureConfig& cfg) {
    sig.thresholds.volume_tail = tail_of(sig.volume);
    sig.thresholds.capacity_tail = tail_of(sig.parabolicity.capacity);
    if (!end.has_mean_curvature()) return;
    const double base = std::max(end.t0(), 1.0);
    for (int k : kThresholdWindowExponents) {
        const double T = std::ldexp(base, k);
        const double lh0 = end.log_mean_curvature(T);
        const double lh1 = end.log_mean_curvature(2.0 * T);
        const double lv0 = end.log_volume_density(T);
        const double lv1 = end.log_volume_density(2.0 * T);
        if (!std::isfinite(lh0) || !std::isfinite(lh1) || !std::isfinite(lv0) || !std::isfinite(lv1)) {
            continue;
        }
        // Local exponents of |H| and of the volume density over [T, 2T].
        const double beta_h = (lh1 - lh0) / std::numbers::ln2;
        const double beta_v = (lv1 - lv0) / std::numbers::ln2;
        if (std::abs(beta_h) <= cfg.tail_margin / 10.0) return;
        sig.thresholds.p_crit = (-1.0 - beta_v) / beta_h;
        sig.thresholds.side = beta_h < 0.0 ? FiniteSide::Above : FiniteSide::Below;
        return;
    }
}

SupNorm sup_norm_probe(const ModelEnd& end, const QuadratureConfig& cfg) {
    SupNorm out;
    const double t0 = end.t0();
    double top = -kInf;
    auto visit = [&](double t) {
        const double v = end.log_mean_curvature(t);
        if (!std::isnan(v)) top = std::max(top, v);
    };
    for (int j = 0; j <= 2000; ++j) visit(t0 + 0.01 * j);
    for (int k = 0; k <= 200; ++k) visit(t0 + std::exp2(0.25 * k));
    out.value = std::exp(top);

    const SlopeFit fit = fit_log_tail([&end](double t) { return end.log_mean_curvature(t); }, t0, cfg);
    switch (fit.behavior) {
        case SlopeBehavior::Vanishing:
            out.finite = true;
            out.reason = "|H| vanishes in the tail";
            break;
        case SlopeBehavior::RunawayDown:
            out.finite = true;
            out.reason = "|H| decays faster than any power";
            break;
        case SlopeBehavior::RunawayUp:
            out.finite = false;
            out.reason = "|H| grows faster than any power";
            break;
        case SlopeBehavior::Settled:
            if (fit.exponent > cfg.tail_margin) {
                out.finite = false;
                out.reason = "|H| grows like t^" + fmt_double(fit.exponent);
            } else if (fit.exponent <= cfg.tail_margin / 10.0) {
                out.finite = true;
                out.reason = "|H| behaves like t^" + fmt_double(fit.exponent);
            } else {
                out.reason = "tail exponent of |H| is too close to 0: " + fmt_double(fit.exponent);
            }
            break;
        default:
            out.reason = "tail of |H| undecided: " + fit.reason;
            break;
    }
    if (out.finite == true && !std::isfinite(out.value)) {
        out.finite.reset();
        out.reason = "sampled |H| overflowed";
    }
    return out;
}

// Holder on a finite measure: a finite norm at q forces finite norms below q.
bool holder_ok(const EndSignature& sig) {
    if (!converges(sig.volume)) return true;
    bool seen_finite = false;
    for (auto it = sig.lp_map.rbegin(); it != sig.lp_map.rend(); ++it) {
        if (converges(it->second)) seen_finite = true;
        if (seen_finite && diverges(it->second)) return false;
    }
    return true;
}

struct RangeScan {
    bool any_finite = false;
    bool any_inconclusive = false;
    bool any_point = false;
    std::vector<double> finite_ps;
    std::vector<double> inconclusive_ps;
};

template <typename InRange>
RangeScan scan_range(const EndSignature& sig, InRange in_range) {
    RangeScan r;
    for (const auto& [p, v] : sig.lp_map) {
        if (!in_range(p)) continue;
        r.any_point = true;
        if (converges(v)) {
            r.any_finite = true;
            r.finite_ps.push_back(p);
        } else if (inconclusive(v)) {
            r.any_inconclusive = true;
            r.inconclusive_ps.push_back(p);
        }
    }
    return r;
}

std::string list_ps(const std::vector<double>& ps) {
    std::string out;
    for (double p : ps) out += (out.empty() ? "" : ", ") + fmt_double(p);
    return out;
}

}  // namespace

const char* to_string(FiniteSide side) {
    switch (side) {
        case FiniteSide::Above: return "above";
        case FiniteSide::Below: return "below";
        case FiniteSide::None: return "none";
    }
    return "none";
}

const char* to_string(TheoremFlag flag) {
    switch (flag) {
        case TheoremFlag::Ok: return "ok";
        case TheoremFlag::Vacuous: return "vacuous";
        case TheoremFlag::Violated: return "violated";
        case TheoremFlag::Untestable: return "untestable";
    }
    return "untestable";
}

const char* to_string(Agreement a) {
    switch (a) {
        case Agreement::Agree: return "agree";
        case Agreement::Disagree: return "disagree";
        case Agreement::Excluded: return "excluded";
        case Agreement::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

EndSignature end_signature(const std::string& name, const ModelEnd& end,
                           std::span<const double> p_grid, const QuadratureConfig& cfg) {
    for (double p : p_grid) {
        if (!(p >= 1.0 && p <= 64.0)) throw DomainError("p grid values must lie in [1, 64]");
    }
    EndSignature sig;
    sig.name = name;
    sig.descriptor = end.describe();
    sig.m = end.dimension();
    const double t0 = end.t0();
    sig.volume = classify_improper_log([&end](double t) { return end.log_volume_density(t); }, t0, cfg);
    if (end.has_mean_curvature()) {
        for (double p : p_grid) {
            sig.lp_map[p] = classify_improper_log(
                [&end, p](double t) {
                    const double lh = end.log_mean_curvature(t);
                    return (lh == -kInf ? -kInf : p * lh) + end.log_volume_density(t);
                },
                t0, cfg);
        }
        sig.sup_norm = sup_norm_probe(end, cfg);
    }
    sig.parabolicity = parabolicity(end, cfg);
    compute_thresholds(end, sig, cfg);
    sig.holder_consistent = holder_ok(sig);
    return sig;
}

FlagResult check_theorem1(const EndSignature& sig) {
    if (sig.m < 3) return {TheoremFlag::Untestable, "needs m >= 3"};
    if (sig.lp_map.empty()) return {TheoremFlag::Vacuous, "no L^p data (|H| unavailable)"};
    const double m = sig.m;
    const RangeScan r = scan_range(sig, [m](double p) { return p >= 2.0 && p <= m; });
    if (!r.any_finite) {
        if (r.any_inconclusive) {
            return {TheoremFlag::Untestable, "inconclusive norm at p = " + list_ps(r.inconclusive_ps)};
        }
        return {TheoremFlag::Vacuous, r.any_point ? "no finite L^p norm for p in [2, m]"
                                                  : "no grid p in [2, m]"};
    }
    const std::string hyp = "finite L^p norm at p = " + list_ps(r.finite_ps);
    if (converges(sig.volume)) return {TheoremFlag::Ok, hyp + "; finite volume"};
    if (sig.parabolicity.verdict == Parabolicity::NonParabolic) {
        return {TheoremFlag::Ok, hyp + "; non-parabolic"};
    }
    if (diverges(sig.volume) && sig.parabolicity.verdict == Parabolicity::Parabolic) {
        return {TheoremFlag::Violated, hyp + " but infinite volume and parabolic"};
    }
    return {TheoremFlag::Untestable, hyp + "; volume or parabolicity inconclusive"};
}

FlagResult check_theoremB(const EndSignature& sig) {
    if (sig.lp_map.empty() && !sig.sup_norm) return {TheoremFlag::Vacuous, "no L^p data (|H| unavailable)"};
    const double m = sig.m;
    const RangeScan r = scan_range(sig, [m](double p) { return p >= m; });
    const bool sup_finite = sig.sup_norm && sig.sup_norm->finite == true;
    const bool sup_unknown = sig.sup_norm && !sig.sup_norm->finite.has_value();
    if (!r.any_finite && !sup_finite) {
        if (r.any_inconclusive || sup_unknown) {
            return {TheoremFlag::Untestable, "inconclusive norm for p >= m"};
        }
        return {TheoremFlag::Vacuous, "no finite L^p norm for p in [m, inf]"};
    }
    std::string hyp = r.any_finite ? "finite L^p norm at p = " + list_ps(r.finite_ps) : "";
    if (sup_finite) hyp += std::string(hyp.empty() ? "" : ", ") + "bounded |H|";
    if (diverges(sig.volume)) return {TheoremFlag::Ok, hyp + "; infinite volume"};
    if (converges(sig.volume)) return {TheoremFlag::Violated, hyp + " but finite volume"};
    return {TheoremFlag::Untestable, hyp + "; volume inconclusive"};
}

std::pair<QuestionHit, QuestionHit> hunt_open_questions(const EndSignature& sig) {
    QuestionHit q1, q2;
    const double m = sig.m;
    const RangeScan r1 = scan_range(sig, [m](double p) { return p >= m - 1.0 && p < m; });
    if (inconclusive(sig.volume) || r1.any_inconclusive) {
        q1.text = "not testable: inconclusive verdicts";
    } else if (converges(sig.volume) && r1.any_finite) {
        q1.hit = true;
        q1.text = "finite volume with finite L^p norm at p = " + list_ps(r1.finite_ps);
    } else {
        q1.text = "no hit";
    }
    const RangeScan r2 = scan_range(sig, [m](double p) { return p > m && p <= 2.0 * (m - 1.0); });
    if (sig.parabolicity.verdict == Parabolicity::Inconclusive || r2.any_inconclusive) {
        q2.text = "not testable: inconclusive verdicts";
    } else if (sig.parabolicity.verdict == Parabolicity::Parabolic && r2.any_finite) {
        q2.hit = true;
        q2.text = "parabolic with finite L^p norm at p = " + list_ps(r2.finite_ps);
    } else {
        q2.text = "no hit";
    }
    return {q1, q2};
}

ConsistencyFlags consistency_flags(const ModelEnd& end, const EndSignature& sig,
                                   std::span<const double> p_grid, const QuadratureConfig& cfg,
                                   std::optional<double> sobolev_ratio) {
    ConsistencyFlags flags;
    flags.theorem1 = check_theorem1(sig);
    flags.theoremB = check_theoremB(sig);
    if (sobolev_ratio && *sobolev_ratio > 0.0) {
        flags.theoremA_note = "isoperimetric scan found a positive Sobolev-type ratio " +
                              fmt_double(*sobolev_ratio) +
                              " on radial domains; the Sobolev inequality itself is not verified";
    } else {
        flags.theoremA_note = "no isoperimetric scan";
    }
    auto [q1, q2] = hunt_open_questions(sig);
    if (q1.hit || q2.hit) {
        const EndSignature fine = end_signature(sig.name, end, p_grid, cfg.tightened(kRecheckFactor));
        const auto [r1, r2] = hunt_open_questions(fine);
        const std::string tag = "candidate, requires manual verification";
        if (q1.hit) q1 = r1.hit ? QuestionHit{true, r1.text + " (" + tag + ")"}
                                : QuestionHit{false, "hit vanished under tightened tolerances"};
        if (q2.hit) q2 = r2.hit ? QuestionHit{true, r2.text + " (" + tag + ")"}
                                : QuestionHit{false, "hit vanished under tightened tolerances"};
    }
    flags.openQ1 = q1;
    flags.openQ2 = q2;
    return flags;
}

double power_family_p_crit(int m, double alpha) { return (m - 1.0) + 1.0 / alpha; }

void SweepSpec::validate() const {
    if (ms.empty() || alphas.empty() || ps.empty()) throw ConfigError("sweep grids must be nonempty");
    for (int m : ms) {
        if (m < 3 || m > 64) throw ConfigError("sweep m must lie in [3, 64]");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("sweep alpha must lie in (0, 1]");
    }
    for (double p : ps) {
        if (!(p >= 1.0 && p <= 64.0)) throw ConfigError("sweep p must lie in [1, 64]");
    }
}

namespace {

struct FamilyResult {
    FamilySummary summary;
    std::vector<PhaseCell> cells;
};

FamilyResult sweep_family(int m, double alpha, const std::vector<double>& ps, const QuadratureConfig& cfg) {
    FamilyResult out;
    const ModelEnd end = power_family_end(m, alpha);
    const EndSignature sig = end_signature("power", end, ps, cfg);

    FamilySummary& fam = out.summary;
    fam.m = m;
    fam.alpha = alpha;
    fam.analytic_parabolic = alpha * (m - 1) <= 1.0;
    fam.numeric_parabolicity = sig.parabolicity.verdict;
    fam.volume = sig.volume;
    fam.theorem1 = check_theorem1(sig);
    fam.theoremB = check_theoremB(sig);

    const double pc = power_family_p_crit(m, alpha);
    const bool parabolic_boundary = std::abs(alpha * (m - 1) - 1.0) <= cfg.tail_margin;
    const char* analytic_par = fam.analytic_parabolic ? "Parabolic" : "NonParabolic";
    for (double p : ps) {
        PhaseCell cell;
        cell.m = m;
        cell.alpha = alpha;
        cell.p = p;
        const bool analytic_finite = p > pc;
        cell.analytic_verdict = std::string(analytic_finite ? "Converges" : "Diverges") + "|" + analytic_par;
        const ConvergenceVerdict& lp = sig.lp_map.at(p);
        cell.numeric_verdict = std::string(verdict_label(lp)) + "|" + to_string(sig.parabolicity.verdict);
        const double distance = alpha * std::abs(p - pc);  // distance of the tail exponent from -1
        if (parabolic_boundary) {
            cell.agreement = Agreement::Excluded;
            cell.notes = "boundary, excluded: alpha(m-1) within tail margin of 1";
        } else if (distance <= cfg.tail_margin) {
            cell.agreement = Agreement::Excluded;
            cell.notes = "boundary, excluded: p within tail margin of p_crit";
        } else if (inconclusive(lp) || sig.parabolicity.verdict == Parabolicity::Inconclusive) {
            cell.agreement = Agreement::Inconclusive;
            cell.notes = inconclusive(lp) ? std::get<Inconclusive>(lp).reason : "parabolicity inconclusive";
        } else {
            const bool lp_match = converges(lp) == analytic_finite;
            const bool par_match = (sig.parabolicity.verdict == Parabolicity::Parabolic) == fam.analytic_parabolic;
            cell.agreement = lp_match && par_match ? Agreement::Agree : Agreement::Disagree;
            if (!lp_match) cell.notes = "L^p verdict disagrees with p_crit = " + fmt_double(pc);
            if (!par_match) cell.notes += std::string(cell.notes.empty() ? "" : "; ") + "parabolicity disagrees";
        }
        if (fam.theorem1.failed() || fam.theoremB.failed()) {
            cell.notes += std::string(cell.notes.empty() ? "" : "; ") + "theorem flag violated";
        }
        out.cells.push_back(std::move(cell));
    }
    return out;
}

}  // namespace

PhaseTable sweep_power_family(const SweepSpec& spec, const QuadratureConfig& cfg, int jobs) {
    spec.validate();
    cfg.validate();
    struct Task {
        int m;
        double alpha;
    };
    std::vector<Task> tasks;
    for (int m : spec.ms) {
        for (double a : spec.alphas) tasks.push_back({m, a});
    }
    std::vector<FamilyResult> results(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = sweep_family(tasks[i].m, tasks[i].alpha, spec.ps, cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::clamp(jobs, 1, static_cast<int>(tasks.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    PhaseTable table;
    for (FamilyResult& r : results) {
        if (r.summary.theorem1.failed()) ++table.theorem_failures;
        if (r.summary.theoremB.failed()) ++table.theorem_failures;
        table.families.push_back(r.summary);
        for (PhaseCell& c : r.cells) {
            switch (c.agreement) {
                case Agreement::Agree: ++table.agreements; break;
                case Agreement::Disagree: ++table.disagreements; break;
                case Agreement::Excluded: ++table.excluded; break;
                case Agreement::Inconclusive: ++table.inconclusive; break;
            }
            table.cells.push_back(std::move(c));
        }
    }
    return table;
}

std::vector<ExampleCheck> verify_examples(int m, const QuadratureConfig& cfg) {
    std::vector<ExampleCheck> checks;
    auto add = [&](const std::string& ex, const std::string& what, bool ok, const std::string& detail) {
        checks.push_back({ex, what, ok, detail});
    };
    auto lp_probe = [&](const std::string& ex, const EndSignature& sig, double p, bool finite) {
        const auto it = sig.lp_map.find(p);
        const bool ok = it != sig.lp_map.end() && (finite ? converges(it->second) : diverges(it->second));
        add(ex, std::string("L^p norm at p = ") + fmt_double(p) + (finite ? " finite" : " infinite"), ok,
            it == sig.lp_map.end() ? "missing" : describe(it->second));
    };
    auto p_crit_check = [&](const std::string& ex, const EndSignature& sig, double expected) {
        const auto& pc = sig.thresholds.p_crit;
        add(ex, "p_crit = " + fmt_double(expected) + " +/- 0.1", pc && std::abs(*pc - expected) <= 0.1,
            pc ? "fitted " + fmt_double(*pc) : "no threshold");
    };
    const std::string e1 = "exp_warp";
    const std::string e2 = "power_parabolic";
    const std::string e3 = "gaussian_neck";

    {
        const ModelEnd end = exp_warp_end(m);
        const ConvergenceVerdict vol =
            classify_improper_log([&end](double t) { return end.log_volume_density(t); }, end.t0(), cfg);
        const double expected = 1.0 / (m - 1);
        const auto* c = std::get_if<Converges>(&vol);
        add(e1, "volume = vol(P)/(m-1) within 1e-10", c && std::abs(c->value - expected) <= 1e-10,
            describe(vol) + ", expected " + fmt_double(expected));
        const auto sweep = default_test_sweep(0.0, 20.0);
        const RayleighReport r = rayleigh_minimize(end, 0.0, 20.0, 2048, sweep, cfg);
        const double bound = r.bound.value_or(kInf);
        add(e1, "Rayleigh margin >= -1e-3", r.margin && *r.margin >= -1e-3,
            "min quotient " + fmt_double(r.min_quotient) + ", bound " + fmt_double(bound));
        add(e1, "minimal Rayleigh quotient within 0.05 of (m-1)^2/4", r.min_quotient - bound <= 0.05,
            "min quotient " + fmt_double(r.min_quotient));
    }
    {
        const ModelEnd end = power_parabolic_end(m);
        const double pc = 2.0 * (m - 1);
        const std::vector<double> ps{pc - 0.5, pc + 0.5};
        const EndSignature sig = end_signature(e2, end, ps, cfg);
        add(e2, "parabolic by the capacity criterion", sig.parabolicity.verdict == Parabolicity::Parabolic,
            describe(sig.parabolicity.capacity));
        const VolumeGrowth& vg = sig.parabolicity.volume_growth;
        add(e2, "parabolic by the volume growth criterion", vg.implies_parabolic, describe(vg.criterion));
        add(e2, "V(s) exponent = 2 +/- 0.1", vg.exponent_settled && std::abs(vg.exponent - 2.0) <= 0.1,
            "fitted " + fmt_double(vg.exponent));
        p_crit_check(e2, sig, pc);
        lp_probe(e2, sig, pc - 0.5, false);
        lp_probe(e2, sig, pc + 0.5, true);
    }
    {
        const ModelEnd end = gaussian_neck_end(m);
        const double pc = m - 1.0;
        const std::vector<double> ps{pc - 0.5, pc + 0.5};
        const EndSignature sig = end_signature(e3, end, ps, cfg);
        add(e3, "finite volume", converges(sig.volume), describe(sig.volume));
        const double h6 = end.mean_curvature_norm(6.0) * std::exp(-36.0);
        add(e3, "|H| e^{-t^2} at t = 6 within 1e-6 of (m-1)/m", std::abs(h6 - pc / m) <= 1e-6,
            "value " + fmt_double(h6));
        p_crit_check(e3, sig, pc);
        lp_probe(e3, sig, pc - 0.5, true);
        lp_probe(e3, sig, pc + 0.5, false);
        add(e3, "parabolic", sig.parabolicity.verdict == Parabolicity::Parabolic,
            describe(sig.parabolicity.capacity));
    }
    return checks;
}

}  // namespace endscope
