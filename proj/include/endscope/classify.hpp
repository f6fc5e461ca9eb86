#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endscope/capacity.hpp"
#include "endscope/model_end.hpp"
#include "endscope/quadrature.hpp"

namespace endscope {

/// Which side of p_crit carries finite L^p norms.
enum class FiniteSide { Above, Below, None };

const char* to_string(FiniteSide side);

struct Thresholds {
    std::optional<double> p_crit;  // empty when |H| is unavailable, zero, or asymptotically constant
    FiniteSide side = FiniteSide::None;
    TailModel volume_tail = UnknownTail{};
    TailModel capacity_tail = UnknownTail{};
};

/// p = inf probe: the largest |H| on a dense grid plus the growth of
/// log |H| in the tail.
struct SupNorm {
    std::optional<bool> finite;  // empty when the tail growth is undecided
    double value = 0.0;          // largest sampled |H|
    std::string reason;
};

struct EndSignature {
    std::string name;
    std::string descriptor;
    int m = 0;
    ConvergenceVerdict volume = Inconclusive{"not computed"};
    std::map<double, ConvergenceVerdict> lp_map;  // empty when |H| is unavailable
    std::optional<SupNorm> sup_norm;
    ParabolicityReport parabolicity;
    Thresholds thresholds;
    bool holder_consistent = true;  // finite-volume ends: {p : norm finite} is downward closed
};

/// Volume, L^p norms of |H| over p_grid, sup norm, parabolicity and tail
/// thresholds of one end.  Individual verdicts may be Inconclusive; the
/// signature is still produced.  Throws DomainError for p outside [1, 64].
EndSignature end_signature(const std::string& name, const ModelEnd& end,
                           std::span<const double> p_grid, const QuadratureConfig& cfg = {});

enum class TheoremFlag { Ok, Vacuous, Violated, Untestable };

const char* to_string(TheoremFlag flag);

struct FlagResult {
    TheoremFlag flag = TheoremFlag::Untestable;
    std::string text;

    bool failed() const { return flag == TheoremFlag::Violated; }
};

struct QuestionHit {
    bool hit = false;
    std::string text;
};

struct ConsistencyFlags {
    FlagResult theorem1;
    FlagResult theoremB;
    std::string theoremA_note;
    QuestionHit openQ1;
    QuestionHit openQ2;
};

/// Finite L^p norm for some p in [2, m] forces finite volume or non-parabolicity.
FlagResult check_theorem1(const EndSignature& sig);

/// Finite L^p norm for some p in [m, inf] forces infinite volume.
FlagResult check_theoremB(const EndSignature& sig);

/// Q1: finite volume and a finite norm for some p in [m-1, m).
/// Q2: parabolic and a finite norm for some p in (m, 2(m-1)].
/// A hit needs conclusive verdicts on every p in the range.
std::pair<QuestionHit, QuestionHit> hunt_open_questions(const EndSignature& sig);

/// All flags.  Question hits are rechecked with tolerances divided by 100
/// and kept only if they survive.  `sobolev_ratio` is the infimum of an
/// isoperimetric scan, when one was run.
ConsistencyFlags consistency_flags(const ModelEnd& end, const EndSignature& sig,
                                   std::span<const double> p_grid, const QuadratureConfig& cfg = {},
                                   std::optional<double> sobolev_ratio = std::nullopt);

enum class Agreement { Agree, Disagree, Excluded, Inconclusive };

const char* to_string(Agreement a);

struct PhaseCell {
    int m = 0;
    double alpha = 0.0;
    double p = 0.0;
    std::string analytic_verdict;  // "<Lp verdict>|<parabolicity>"
    std::string numeric_verdict;
    Agreement agreement = Agreement::Inconclusive;
    std::string notes;
};

struct FamilySummary {
    int m = 0;
    double alpha = 0.0;
    bool analytic_parabolic = false;
    Parabolicity numeric_parabolicity = Parabolicity::Inconclusive;
    ConvergenceVerdict volume = Inconclusive{"not computed"};
    FlagResult theorem1;
    FlagResult theoremB;
};

struct PhaseTable {
    std::vector<PhaseCell> cells;      // ordered by m, alpha, p
    std::vector<FamilySummary> families;
    int agreements = 0;
    int disagreements = 0;
    int excluded = 0;
    int inconclusive = 0;
    int theorem_failures = 0;
};

struct SweepSpec {
    std::vector<int> ms{3, 4, 5};
    std::vector<double> alphas{0.2, 0.3, 0.45, 0.6, 0.8, 1.0};
    std::vector<double> ps{2.0, 2.5, 3.45, 3.85, 4.85, 5.9, 9.65, 11.0};

    /// Throws ConfigError for empty grids, alpha outside (0, 1], m outside
    /// [3, 64] or p outside [1, 64].
    void validate() const;

    bool operator==(const SweepSpec&) const = default;
};

/// f = t^alpha on [1, inf).  Closed forms: parabolic iff alpha (m-1) <= 1,
/// ||H||_p finite iff p > (m-1) + 1/alpha, volume infinite.  Cells within
/// tail_margin of a threshold (measured on the integrand's tail exponent)
/// are marked Excluded.  `jobs` worker threads; the table does not depend
/// on it.
PhaseTable sweep_power_family(const SweepSpec& spec, const QuadratureConfig& cfg = {}, int jobs = 1);

/// Closed-form threshold (m-1) + 1/alpha.
double power_family_p_crit(int m, double alpha);

struct ExampleCheck {
    std::string example;
    std::string assertion;
    bool passed = false;
    std::string detail;
};

/// Pinned expectations for the three worked examples at dimension m.
std::vector<ExampleCheck> verify_examples(int m, const QuadratureConfig& cfg = {});

}  // namespace endscope
