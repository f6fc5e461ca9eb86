#pragma once

#include <string>
#include <variant>

namespace endscope {

// Asymptotic model of an integrand's tail.
struct PowerTail {
    double exponent = 0.0;  // f(t) ~ c t^exponent
};

struct ExpTail {
    double rate = 0.0;  // local d(log f)/dt at the last fitted window
};

struct UnknownTail {};

using TailModel = std::variant<PowerTail, ExpTail, UnknownTail>;

struct Converges {
    double value = 0.0;
    double error_bound = 0.0;
    TailModel tail = UnknownTail{};
    // False when the truncation cap was reached before the error bound fell
    // below the requested tolerance.  The convergence decision itself does
    // not depend on this.
    bool within_tolerance = true;
    double truncation = 0.0;  // point where quadrature handed over to the tail model
};

struct Diverges {
    TailModel rate = UnknownTail{};
};

struct Inconclusive {
    std::string reason;
};

using ConvergenceVerdict = std::variant<Converges, Diverges, Inconclusive>;

inline bool converges(const ConvergenceVerdict& v) { return std::holds_alternative<Converges>(v); }
inline bool diverges(const ConvergenceVerdict& v) { return std::holds_alternative<Diverges>(v); }
inline bool inconclusive(const ConvergenceVerdict& v) {
    return std::holds_alternative<Inconclusive>(v);
}

inline const char* verdict_label(const ConvergenceVerdict& v) {
    if (converges(v)) return "Converges";
    if (diverges(v)) return "Diverges";
    return "Inconclusive";
}

std::string describe(const TailModel& tail);
std::string describe(const ConvergenceVerdict& verdict);

}  // namespace endscope
