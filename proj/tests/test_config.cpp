#include <doctest.h>

#include <random>

#include "endscope/config.hpp"
#include "endscope/errors.hpp"

using namespace endscope;

namespace {

// Line (1-based) reported for a bad config, or 0 if it parsed.
int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line + 1;
    }
    return 0;
}

ProfileSpec random_profile(std::mt19937& rng, bool for_warp) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProfileSpec p;
    const int pick = std::uniform_int_distribution<int>(0, for_warp ? 3 : 4)(rng);
    if (pick == 0) {
        p.family = "power";
        p.exponent = 0.1 + 1.9 * u(rng);
        p.offset = u(rng) < 0.5 ? 0.0 : u(rng);
        if (u(rng) < 0.3) p.t_min = 1.0 + u(rng);
    } else if (pick == 1) {
        p.family = "gaussian_neck";
        p.scale = 0.5 + u(rng);
    } else if (pick == 2) {
        p.family = "exp_warp";
        p.rate = -1.0 + 2.0 * u(rng);
    } else if (pick == 3) {
        p.family = "constant";
        p.c = 0.2 + 3.0 * u(rng);
    } else {
        p.family = "sampled";
        double t = 2.0;
        for (int i = 0; i < 6; ++i) {
            p.knots.push_back(t);
            p.values.push_back(0.5 + u(rng));
            t += 0.1 + u(rng);
        }
        if (u(rng) < 0.5) {
            p.tail = u(rng) < 0.5 ? "power" : "exp";
            p.tail_parameter = -u(rng);
        }
    }
    return p;
}

// t0 inside every profile's domain.
double start_for(const ProfileSpec& p) {
    if (p.family == "power") return p.t_min.value_or(1.0 - p.offset) + 0.5;
    if (p.family == "sampled") return p.knots.front();
    return 0.25;
}

RunConfig random_config(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> small(1, 4);
    RunConfig c;
    const int n_ends = small(rng);
    const std::vector<std::string> builtins{"euclidean", "cylinder", "exp_warp", "power_parabolic",
                                            "gaussian_neck"};
    for (int i = 0; i < n_ends; ++i) {
        EndSpec e;
        e.name = "end " + std::to_string(i) + (u(rng) < 0.3 ? ": quoted #x" : "");
        e.m = std::uniform_int_distribution<int>(3, 7)(rng);
        const double kind = u(rng);
        if (kind < 0.3) {
            e.builtin = builtins[std::uniform_int_distribution<std::size_t>(0, builtins.size() - 1)(rng)];
        } else if (kind < 0.7) {
            e.kind = "revolution";
            e.profile = random_profile(rng, false);
            e.t0 = start_for(e.profile);
        } else {
            e.kind = "warped";
            e.radial = random_profile(rng, true);
            e.warp = random_profile(rng, true);
            e.t0 = std::max(start_for(e.radial), start_for(e.warp));
            if (u(rng) < 0.5) e.omega = 0.5 + u(rng);
            e.extrinsic = u(rng) < 0.5 ? "intrinsic" : "minimal";
        }
        if (u(rng) < 0.3) e.rayleigh_support = std::pair{e.t0, e.t0 + 1 + 10 * u(rng)};
        c.ends.push_back(e);
    }
    c.p_grid.clear();
    double p = 1.0 + u(rng);
    for (int i = 0; i < small(rng) + 1; ++i) {
        c.p_grid.push_back(p);
        p += 0.1 + 2 * u(rng);
    }
    if (u(rng) < 0.5) c.radii = {2.0 + u(rng), 5.0 + u(rng), 11.0 / 3.0 + 10};
    if (u(rng) < 0.5) c.probes = {0.1 * u(rng), 0.5, 1.0 / 3.0 + 1};
    c.quadrature.rel_tol = std::pow(10.0, -6 - 6 * u(rng));
    c.quadrature.abs_tol = std::pow(10.0, -8 - 6 * u(rng));
    c.quadrature.max_depth = std::uniform_int_distribution<int>(10, 60)(rng);
    c.quadrature.tail_windows = std::uniform_int_distribution<int>(3, 10)(rng);
    c.quadrature.tail_margin = 0.01 + 0.4 * u(rng);
    if (u(rng) < 0.5) {
        SweepSpec s;
        s.ms = {3, 3 + small(rng)};
        s.alphas = {0.1 + 0.4 * u(rng), 0.6 + 0.4 * u(rng)};
        s.ps = {2.0, 2.0 + 10 * u(rng)};
        c.sweep = s;
    }
    c.output.dir = u(rng) < 0.5 ? "out dir/x" : ".";
    if (u(rng) < 0.5) c.output.report = "r" + std::to_string(small(rng)) + ".json";
    c.analyses.clear();
    for (const auto& a : kAllAnalyses) {
        if (u(rng) < 0.5) c.analyses.push_back(a);
    }
    c.sobolev_constant = 0.1 + 5 * u(rng);
    c.rayleigh_n = std::uniform_int_distribution<int>(32, 4096)(rng);
    c.inconclusive_as_warning = u(rng) < 0.5;
    return c;
}

}  // namespace

TEST_CASE("a full config parses") {
    const RunConfig c = parse_config(R"(version: 1
ends:
  - {name: e, builtin: euclidean, m: 4}
  - name: neck
    kind: revolution
    m: 3
    t0: 0
    profile: {family: gaussian_neck, scale: 2}
    rayleigh_support: [0, 5]
  - name: w
    kind: warped
    m: 3
    t0: 0
    radial: {family: constant, c: 1}
    warp: {family: exp_warp, rate: -1}
    omega: 1
p_grid: [2, 3]
radii: [2, 4]
quadrature: {rel_tol: 1e-9, tail_margin: 0.1}
sweep: {family: power, m: [3], alpha: [0.5], p: [4]}
output: {dir: out, report: r.json}
analyses: [rayleigh]
sobolev_constant: 2
rayleigh_n: 512
inconclusive_as_warning: true
)");
    REQUIRE(c.ends.size() == 3);
    CHECK(c.ends[0].builtin == "euclidean");
    CHECK(c.ends[0].m == 4);
    CHECK(c.ends[1].profile.family == "gaussian_neck");
    CHECK(c.ends[1].profile.scale == 2.0);
    CHECK(c.ends[1].rayleigh_support == std::pair{0.0, 5.0});
    CHECK(c.ends[2].kind == "warped");
    CHECK(c.ends[2].omega == 1.0);
    CHECK(c.p_grid == std::vector<double>{2, 3});
    CHECK(c.quadrature.rel_tol == 1e-9);
    CHECK(c.quadrature.abs_tol == QuadratureConfig{}.abs_tol);
    REQUIRE(c.sweep.has_value());
    CHECK(c.sweep->alphas == std::vector<double>{0.5});
    CHECK(c.output.dir == "out");
    CHECK(c.output.phase_csv == "phase.csv");
    CHECK(c.analyses == std::vector<std::string>{"rayleigh"});
    CHECK(c.rayleigh_n == 512);
    CHECK(c.inconclusive_as_warning);
    CHECK(c.ends[1].build().dimension() == 3);
}

TEST_CASE("an empty document gives the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.ends.empty());
    CHECK(c == RunConfig{});
}

TEST_CASE("errors carry the offending line") {
    CHECK(error_line("version: 2\n") == 1);
    CHECK(error_line("ends:\n  - {name: a, builtin: nope}\n") == 2);
    CHECK(error_line("ends:\n  - {name: a, builtin: cylinder}\n  - {name: a, builtin: euclidean}\n") == 3);
    CHECK(error_line("p_grid: []\n") == 1);
    CHECK(error_line("p_grid: [2, 100]\n") == 1);
    CHECK(error_line("quadrature:\n  rel_tol: -1\n") == 2);
    CHECK(error_line("quadrature:\n  bogus: 1\n") == 2);
    CHECK(error_line("radii: [3, 2]\n") == 1);
    CHECK(error_line("sweep:\n  alpha: [0]\n") == 2);
    CHECK(error_line("sweep:\n  family: gaussian\n") == 2);
    CHECK(error_line("analyses: [rayleigh, nope]\n") == 1);
    CHECK(error_line("ends: {a: 1}\n") == 1);
    CHECK(error_line("rayleigh_n: 8\n") == 1);
    CHECK(error_line("inconclusive_as_warning: maybe\n") == 1);
    CHECK(error_line("ends:\n  - name: a\n    kind: revolution\n    t0: 0.5\n    profile: {family: power}\n") == 2);
    CHECK(error_line("ends:\n  - name: a\n    profile: {family: power, exponent: x}\n") == 3);
    CHECK(error_line("ends:\n  - name: a\n    kind: warped\n    radial: {family: constant}\n") == 2);
    CHECK(error_line("ends: [\n") > 0);
    CHECK(error_line("top: 1\n") == 1);
}

TEST_CASE("unreadable files are config errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("emit then parse is the identity on random configs") {
    const unsigned seed = 424242u;
    MESSAGE("round-trip seed " << seed);
    std::mt19937 rng(seed);
    for (int i = 0; i < 50; ++i) {
        const RunConfig c = random_config(rng);
        const std::string text = emit_config(c);
        CAPTURE(text);
        RunConfig back;
        REQUIRE_NOTHROW(back = parse_config(text));
        CHECK(back == c);
        CHECK(emit_config(back) == text);
        CHECK(config_hash(back) == config_hash(c));
    }
}

TEST_CASE("config hash") {
    RunConfig c;
    const std::string h = config_hash(c);
    CHECK(h.size() == 64);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    c.p_grid.push_back(7.0);
    CHECK(config_hash(c) != h);
}
