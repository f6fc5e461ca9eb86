#include <doctest.h>

#include <cmath>
#include <numbers>

#include "endscope/builtin_ends.hpp"
#include "endscope/capacity.hpp"
#include "endscope/errors.hpp"

using namespace endscope;

namespace {

double euclidean_harmonic(int m, double t, double r) {
    if (std::isinf(r)) return std::pow(t, 2.0 - m);
    return (std::pow(t, 2.0 - m) - std::pow(r, 2.0 - m)) / (1 - std::pow(r, 2.0 - m));
}

double fd_discrepancy(const ModelEnd& end, double t_in, double t_out, int n) {
    const HarmonicProfile f = dirichlet_radial(end, t_in, t_out);
    const DiscreteProfile d = fd_oracle(end, t_in, t_out, n);
    const std::vector<double> exact = f.evaluate(d.nodes);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) worst = std::max(worst, std::abs(exact[i] - d.values[i]));
    return worst;
}

}  // namespace

TEST_CASE("euclidean harmonic profiles are exact") {
    for (int m : {3, 4, 5}) {
        const ModelEnd end = euclidean_end(m);
        for (double r : {2.0, 10.0, 1e3}) {
            const HarmonicProfile f = dirichlet_radial(end, 1.0, r);
            for (double t : {1.0, 1.01, 1.5, 0.5 * (1 + r), r * 0.999}) {
                CHECK(f(t) == doctest::Approx(euclidean_harmonic(m, t, r)).epsilon(1e-12));
            }
            CHECK(f(r) == 0.0);
            CHECK(f(2 * r) == 0.0);
            // f' = -a / g^{m-1} / Q
            const double q = (1 - std::pow(r, 2.0 - m)) / (m - 2.0);
            CHECK(f.derivative(1.5) == doctest::Approx(-std::pow(1.5, 1.0 - m) / q).epsilon(1e-12));
            CHECK(std::exp(f.log_total()) == doctest::Approx(q).epsilon(1e-12));
        }
        const HarmonicProfile lim(end, 1.0, std::numeric_limits<double>::infinity(), {});
        CHECK(lim(3.0) == doctest::Approx(euclidean_harmonic(m, 3.0, INFINITY)).epsilon(1e-9));
    }
}

TEST_CASE("cylinder harmonic profile is linear") {
    const HarmonicProfile f = dirichlet_radial(cylinder_end(3), 0.0, 8.0);
    for (double t : {0.0, 1.0, 3.3, 7.9}) CHECK(f(t) == doctest::Approx(1 - t / 8).epsilon(1e-13));
    const std::vector<double> ts{0.5, 2.0, 6.0};
    const auto vals = f.evaluate(ts);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(vals[i] == doctest::Approx(1 - ts[i] / 8));
}

TEST_CASE("gaussian neck profile survives an overflowing capacity density") {
    // log(a / g^{m-1}) ~ (m-1) t^2 reaches ~ 800 at t = 20 for m = 3.
    const HarmonicProfile f = dirichlet_radial(gaussian_neck_end(3), 0.0, 20.0);
    CHECK(f(0.0) == doctest::Approx(1.0));
    CHECK(f(19.0) > 0.99);
    CHECK(f(19.99) < 1.0);
    CHECK(f(19.99) > 0.0);
    CHECK(f.harmonicity_residual() < 1e-5);
}

TEST_CASE("harmonic profiles are flux-constant") {
    for (const NamedEnd& e : builtin_ends(3)) {
        const HarmonicProfile f = dirichlet_radial(e.end, e.end.t0(), e.end.t0() + 3.0);
        CAPTURE(e.name);
        CHECK(f.harmonicity_residual() < 1e-5);
    }
}

TEST_CASE("finite-difference oracle converges at second order") {
    for (const NamedEnd& e : builtin_ends(4)) {
        CAPTURE(e.name);
        const double a = e.end.t0();
        const double e1 = fd_discrepancy(e.end, a, a + 2, 128);
        const double e2 = fd_discrepancy(e.end, a, a + 2, 512);
        if (e1 < 1e-13) continue;  // the cylinder is exact
        CHECK(std::log(e1 / e2) / std::log(4.0) > 1.9);
    }
    CHECK(fd_discrepancy(euclidean_end(3), 1.0, 3.0, 4096) < 1e-6);
}

TEST_CASE("dirichlet_radial domain errors") {
    const ModelEnd end = euclidean_end(3);
    CHECK_THROWS_AS(dirichlet_radial(end, 0.5, 2.0), DomainError);
    CHECK_THROWS_AS(dirichlet_radial(end, 2.0, 2.0), DomainError);
    const HarmonicProfile f = dirichlet_radial(end, 1.0, 2.0);
    CHECK_THROWS_AS(f(0.9), DomainError);
    CHECK_THROWS_AS(fd_oracle(end, 1.0, 2.0, 4), DomainError);
}

TEST_CASE("parabolicity of the built-in ends") {
    for (int m : {3, 4}) {
        for (const NamedEnd& e : builtin_ends(m)) {
            CAPTURE(e.name);
            CAPTURE(m);
            const ParabolicityReport p = parabolicity(e.end);
            const bool expect_nonparabolic = e.name == "euclidean";
            CHECK(p.verdict == (expect_nonparabolic ? Parabolicity::NonParabolic : Parabolicity::Parabolic));
            CHECK(p.harmonic_limit.has_value() == expect_nonparabolic);
            CHECK(p.agreement);
        }
    }
    const ParabolicityReport e = parabolicity(euclidean_end(3));
    REQUIRE(converges(e.capacity));
    CHECK(std::get<Converges>(e.capacity).value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::string(to_string(Parabolicity::NonParabolic)) == "NonParabolic");
}

TEST_CASE("volume growth") {
    SUBCASE("euclidean grows cubically and the test stays silent") {
        const VolumeGrowth v = volume_growth_test(euclidean_end(3));
        CHECK(v.exponent == doctest::Approx(3.0).epsilon(0.03));
        CHECK(converges(v.criterion));
        CHECK_FALSE(v.implies_parabolic);
    }
    SUBCASE("power-parabolic end grows quadratically") {
        for (int m : {3, 4}) {
            const VolumeGrowth v = volume_growth_test(power_parabolic_end(m));
            CHECK(v.exponent == doctest::Approx(2.0).epsilon(0.05));
            CHECK(v.implies_parabolic);
        }
    }
    SUBCASE("finite volume forces the criterion to diverge") {
        const VolumeGrowth v = volume_growth_test(gaussian_neck_end(3));
        CHECK(v.implies_parabolic);
        REQUIRE(v.V.size() >= 2);
        for (std::size_t i = 1; i < v.V.size(); ++i) CHECK(v.V[i] >= v.V[i - 1]);
    }
}

TEST_CASE("volume test never contradicts the capacity test on the power family") {
    for (int m : {3, 4, 5}) {
        for (double alpha : {0.1, 0.25, 0.4, 0.7, 1.0, 1.5}) {
            const ParabolicityReport p = parabolicity(power_family_end(m, alpha));
            CAPTURE(m);
            CAPTURE(alpha);
            CHECK(p.agreement);
            if (p.volume_growth.implies_parabolic) CHECK(p.verdict != Parabolicity::NonParabolic);
        }
    }
}

TEST_CASE("exhaustion is monotone and bounded") {
    for (const NamedEnd& e : builtin_ends(3)) {
        CAPTURE(e.name);
        const double t0 = e.end.t0();
        const std::vector<double> radii{t0 + 1, t0 + 2, t0 + 4, t0 + 8, t0 + 16};
        const std::vector<double> probes{t0 + 0.1, t0 + 0.5, t0 + 0.9};
        const ExhaustionReport r = exhaustion_limit(e.end, radii, probes);
        for (std::size_t i = 0; i < radii.size(); ++i) {
            for (std::size_t j = 0; j < probes.size(); ++j) {
                CHECK(r.values[i][j] >= 0.0);
                CHECK(r.values[i][j] <= 1.0);
                if (i > 0) CHECK(r.values[i][j] >= r.values[i - 1][j] - 1e-10);
            }
        }
        CHECK(r.sup_increase >= 0.0);
    }
}

TEST_CASE("exhaustion limits") {
    const std::vector<double> radii{2, 3, 5, 9, 17, 33};
    const std::vector<double> probes{1.25, 1.5, 2.0};
    const ExhaustionReport e = exhaustion_limit(euclidean_end(3), radii, probes);
    CHECK(e.extrapolated == Parabolicity::NonParabolic);
    CHECK_FALSE(e.limit_is_one);
    for (std::size_t j = 0; j < probes.size(); ++j) {
        CHECK(e.limit[j] == doctest::Approx(1.0 / probes[j]).epsilon(1e-6));
    }
    const ExhaustionReport c = exhaustion_limit(cylinder_end(3), radii, probes);
    CHECK(c.limit_is_one);
    CHECK(c.extrapolated == Parabolicity::Parabolic);
}

TEST_CASE("energy trace on the cylinder has a closed form") {
    for (int m : {3, 4, 5}) {
        const double q = 2.0 * m / (m - 2.0);
        const double omega = unit_sphere_volume(m - 1);
        const double hh = (m - 1.0) / m;
        const std::vector<double> radii{0.0, 1.0, 4.0, 64.0};
        const EnergyTrace tr = energy_trace(cylinder_end(m), 0.0, radii);
        REQUIRE(tr.rows.size() == radii.size());
        CHECK(tr.rows[0].h == 0.0);
        for (std::size_t i = 1; i < radii.size(); ++i) {
            const double r = radii[i];
            CHECK(tr.rows[i].h == doctest::Approx(omega * r / (q + 1)).epsilon(1e-9));
            REQUIRE(tr.rows[i].curvature_term.has_value());
            CHECK(*tr.rows[i].curvature_term == doctest::Approx(omega * hh * hh * r / 3).epsilon(1e-9));
            CHECK(tr.rows[i].sobolev_lhs == doctest::Approx(std::pow(tr.rows[i].h, (m - 2.0) / m)));
        }
    }
}

TEST_CASE("energy trace is nondecreasing on the built-in ends") {
    for (const NamedEnd& e : builtin_ends(4)) {
        CAPTURE(e.name);
        const double t0 = e.end.t0();
        const std::vector<double> radii{t0 + 0.5, t0 + 1, t0 + 2, t0 + 4, t0 + 8};
        const EnergyTrace tr = energy_trace(e.end, t0, radii);
        for (std::size_t i = 1; i < tr.rows.size(); ++i) CHECK(tr.rows[i].h >= tr.rows[i - 1].h);
    }
    CHECK_THROWS_AS(energy_trace(cylinder_end(2), 0.0, std::vector<double>{1.0}), DomainError);
    CHECK_THROWS_AS(energy_trace(cylinder_end(3), 2.0, std::vector<double>{1.0}), DomainError);
}
