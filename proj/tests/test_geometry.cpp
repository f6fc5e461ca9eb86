#include <doctest.h>

#include <cmath>
#include <numbers>

#include "endscope/builtin_ends.hpp"
#include "endscope/errors.hpp"
#include "endscope/model_end.hpp"
#include "endscope/profile.hpp"

using namespace endscope;

namespace {

// Centred differences of the value, as an oracle for the analytic jet.
void check_jet_against_differences(const ProfileFn& f, double t) {
    const double h = 1e-4 * std::max(1.0, std::abs(t));
    const ProfileJet j = f.jet(t);
    const double d1 = (f.value(t + h) - f.value(t - h)) / (2 * h);
    const double d2 = (f.value(t + h) - 2 * f.value(t) + f.value(t - h)) / (h * h);
    CHECK(j.d1 == doctest::Approx(d1).epsilon(1e-6));
    CHECK(j.d2 == doctest::Approx(d2).epsilon(1e-4));
    CHECK(j.log_value == doctest::Approx(std::log(j.value)).epsilon(1e-12));
    CHECK(j.log_derivative == doctest::Approx(j.d1 / j.value).epsilon(1e-12));
    CHECK(j.d2_over_value == doctest::Approx(j.d2 / j.value).epsilon(1e-12));
}

}  // namespace

TEST_CASE("unit sphere volumes") {
    CHECK(unit_sphere_volume(1) == doctest::Approx(2 * std::numbers::pi));
    CHECK(unit_sphere_volume(2) == doctest::Approx(4 * std::numbers::pi));
    CHECK(unit_sphere_volume(3) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
    CHECK(unit_sphere_volume(4) == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 3));
}

TEST_CASE("profile jets match finite differences") {
    check_jet_against_differences(ProfileFn::power(0.7, 0.5), 2.3);
    check_jet_against_differences(ProfileFn::power(2.0), 1.5);
    check_jet_against_differences(ProfileFn::gaussian_neck(1.3), 0.8);
    check_jet_against_differences(ProfileFn::exp_warp(-0.6), 1.7);
    check_jet_against_differences(ProfileFn::constant(2.5), 3.0);
}

TEST_CASE("gaussian log jet stays exact where the value underflows") {
    const ProfileFn f = ProfileFn::gaussian_neck();
    const ProfileJet j = f.jet(40.0);
    CHECK(j.value == 0.0);
    CHECK(j.log_value == doctest::Approx(-1600.0));
    CHECK(j.log_derivative == doctest::Approx(-80.0));
    // f''/f = 4t^2 - 2
    CHECK(j.d2_over_value == doctest::Approx(4 * 1600.0 - 2));
}

TEST_CASE("sampled profile reproduces linear data and refuses extrapolation") {
    const ProfileFn f = ProfileFn::sampled({0, 1, 2, 3}, {1, 2, 3, 4});
    CHECK(f.value(1.5) == doctest::Approx(2.5));
    CHECK(f.derivative(2.2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(f.value(3.5), DomainError);
    const ProfileFn g = ProfileFn::sampled({0, 1, 2, 3}, {1, 2, 3, 4}, PowerTail{1.0});
    CHECK(g.value(6.0) == doctest::Approx(8.0));
}

TEST_CASE("profile domain errors") {
    const ProfileFn f = ProfileFn::power(0.5);
    CHECK(f.t_min() == doctest::Approx(1.0));
    CHECK_THROWS_AS(f.value(0.5), DomainError);
    CHECK_THROWS_AS(make_revolution_end(f, 3, 0.5), DomainError);
    CHECK_THROWS_AS(make_revolution_end(ProfileFn::constant(1.0), 1, 0.0), DomainError);
}

TEST_CASE("cylinder mean curvature is (m-1)/m") {
    for (int m = 2; m <= 6; ++m) {
        const ModelEnd end = cylinder_end(m);
        CHECK(mean_curvature(end, 3.0) == doctest::Approx((m - 1.0) / m));
        CHECK(end.mean_curvature_norm(17.0) == doctest::Approx((m - 1.0) / m));
    }
}

TEST_CASE("cone mean curvature matches the direct formula") {
    // f = c t: m H = (m-1) / (c t sqrt(1 + c^2)).
    for (int m : {3, 4, 5}) {
        const double c = 0.4;
        const ModelEnd end = make_revolution_end(ProfileFn::power(1.0), m, 1.0);
        const ModelEnd cone = make_revolution_end(ProfileFn::sampled({1, 2, 3, 4}, {c, 2 * c, 3 * c, 4 * c}), m, 1.0);
        CHECK(end.mean_curvature_norm(2.0) == doctest::Approx((m - 1.0) / (m * 2.0 * std::sqrt(2.0))));
        CHECK(cone.mean_curvature_norm(2.5) ==
              doctest::Approx((m - 1.0) / (m * c * 2.5 * std::sqrt(1 + c * c))).epsilon(1e-9));
    }
}

TEST_CASE("gaussian neck |H| against the direct formula") {
    for (int m : {3, 4}) {
        const ModelEnd end = gaussian_neck_end(m);
        for (double t : {0.3, 1.0, 2.0}) {
            const double f = std::exp(-t * t);
            const double f1 = -2 * t * f;
            const double f2 = (4 * t * t - 2) * f;
            const double w = 1 + f1 * f1;
            const double h = std::abs((m - 1) / (f * std::sqrt(w)) - f2 / std::pow(w, 1.5)) / m;
            CHECK(end.mean_curvature_norm(t) == doctest::Approx(h).epsilon(1e-12));
        }
        // |H| e^{-t^2} -> (m-1)/m
        CHECK(std::exp(end.log_mean_curvature(6.0) - 36.0) == doctest::Approx((m - 1.0) / m).epsilon(1e-6));
    }
}

TEST_CASE("euclidean end is minimal and warped ends without immersion refuse |H|") {
    const ModelEnd e = euclidean_end(3);
    CHECK(e.has_mean_curvature());
    CHECK(e.log_mean_curvature(4.0) == -std::numeric_limits<double>::infinity());
    const ModelEnd x = exp_warp_end(3);
    CHECK_FALSE(x.has_mean_curvature());
    CHECK_THROWS_AS(x.log_mean_curvature(1.0), KindError);
    CHECK_THROWS_AS(mean_curvature(x, 1.0), KindError);
}

TEST_CASE("log densities of a revolution end") {
    const int m = 4;
    const ModelEnd end = power_family_end(m, 0.5);
    const double t = 3.0;
    const double f = std::sqrt(t);
    const double a = std::sqrt(1 + 0.25 / t);
    const double omega = unit_sphere_volume(m - 1);
    CHECK(end.log_area(t) == doctest::Approx(std::log(omega * std::pow(f, m - 1))));
    CHECK(end.log_volume_density(t) == doctest::Approx(std::log(omega * a * std::pow(f, m - 1))));
    CHECK(end.log_capacity_density(t) == doctest::Approx(std::log(a / std::pow(f, m - 1))));
    CHECK(end.radial_factor(t) == doctest::Approx(a));
}

TEST_CASE("arc length") {
    const ModelEnd cone = make_revolution_end(ProfileFn::power(1.0), 3, 1.0);
    CHECK(arc_length(cone, 5.0).value == doctest::Approx(4 * std::sqrt(2.0)).epsilon(1e-12));
    const ModelEnd cyl = cylinder_end(3);
    const GeometricSample s = sample_geometry(cyl, 2.0);
    CHECK(s.arc_length == doctest::Approx(2.0));
    CHECK(s.area == doctest::Approx(4 * std::numbers::pi));
    CHECK(s.mean_curvature_norm == doctest::Approx(2.0 / 3.0));
    CHECK(std::isnan(sample_geometry(exp_warp_end(3), 1.0).mean_curvature_norm));
}

TEST_CASE("describe names the end") {
    CHECK_FALSE(gaussian_neck_end(3).describe().empty());
    CHECK(builtin_ends(3).size() == 5);
}
