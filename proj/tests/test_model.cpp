#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fermi/errors.hpp"
#include "fermi/model.hpp"

using namespace fermi;

namespace {

constexpr double kPi = std::numbers::pi;

LabParams cesium(double epsilon) {
    LabParams lab;
    lab.mass = 2.2e-25;
    lab.omega = 7.55e3;
    lab.epsilon = epsilon;
    lab.decay_k = 1.25e6;
    lab.g = 9.8;
    lab.hbar = 1.0546e-34;
    lab.omega_eff = 1e7;
    return lab;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("scale_to_dimensionless evaluates the defining formulas") {
    const LabParams lab = cesium(0.675);
    const DimensionlessParams p = scale_to_dimensionless(lab);
    const double w2 = lab.omega * lab.omega;
    CHECK(p.lambda == doctest::Approx(w2 * lab.epsilon / (2 * lab.decay_k * lab.g)).epsilon(1e-15));
    CHECK(p.kappa == doctest::Approx(2 * lab.decay_k * lab.g / w2).epsilon(1e-15));
    CHECK(p.v0 == doctest::Approx(lab.hbar * w2 * lab.omega_eff / (4 * lab.mass * lab.g * lab.g)).epsilon(1e-15));
    CHECK(p.kbar == doctest::Approx(lab.hbar * w2 * lab.omega / (lab.mass * lab.g * lab.g)).epsilon(1e-15));
}

TEST_CASE("cesium modulation depths map onto the first overlap window") {
    CHECK(scale_to_dimensionless(cesium(0.675)).lambda == doctest::Approx(1.571).epsilon(0.01));
    CHECK(scale_to_dimensionless(cesium(0.80)).lambda == doctest::Approx(1.861).epsilon(0.01));
}

TEST_CASE("cesium kbar follows the formula, not the quoted value of 14") {
    const double kbar = scale_to_dimensionless(cesium(0.675)).kbar;
    CHECK(kbar == doctest::Approx(2.15).epsilon(0.01));
    CHECK(std::abs(kbar - 14.0) > 10.0);
}

TEST_CASE("scaling homogeneity and the lambda-kappa identity") {
    const LabParams base = cesium(0.7);
    const DimensionlessParams p = scale_to_dimensionless(base);
    LabParams twice_eps = base;
    twice_eps.epsilon *= 2;
    CHECK(scale_to_dimensionless(twice_eps).lambda == doctest::Approx(2 * p.lambda).epsilon(1e-15));
    LabParams twice_k = base;
    twice_k.decay_k *= 2;
    const DimensionlessParams q = scale_to_dimensionless(twice_k);
    CHECK(q.lambda == doctest::Approx(p.lambda / 2).epsilon(1e-15));
    CHECK(q.kappa == doctest::Approx(2 * p.kappa).epsilon(1e-15));
    CHECK(p.lambda * p.kappa == doctest::Approx(base.epsilon).epsilon(1e-15));
}

TEST_CASE("mirror geometry round-trips through the dimensionless parameters") {
    const LabParams lab = cesium(0.73);
    const DimensionlessParams p = scale_to_dimensionless(lab);
    const MirrorGeometry m = mirror_from_dimensionless(p.lambda, p.kappa, lab.omega, lab.g);
    CHECK(m.epsilon == doctest::Approx(lab.epsilon).epsilon(1e-14));
    CHECK(m.decay_k == doctest::Approx(lab.decay_k).epsilon(1e-14));
}

TEST_CASE("non-positive lab fields are rejected") {
    for (int field = 0; field < 7; ++field) {
        LabParams lab = cesium(0.7);
        double* fields[] = {&lab.mass, &lab.omega, &lab.epsilon, &lab.decay_k, &lab.g, &lab.hbar, &lab.omega_eff};
        *fields[field] = 0.0;
        CHECK_THROWS_AS(scale_to_dimensionless(lab), InvalidParameter);
    }
}

TEST_CASE("localization window") {
    const Window w12 = localization_window(12);
    CHECK(w12.kind == WindowKind::Localization);
    CHECK(w12.lo == 0.24);
    CHECK(w12.hi == doctest::Approx(1.7321).epsilon(1e-4));
    CHECK(localization_window(1).hi == doctest::Approx(0.5));
    const Window tiny = localization_window(0.2);
    CHECK(tiny.empty());
    CHECK(tiny.lo == 0.24);
    CHECK(tiny.hi == 0.24);
    CHECK_THROWS_AS(localization_window(0.0), InvalidParameter);
    CHECK_THROWS_AS(localization_window(-1.0), InvalidParameter);
}

TEST_CASE("acceleration window") {
    const Window a = acceleration_window(0.5);
    CHECK(a.kind == WindowKind::Acceleration);
    REQUIRE(a.s.has_value());
    CHECK(a.s->value() == 0.5);
    CHECK(a.lo == doctest::Approx(1.5708).epsilon(1e-4));
    CHECK(a.hi == doctest::Approx(1.8621).epsilon(1e-4));
    CHECK(acceleration_window(1).lo == doctest::Approx(3.1416).epsilon(1e-4));
    CHECK(acceleration_window(1).hi == doctest::Approx(3.2969).epsilon(1e-4));
    CHECK(acceleration_window(2).lo == doctest::Approx(6.2832).epsilon(1e-4));
    CHECK(acceleration_window(2).hi == doctest::Approx(6.3623).epsilon(1e-4));
    for (double bad : {0.0, -0.5, 0.3, 1.25}) CHECK_THROWS_AS(acceleration_window(bad), InvalidParameter);
}

TEST_CASE("acceleration window width shrinks with the branch") {
    double previous = 2.0;
    for (int h = 1; h <= 40; ++h) {
        const Window w = acceleration_window(Branch::from_half_units(h));
        const double s = 0.5 * h;
        CHECK(w.lo == s * kPi);
        CHECK(w.hi == doctest::Approx(std::sqrt(1 + s * kPi * s * kPi)).epsilon(1e-15));
        CHECK(w.width() < previous);
        previous = w.width();
    }
    CHECK(previous < 0.01);
}

TEST_CASE("overlap window") {
    const Window o12 = overlap_window(12, 0.5);
    CHECK(o12.kind == WindowKind::Overlap);
    CHECK(o12.lo == doctest::Approx(1.5708).epsilon(1e-4));
    CHECK(o12.hi == doctest::Approx(1.7321).epsilon(1e-4));
    const Window o14 = overlap_window(14, 0.5);
    CHECK(o14.lo == doctest::Approx(1.5708).epsilon(1e-4));
    CHECK(o14.hi == doctest::Approx(1.8621).epsilon(1e-4));
    CHECK(overlap_window(1, 0.5).empty());
    CHECK_THROWS_AS(overlap_window(12, 0.7), InvalidParameter);
}

TEST_CASE("window invariants over a parameter grid") {
    double previous_hi = 0.0;
    for (double kbar = 0.05; kbar < 60; kbar *= 1.3) {
        const Window loc = localization_window(kbar);
        CHECK(loc.lo <= loc.hi);
        CHECK(loc.hi >= previous_hi);
        previous_hi = loc.hi;
        for (int h = 1; h <= 8; ++h) {
            const Window acc = acceleration_window(Branch::from_half_units(h));
            const Window ov = overlap_window(kbar, Branch::from_half_units(h));
            CHECK(ov.lo <= ov.hi);
            if (!ov.empty()) {
                CHECK(ov.lo >= loc.lo);
                CHECK(ov.hi <= loc.hi);
                CHECK(ov.lo >= acc.lo);
                CHECK(ov.hi <= acc.hi);
            }
        }
    }
}

TEST_CASE("classify_lambda") {
    const auto inside = classify_lambda(1.7, 14, 2);
    REQUIRE(inside.size() == 3);
    CHECK(inside[0] == Classification{WindowKind::Localization, std::nullopt});
    CHECK(inside[1] == Classification{WindowKind::Acceleration, Branch(0.5)});
    CHECK(inside[2] == Classification{WindowKind::Overlap, Branch(0.5)});
    CHECK(classify_lambda(0.1, 14, 2).empty());
    CHECK(classify_lambda(2.5, 14, 2).empty());
    CHECK_THROWS_AS(classify_lambda(-0.1, 14, 2), InvalidParameter);
}

TEST_CASE("window kind names") {
    CHECK(to_string(WindowKind::Localization) == "Localization");
    CHECK(to_string(WindowKind::Acceleration) == "Acceleration");
    CHECK(to_string(WindowKind::Overlap) == "Overlap");
}

TEST_CASE("dimensionless parameter validation") {
    DimensionlessParams p{1.7, 2.0, 50.0, 14.0};
    CHECK_NOTHROW(p.validate());
    p.kappa = 0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = {-0.1, 2.0, 50.0, 14.0};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = {1.7, 2.0, -1.0, 14.0};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = {1.7, 2.0, 0.0, 14.0};
    CHECK_NOTHROW(p.validate());
}

}
