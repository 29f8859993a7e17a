#include "geocut/nonlocal.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

using namespace geocut;

TEST_CASE("constant fields have zero nonlocal TV") {
    auto dd = DomainDensity::unit_box(2);
    auto one = IndicatorField::constant(1.0);
    auto est = nonlocal_tv(dd, Kernel::uniform(2), 0.1, one, 20000, 5);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("estimates are deterministic for a fixed seed") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    auto a = nonlocal_tv(dd, Kernel::uniform(2), 0.05, u, 100000, 9);
    auto b = nonlocal_tv(dd, Kernel::uniform(2), 0.05, u, 100000, 9);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("positive homogeneity is exact for a shared seed") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    auto scaled = u.scaled(3.5);
    auto a = nonlocal_tv(dd, Kernel::uniform(2), 0.05, u, 50000, 4);
    auto b = nonlocal_tv(dd, Kernel::uniform(2), 0.05, scaled, 50000, 4);
    CHECK(b.value == doctest::Approx(3.5 * a.value).epsilon(1e-12));
}

TEST_CASE("u and 1-u agree within Monte Carlo error") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.3, 2));
    auto a = nonlocal_tv(dd, Kernel::uniform(2), 0.08, u, 200000, 10);
    auto b = nonlocal_tv(dd, Kernel::uniform(2), 0.08, u.complemented(), 200000, 11);
    double band = 3.0 * std::hypot(a.std_error, b.std_error);
    CHECK(std::abs(a.value - b.value) <= band);
}

TEST_CASE("halfspace estimate recovers sigma * TV at small r") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    auto est = nonlocal_tv(dd, Kernel::uniform(2), 0.05, u, 400000, 21);
    const double target = 4.0 / 3.0;
    CHECK(std::abs(est.value - target) <= 0.05 * target + 3.0 * est.std_error);
    // recovery improves as r shrinks
    auto coarse = nonlocal_tv(dd, Kernel::uniform(2), 0.4, u, 400000, 21);
    CHECK(std::abs(est.value - target) < std::abs(coarse.value - target));
}

TEST_CASE("recovery curve on the unit square halfspace") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    auto curve = recovery_curve(dd, Kernel::uniform(2), u, {0.2, 0.1, 0.05, 0.025}, 400000, 3);
    CHECK(curve.target == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    REQUIRE(curve.rows.size() == 4);
    const auto& last = curve.rows.back();
    CHECK(std::abs(last.estimate - curve.target) <=
          0.05 * curve.target + 3.0 * last.std_error);
    for (std::size_t i = 1; i < curve.rows.size(); ++i) {
        double prev = std::abs(curve.rows[i - 1].estimate - curve.target);
        double cur = std::abs(curve.rows[i].estimate - curve.target);
        double noise = 2.0 * (curve.rows[i - 1].std_error + curve.rows[i].std_error);
        CHECK(cur <= prev + noise);
    }
}

TEST_CASE("recovery curve on the disc diameter") {
    auto dd = DomainDensity::ball(RowVec::Zero(2), 1.0);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.0, 2));
    auto curve = recovery_curve(dd, Kernel::uniform(2), u, {0.1, 0.05}, 400000, 8);
    const double target = 4.0 / 3.0 * 2.0 / (M_PI * M_PI);
    CHECK(curve.target == doctest::Approx(target).epsilon(1e-10));
    const auto& last = curve.rows.back();
    CHECK(std::abs(last.estimate - target) <= 0.05 * target + 3.0 * last.std_error);
}

TEST_CASE("zero field yields an all-zero curve") {
    auto dd = DomainDensity::unit_box(2);
    auto curve = recovery_curve(dd, Kernel::uniform(2), IndicatorField::constant(0.0),
                                {0.1, 0.05}, 20000, 2);
    for (const auto& row : curve.rows) {
        CHECK(row.estimate == 0.0);
        CHECK(row.std_error == 0.0);
    }
    CHECK(curve.target == 0.0);
}

TEST_CASE("radius lists must descend") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    CHECK_THROWS_AS(recovery_curve(dd, Kernel::uniform(2), u, {0.05, 0.1}, 1000, 1),
                    std::invalid_argument);
}

TEST_CASE("liminf direction for box-union indicators (soft check, reported)") {
    // the lower-bound direction of the recovery limit: at small r the
    // smoothed perimeter of a converged box-union indicator should not fall
    // far below sigma * TV of its limit set
    auto dd = DomainDensity::unit_box(2);
    BoxUnion bu;
    bu.cells_per_axis = 32;
    for (Index i = 0; i < 32; ++i)
        for (Index j = 0; j < 16; ++j) bu.cells.push_back(i * 32 + j);
    std::sort(bu.cells.begin(), bu.cells.end());
    auto u = IndicatorField::from_cut(CutSet(bu));
    double limit = surface_tension(Kernel::uniform(2)) *
                   continuum_tv(dd, axis_halfspace(1, 0.5, 2));
    auto est = nonlocal_tv(dd, Kernel::uniform(2), 0.03, u, 200000, 6);
    bool liminf_ok = est.value >= 0.95 * limit;
    MESSAGE("liminf check: estimate ", est.value, " vs threshold ", 0.95 * limit,
            std::string(liminf_ok ? " (ok)" : " (below)"));
    CHECK(est.value > 0.0);  // the direction itself is reported, not asserted
}

TEST_CASE("gaussian kernel recovery") {
    auto dd = DomainDensity::unit_box(2);
    auto u = IndicatorField::from_cut(axis_halfspace(0, 0.5, 2));
    auto est = nonlocal_tv(dd, Kernel::gaussian(2), 0.04, u, 400000, 17);
    const double target = std::sqrt(M_PI);  // sigma for the gaussian profile
    CHECK(std::abs(est.value - target) <= 0.05 * target + 3.0 * est.std_error);
}
