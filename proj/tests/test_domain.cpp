#include "geocut/domain.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace geocut;

namespace {
const double kPi = M_PI;
}

TEST_CASE("sampling stays inside the domain and is seed-deterministic") {
    auto dd = DomainDensity::unit_box(2);
    PointCloud c = sample_points(dd, 4, 7);
    REQUIRE(c.n() == 4);
    for (Index i = 0; i < c.n(); ++i) CHECK(dd.contains(c.pts.row(i)));
    PointCloud c2 = sample_points(dd, 4, 7);
    CHECK((c.pts - c2.pts).cwiseAbs().maxCoeff() == 0.0);
    PointCloud c3 = sample_points(dd, 4, 8);
    CHECK((c.pts - c3.pts).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sampling halves the unit square evenly") {
    auto dd = DomainDensity::unit_box(2);
    PointCloud c = sample_points(dd, 100000, 1);
    Index below = 0;
    for (Index i = 0; i < c.n(); ++i)
        if (c.pts(i, 0) < 0.5) ++below;
    double frac = static_cast<double>(below) / 1e5;
    CHECK(std::abs(frac - 0.5) < 0.01);
}

TEST_CASE("uniform disc sampling has mean squared radius 1/2") {
    auto dd = DomainDensity::ball(RowVec::Zero(2), 1.0);
    PointCloud c = sample_points(dd, 100000, 2);
    double acc = 0.0;
    for (Index i = 0; i < c.n(); ++i) acc += c.pts.row(i).squaredNorm();
    CHECK(std::abs(acc / 1e5 - 0.5) < 0.01);
}

TEST_CASE("region volumes on the unit square") {
    auto dd = DomainDensity::unit_box(2);
    CutSet half = axis_halfspace(0, 0.5, 2);
    CHECK(region_volume(dd, half, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(region_volume(dd, half, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CutSet disc = CornerDisc{0, 0.5};
    CHECK(region_volume(dd, disc, 1) == doctest::Approx(kPi / 16.0).epsilon(1e-12));
}

TEST_CASE("continuum TV closed forms") {
    auto square = DomainDensity::unit_box(2);
    CHECK(continuum_tv(square, axis_halfspace(0, 0.5, 2)) == doctest::Approx(1.0));
    CHECK(continuum_tv(square, CutSet(CornerDisc{0, 0.5})) == doctest::Approx(kPi / 4.0));
    auto disc = DomainDensity::ball(RowVec::Zero(2), 1.0);
    CHECK(continuum_tv(disc, axis_halfspace(0, 0.0, 2)) ==
          doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-12));
    // boundary pieces outside D do not count
    CHECK(continuum_tv(square, axis_halfspace(0, 1.0, 2)) == 0.0);
}

TEST_CASE("complement symmetry of TV and balance") {
    auto dd = DomainDensity::unit_box(2);
    for (double t : {0.2, 0.35, 0.5, 0.7}) {
        CutSet a = axis_halfspace(0, t, 2);
        Halfspace comp;
        comp.normal = RowVec::Zero(2);
        comp.normal[0] = -1.0;
        comp.offset = -t;
        CutSet ac = comp;
        CHECK(continuum_tv(dd, a) == doctest::Approx(continuum_tv(dd, ac)).epsilon(1e-12));
        for (int v : {1, 2})
            for (int b : {1, 2})
                CHECK(balance_nu(dd, a, v, b) ==
                      doctest::Approx(balance_nu(dd, ac, v, b)).epsilon(1e-12));
        CHECK(region_volume(dd, a, 1) + region_volume(dd, ac, 1) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("continuum Cheeger on the unit square") {
    auto dd = DomainDensity::unit_box(2);
    auto r11 = continuum_cheeger(dd, 1, 1);
    CHECK(r11.value == doctest::Approx(2.0).epsilon(1e-4));
    const auto* h = std::get_if<Halfspace>(&r11.argmin);
    REQUIRE(h != nullptr);
    double sign = h->normal.sum();
    CHECK(std::abs(sign * h->offset - 0.5) < 1e-3);

    auto r12 = continuum_cheeger(dd, 1, 2);
    CHECK(r12.value == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("continuum Cheeger on the unit disc") {
    auto dd = DomainDensity::ball(RowVec::Zero(2), 1.0);
    auto r = continuum_cheeger(dd, 1, 1);
    CHECK(r.value == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-3));
}

TEST_CASE("continuum minimum bisection") {
    auto square = DomainDensity::unit_box(2);
    CHECK(continuum_mbis(square).value == doctest::Approx(1.0).epsilon(1e-6));
    auto disc = DomainDensity::ball(RowVec::Zero(2), 1.0);
    CHECK(continuum_mbis(disc).value == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-4));
    auto cube = DomainDensity::unit_box(3);
    CHECK(continuum_mbis(cube).value == doctest::Approx(1.0).epsilon(1e-6));
    // the bisecting offset solves the mass constraint
    auto r = continuum_mbis(square);
    CHECK(std::abs(region_volume(square, r.argmin, 1) - 0.5) <= 1e-8);
}

TEST_CASE("similarity invariance of the dimensionless Cheeger product") {
    // CHE_{1,1} scales like diam^{-(d+1)} for uniform densities
    auto s1 = DomainDensity::unit_box(2);
    auto s2 = DomainDensity::box(RowVec::Zero(2), RowVec::Ones(2) * 2.0);
    double p1 = continuum_cheeger(s1, 1, 1).value * std::pow(s1.diameter(), 3);
    double p2 = continuum_cheeger(s2, 1, 1).value * std::pow(s2.diameter(), 3);
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-6));
}

TEST_CASE("parametric scan beats the grid oracle up to discretization slack") {
    auto square = DomainDensity::unit_box(2);
    for (int v : {1, 2}) {
        for (int b : {1, 2}) {
            auto par = continuum_cheeger(square, v, b);
            auto grid = grid_scan_cheeger(square, v, b);
            double slack = 2.0 * grid.cell_diameter * square.density_max() *
                           square.density_max() * grid.surface_bound;
            CHECK(par.value <= grid.value + slack);
        }
    }
    auto disc = DomainDensity::ball(RowVec::Zero(2), 1.0);
    auto par = continuum_cheeger(disc, 1, 1);
    auto grid = grid_scan_cheeger(disc, 1, 1);
    double slack = 2.0 * grid.cell_diameter * disc.density_max() * disc.density_max() *
                   grid.surface_bound;
    CHECK(par.value <= grid.value + slack);

    auto pm = continuum_mbis(square);
    auto gm = grid_scan_mbis(square);
    double mslack =
        2.0 * gm.cell_diameter * square.density_max() * square.density_max() * gm.surface_bound;
    CHECK(pm.value <= gm.value + mslack);
}

TEST_CASE("box-union measures agree with the closed forms") {
    auto dd = DomainDensity::unit_box(2);
    // left half of a 4x4 grid over the unit square
    BoxUnion bu;
    bu.cells_per_axis = 4;
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 2; ++j) bu.cells.push_back(j * 4 + i);
    std::sort(bu.cells.begin(), bu.cells.end());
    CHECK(region_volume(dd, CutSet(bu), 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(continuum_tv(dd, CutSet(bu)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tabulated densities renormalize and support 2-d box functionals") {
    GridDensity g;
    g.axes = {{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}};
    // linear-in-x density, node values row-major (y fastest)
    g.values = {1.0, 1.0, 1.0, 1.5, 1.5, 1.5, 2.0, 2.0, 2.0};
    g.rho_min = 1.0;
    g.rho_max = 2.0;
    auto dd = DomainDensity::unit_box(2).with_density(g);
    CHECK(!dd.uniform_density());
    CHECK(region_volume(dd, axis_halfspace(0, 1.0 - 1e-12, 2), 1) ==
          doctest::Approx(1.0).epsilon(1e-3));
    // mass below the x-midline: integral of (1 + x) on [0, 1/2] over total 3/2
    double left = region_volume(dd, axis_halfspace(0, 0.5, 2), 1);
    CHECK(left == doctest::Approx((0.5 + 0.125) / 1.5).epsilon(1e-3));
    auto r = continuum_cheeger(dd, 1, 1);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
}

TEST_CASE("unsupported combinations raise unsupported_domain_error") {
    GridDensity g;
    g.axes = {{-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}};
    g.values.assign(9, 1.0);
    g.rho_min = g.rho_max = 1.0;
    auto ball = DomainDensity::ball(RowVec::Zero(2), 1.0).with_density(g);
    CHECK_THROWS_AS(continuum_cheeger(ball, 1, 1), unsupported_domain_error);
}
