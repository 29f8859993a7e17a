#include "geocut/geograph.hpp"

#include "geocut/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace geocut;

namespace {

PointCloud make_cloud(std::initializer_list<std::initializer_list<double>> rows) {
    PointCloud c;
    auto it = rows.begin();
    c.pts.resize(static_cast<Index>(rows.size()), static_cast<Index>(it->size()));
    Index i = 0;
    for (const auto& row : rows) {
        Index a = 0;
        for (double v : row) c.pts(i, a++) = v;
        ++i;
    }
    return c;
}

PointCloud collinear3() { return make_cloud({{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}}); }

// direct double loop over all pairs, same weight definition, no cell list
double brute_cut(const GeoGraph& g, const Partition& y) {
    double acc = 0.0;
    for (Index i = 0; i < g.n(); ++i)
        for (Index j = i + 1; j < g.n(); ++j) {
            if (y[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(j)]) continue;
            double dist = (g.cloud().pts.row(i) - g.cloud().pts.row(j)).norm();
            if (dist <= g.cutoff()) acc += g.kernel()(dist / g.r());
        }
    return acc;
}

double brute_vol2(const GeoGraph& g, const Partition& y) {
    double acc = 0.0;
    for (Index i = 0; i < g.n(); ++i) {
        if (!y[static_cast<std::size_t>(i)]) continue;
        for (Index j = 0; j < g.n(); ++j) {
            if (j == i) continue;
            double dist = (g.cloud().pts.row(i) - g.cloud().pts.row(j)).norm();
            if (dist <= g.cutoff()) acc += g.kernel()(dist / g.r());
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("two points in range form one unit edge") {
    GeoGraph g(make_cloud({{0.0, 0.0}, {0.5, 0.0}}), 1.0, Kernel::uniform(2));
    CHECK(g.weight(0, 1) == 1.0);
    CHECK(g.positive_edge_count() == 1);
    CHECK(g.total_volume2() == 2.0);
}

TEST_CASE("unit-spaced line keeps only adjacent edges") {
    GeoGraph g(make_cloud({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}), 1.0, Kernel::uniform(2));
    CHECK(g.weight(0, 1) == 1.0);  // distance exactly r
    CHECK(g.weight(1, 2) == 1.0);
    CHECK(g.weight(0, 2) == 0.0);
    CHECK(g.neighbors(1) == std::vector<Index>{0, 2});
}

TEST_CASE("cell-list totals equal brute force exactly for the uniform kernel") {
    auto dd = DomainDensity::unit_box(2);
    PointCloud c = sample_points(dd, 1000, 42);
    GeoGraph g(std::move(c), 0.1, Kernel::uniform(2));
    CHECK(!g.all_pairs_fallback());
    Partition all(1000, 1);
    CHECK(volume(g, all, 2) == brute_vol2(g, all));
    auto rng = make_rng(7);
    Partition y(1000, 0);
    for (auto& v : y) v = uniform01(rng) < 0.5 ? 1 : 0;
    CHECK(cut_weight(g, y) == brute_cut(g, y));
}

TEST_CASE("cell-list matches brute force to 1e-12 on mixed kernels, n <= 500") {
    auto dd = DomainDensity::unit_box(2);
    for (int trial = 0; trial < 6; ++trial) {
        Index n = 100 + 80 * trial;
        Kernel k = trial % 2 == 0 ? Kernel::uniform(2) : Kernel::gaussian(2);
        double r = 0.05 + 0.05 * trial;
        GeoGraph g(sample_points(dd, n, 100 + trial), r, k);
        auto rng = make_rng(trial);
        Partition y(static_cast<std::size_t>(n), 0);
        for (auto& v : y) v = uniform01(rng) < 0.4 ? 1 : 0;
        double bc = brute_cut(g, y);
        double cc = cut_weight(g, y);
        CHECK(cc == doctest::Approx(bc).epsilon(1e-12));
        CHECK(volume(g, y, 2) == doctest::Approx(brute_vol2(g, y)).epsilon(1e-12));
    }
}

TEST_CASE("cut examples on the half-spaced line") {
    GeoGraph g(collinear3(), 1.0, Kernel::uniform(2));
    Partition first{1, 0, 0}, first_two{1, 1, 0};
    CHECK(cut_weight(g, first) == 2.0);
    CHECK(cut_weight(g, first_two) == 2.0);
    CHECK(cut_weight(g, Partition{0, 0, 0}) == 0.0);
}

TEST_CASE("cut is symmetric under complementation") {
    auto dd = DomainDensity::unit_box(2);
    GeoGraph g(sample_points(dd, 200, 5), 0.15, Kernel::gaussian(2));
    auto rng = make_rng(11);
    for (int t = 0; t < 20; ++t) {
        Partition y(200, 0);
        for (auto& v : y) v = uniform01(rng) < 0.3 ? 1 : 0;
        CHECK(cut_weight(g, y) ==
              doctest::Approx(cut_weight(g, partition_complement(y))).epsilon(1e-14));
    }
}

TEST_CASE("volumes") {
    GeoGraph g(collinear3(), 1.0, Kernel::uniform(2));
    Partition all{1, 1, 1};
    CHECK(volume(g, all, 2) == 6.0);  // each degree 2
    GeoGraph g7(sample_points(DomainDensity::unit_box(2), 7, 3), 0.2, Kernel::uniform(2));
    Partition y7(7, 0);
    y7[0] = y7[3] = y7[6] = 1;
    CHECK(volume(g7, y7, 1) == 3.0);
    GeoGraph far(make_cloud({{0.0, 0.0}, {2.0, 0.0}}), 1.0, Kernel::uniform(2));
    CHECK(volume(far, Partition{1, 1}, 2) == 0.0);
}

TEST_CASE("volume additivity") {
    auto dd = DomainDensity::unit_box(2);
    GeoGraph g(sample_points(dd, 300, 9), 0.12, Kernel::gaussian(2));
    auto rng = make_rng(13);
    Partition y(300, 0);
    for (auto& v : y) v = uniform01(rng) < 0.5 ? 1 : 0;
    double vy = volume(g, y, 2);
    double vc = volume(g, partition_complement(y), 2);
    CHECK(vy + vc == doctest::Approx(g.total_volume2()).epsilon(1e-12));
    // total weighted degree is twice the edge weight
    StableSum edges;
    g.for_each_pair([&](Index, Index, double w) { edges.add(w); });
    CHECK(g.total_volume2() == doctest::Approx(2.0 * edges.value()).epsilon(1e-12));
}

TEST_CASE("balance") {
    GeoGraph g4(sample_points(DomainDensity::unit_box(2), 4, 21), 0.3, Kernel::uniform(2));
    Partition one{1, 0, 0, 0};
    CHECK(balance(g4, one, 1, 1) == doctest::Approx(0.25));
    CHECK(balance(g4, one, 1, 2) == doctest::Approx(3.0 / 16.0));
    GeoGraph g3(collinear3(), 1.0, Kernel::uniform(2));
    CHECK(balance(g3, Partition{1, 0, 0}, 2, 1) == doctest::Approx(1.0 / 3.0));
    GeoGraph far(make_cloud({{0.0, 0.0}, {2.0, 0.0}}), 1.0, Kernel::uniform(2));
    CHECK_THROWS_AS(balance(far, Partition{1, 0}, 2, 1), degenerate_graph_error);
}

TEST_CASE("objective") {
    GeoGraph g(collinear3(), 1.0, Kernel::uniform(2));
    CHECK(objective(g, Partition{1, 0, 0}, 1, 1) == doctest::Approx(6.0));
    CHECK(objective(g, Partition{1, 0, 0}, 2, 1) == doctest::Approx(6.0));
    CHECK_THROWS_AS(objective(g, Partition{0, 0, 0}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(objective(g, Partition{1, 1, 1}, 1, 1), std::invalid_argument);
    // two clusters farther apart than r cut nothing
    GeoGraph two(make_cloud({{0.0, 0.0}, {0.1, 0.0}, {5.0, 0.0}, {5.1, 0.0}}), 1.0,
                 Kernel::uniform(2));
    CHECK(objective(two, Partition{1, 1, 0, 0}, 1, 1) == 0.0);
}

TEST_CASE("objective is zero exactly when the partition disconnects the graph") {
    auto dd = DomainDensity::unit_box(2);
    GeoGraph g(sample_points(dd, 60, 17), 0.12, Kernel::uniform(2));
    auto rng = make_rng(23);
    for (int t = 0; t < 30; ++t) {
        Partition y(60, 0);
        for (auto& v : y) v = uniform01(rng) < 0.5 ? 1 : 0;
        Index k = partition_count(y);
        if (k == 0 || k == 60) continue;
        bool crossed = false;
        g.for_each_pair([&](Index i, Index j, double w) {
            if (w > 0.0 && y[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)])
                crossed = true;
        });
        CHECK((objective(g, y, 1, 1) > 0.0) == crossed);
    }
}

TEST_CASE("rescaled estimator arithmetic") {
    CHECK(rescaled_estimator(8.0, 2, 1.0, 2) == doctest::Approx(2.0));
    CHECK(rescaled_estimator(0.0, 1000, 0.3, 2) == 0.0);
    CHECK(rescaled_estimator(1.2e6, 10000, 0.05, 2) == doctest::Approx(96.0).epsilon(1e-12));
}

TEST_CASE("tiny radius cannot blow up the cell grid") {
    auto dd = DomainDensity::unit_box(2);
    GeoGraph g(sample_points(dd, 50, 99), 1e-7, Kernel::uniform(2));
    Partition y(50, 0);
    y[0] = 1;
    CHECK(cut_weight(g, y) == brute_cut(g, y));
}

TEST_CASE("radius beyond the domain falls back to all pairs with a flag") {
    auto dd = DomainDensity::unit_box(2);
    GeoGraph g(sample_points(dd, 40, 3), 5.0, Kernel::uniform(2));
    CHECK(g.all_pairs_fallback());
    Partition y(40, 0);
    for (int i = 0; i < 13; ++i) y[static_cast<std::size_t>(i)] = 1;
    CHECK(cut_weight(g, y) == brute_cut(g, y));
}
