#include "geocut/harness.hpp"

#include "geocut/optimize.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

using namespace geocut;

namespace {

const char* kTinyConfig = R"json({
    "domain": {"shape": "square", "dim": 2, "density": "uniform"},
    "kernel": "uniform",
    "objectives": ["che:1,1", "vol2", "mbis"],
    "n": [500, 1000],
    "r": {"rule": "clogn", "c": 2.0},
    "replicates": 2,
    "master_seed": 42
})json";

}  // namespace

TEST_CASE("config parsing") {
    auto cfg = ExperimentConfig::from_json_text(kTinyConfig);
    CHECK(cfg.n_schedule == std::vector<Index>{500, 1000});
    CHECK(cfg.replicates == 2);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.objectives.size() == 3);
    double r0 = cfg.r_for(0);
    CHECK(r0 == doctest::Approx(2.0 * std::sqrt(std::log(500.0) / 500.0)).epsilon(1e-12));
    CHECK(cfg.regime_ok(500, r0));  // n r^2 = 4 log n exactly meets the bound

    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"n\": []}"), std::invalid_argument);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text(
            "{\"n\": [10], \"objectives\": [\"bogus\"], \"replicates\": 1}"),
        std::invalid_argument);
}

TEST_CASE("explicit r lists override the rule") {
    auto cfg = ExperimentConfig::from_json_text(R"({
        "n": [100, 200], "r": [0.3, 0.2], "objectives": ["vol2"], "replicates": 1
    })");
    CHECK(cfg.r_for(0) == 0.3);
    CHECK(cfg.r_for(1) == 0.2);
}

TEST_CASE("empty objective lists produce no records") {
    auto cfg = ExperimentConfig::from_json_text(
        R"({"n": [100], "objectives": [], "replicates": 1})");
    CHECK(run_convergence(cfg).empty());
}

TEST_CASE("convergence records are well-formed and self-consistent") {
    auto cfg = ExperimentConfig::from_json_text(kTinyConfig);
    auto records = run_convergence(cfg);
    REQUIRE(records.size() == 2 * 2 * 3);
    for (const auto& rec : records) {
        CHECK(rec.regime_ok);
        CHECK(rec.seed >= 42);
        CHECK(rec.seed <= 43);
        double scale = rec.objective == "vol2"
                           ? static_cast<double>(rec.n) * rec.n * rec.r * rec.r
                           : static_cast<double>(rec.n) * rec.n * std::pow(rec.r, 3);
        CHECK(rec.rescaled * scale == doctest::Approx(rec.raw).epsilon(1e-12));
        CHECK(rec.runtime_s >= 0.0);
        if (rec.objective == "vol2") {
            CHECK(rec.target == doctest::Approx(M_PI).epsilon(1e-9));
            // the volume law holds loosely even at this scale
            CHECK(std::abs(rec.rel_deviation) < 0.25);
        }
        if (rec.objective == "che:1,1")
            CHECK(rec.target == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
        if (rec.objective == "mbis")
            CHECK(rec.target == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    }
    // records arrive in (n, replicate, objective) order
    CHECK(records[0].n == 500);
    CHECK(records[0].seed == 42);
    CHECK(records[1].objective == "vol2");
    CHECK(records[3].seed == 43);
    CHECK(records[6].n == 1000);
    CHECK(records[6].seed == 42);
    CHECK(records.back().n == 1000);
}

TEST_CASE("csv output is byte-identical across thread counts") {
    auto cfg = ExperimentConfig::from_json_text(kTinyConfig);
    setenv("CHEEGER_THREADS", "1", 1);
    std::string csv1 = records_csv(run_convergence(cfg));
    setenv("CHEEGER_THREADS", "4", 1);
    std::string csv4 = records_csv(run_convergence(cfg));
    unsetenv("CHEEGER_THREADS");
    CHECK(csv1 == csv4);
    CHECK(csv1.rfind("n,r,gamma,seed,objective,raw,rescaled,target,rel_deviation,method,"
                     "regime_ok\n",
                     0) == 0);
    // runtime only lives in the JSON mirror
    CHECK(csv1.find("runtime") == std::string::npos);
    auto records = run_convergence(cfg);
    CHECK(records_json(records).find("runtime_s") != std::string::npos);
}

TEST_CASE("weak convergence distance vanishes on ideally matched counts") {
    auto dd = DomainDensity::unit_box(2);
    // 0.25-side grid; counts per box engineered to equal n * nu(A ∩ Q_i)
    PointCloud c;
    c.pts.resize(64, 2);
    Index row = 0;
    auto put = [&](double x, double y, int count) {
        for (int i = 0; i < count; ++i) {
            c.pts(row, 0) = x + 0.001 * i;
            c.pts(row, 1) = y;
            ++row;
        }
    };
    // blacks: left column 9/6/9, middle column (A side) 3/2/3
    put(0.20, 0.20, 9);
    put(0.20, 0.50, 6);
    put(0.20, 0.80, 9);
    put(0.45, 0.20, 3);
    put(0.45, 0.50, 2);
    put(0.45, 0.80, 3);
    // whites mirror them on the complement side
    put(0.80, 0.20, 9);
    put(0.80, 0.50, 6);
    put(0.80, 0.80, 9);
    put(0.55, 0.20, 3);
    put(0.55, 0.50, 2);
    put(0.55, 0.80, 3);
    REQUIRE(row == 64);
    BoxGrid grid = build_grid(dd, c, 0.5, 0.5);
    Partition y(64, 0);
    for (Index i = 0; i < 32; ++i) y[static_cast<std::size_t>(i)] = 1;
    CutSet half = axis_halfspace(0, 0.5, 2);
    CHECK(weak_convergence_distance(grid, y, half, dd, 64) == 0.0);
    // complementing the sample leaves the distance unchanged
    CHECK(weak_convergence_distance(grid, partition_complement(y), half, dd, 64) == 0.0);
}

TEST_CASE("weak convergence distance is positive for mismatched samples") {
    auto dd = DomainDensity::unit_box(2);
    PointCloud c = sample_points(dd, 400, 12);
    BoxGrid grid = build_grid(dd, c, 0.5, 0.5);
    Partition y(400, 0);
    for (Index i = 0; i < 400; ++i)
        if (c.pts(i, 1) < 0.3) y[static_cast<std::size_t>(i)] = 1;  // wrong set entirely
    CutSet half = axis_halfspace(0, 0.5, 2);
    double d = weak_convergence_distance(grid, y, half, dd, 400);
    CHECK(d > 0.1);
    CHECK(d <= 2.0);
}

TEST_CASE("refined partitions stay weakly close to a continuum minimizer") {
    auto dd = DomainDensity::unit_box(2);
    const Index n = 8000;
    const double r = 2.0 * std::sqrt(std::log(static_cast<double>(n)) / n);
    PointCloud cloud = sample_points(dd, n, 1618);
    GeoGraph g(std::move(cloud), r, Kernel::uniform(2));
    auto gamma = choose_gamma(n, r, 2);
    BoxGrid grid = build_grid(dd, g.cloud(), r, gamma.value);
    auto res = refine_pipeline(g, grid, 1, 1);
    // both axis halfspaces attain the square's optimum; take the closer one
    double dist =
        std::min(weak_convergence_distance(grid, res.partition, axis_halfspace(0, 0.5, 2),
                                           dd, n),
                 weak_convergence_distance(grid, res.partition, axis_halfspace(1, 0.5, 2),
                                           dd, n));
    CHECK(dist <= 0.25);  // frozen band (observed 0.16 at this seed)
}

TEST_CASE("sub-regime configurations are flagged") {
    auto cfg = ExperimentConfig::from_json_text(R"({
        "n": [200], "r": [0.05], "objectives": ["vol2"], "replicates": 1
    })");
    auto records = run_convergence(cfg);
    REQUIRE(records.size() == 1);
    CHECK(!records[0].regime_ok);
}

TEST_CASE("ball-domain convergence targets") {
    auto cfg = ExperimentConfig::from_json_text(R"({
        "domain": {"shape": "ball", "dim": 2},
        "kernel": "uniform",
        "objectives": ["che:1,1", "mbis"],
        "n": [600],
        "r": [0.25],
        "replicates": 1,
        "master_seed": 5
    })");
    auto records = run_convergence(cfg);
    REQUIRE(records.size() == 2);
    const double sigma_half = 0.5 * 4.0 / 3.0;
    for (const auto& rec : records) {
        if (rec.objective == "che:1,1")
            CHECK(rec.target ==
                  doctest::Approx(sigma_half * 4.0 / (M_PI * M_PI)).epsilon(1e-3));
        if (rec.objective == "mbis")
            CHECK(rec.target ==
                  doctest::Approx(sigma_half * 2.0 / (M_PI * M_PI)).epsilon(1e-3));
        CHECK(rec.raw > 0.0);
    }
}
