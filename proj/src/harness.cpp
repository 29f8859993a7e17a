#include "geocut/harness.hpp"

#include "geocut/io.hpp"
#include "geocut/optimize.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace geocut {

using nlohmann::json;

double ExperimentConfig::r_for(std::size_t n_index) const {
    if (!r_list.empty()) {
        if (n_index >= r_list.size()) throw std::invalid_argument("r list shorter than n schedule");
        return r_list[n_index];
    }
    Index n = n_schedule.at(n_index);
    const int d = domain.dim();
    return r_coefficient *
           std::pow(std::log(static_cast<double>(n)) / static_cast<double>(n), 1.0 / d);
}

bool ExperimentConfig::regime_ok(Index n, double r) const {
    // tolerance: the default rule r = c (log n / n)^{1/d} with c = 2 sits
    // exactly on the boundary, up to rounding
    return static_cast<double>(n) * std::pow(r, domain.dim()) >=
           4.0 * std::log(static_cast<double>(n)) * (1.0 - 1e-12);
}

namespace {

DomainDensity domain_from_json(const json& j) {
    std::string shape = j.value("shape", "square");
    int dim = j.value("dim", shape == "cube" ? 3 : 2);
    DomainDensity dd = DomainDensity::unit_box(dim);
    if (shape == "ball")
        dd = DomainDensity::ball(RowVec::Zero(dim), 1.0);
    else if (shape != "square" && shape != "cube" && shape != "box")
        throw std::invalid_argument("unknown domain shape: " + shape);
    std::string density = j.value("density", "uniform");
    if (density.rfind("file:", 0) == 0)
        dd = dd.with_density(DomainDensity::density_from_csv(density.substr(5), dim));
    else if (density != "uniform")
        throw std::invalid_argument("unknown density spec: " + density);
    return dd;
}

Kernel kernel_from_spec(const std::string& spec, int dim) {
    if (spec == "uniform") return Kernel::uniform(dim);
    if (spec == "gaussian") return Kernel::gaussian(dim);
    if (spec.rfind("file:", 0) == 0) return Kernel::from_csv(spec.substr(5), dim);
    throw std::invalid_argument("unknown kernel spec: " + spec);
}

struct ObjectiveSpec {
    std::string tag;
    int v = 1, b = 1;
    bool is_che = false, is_mbis = false, is_vol2 = false;
};

ObjectiveSpec parse_objective(const std::string& tag) {
    ObjectiveSpec o;
    o.tag = tag;
    if (tag == "mbis") {
        o.is_mbis = true;
    } else if (tag == "vol2") {
        o.is_vol2 = true;
    } else if (tag.rfind("che:", 0) == 0 && tag.size() == 7 && tag[5] == ',') {
        o.is_che = true;
        o.v = tag[4] - '0';
        o.b = tag[6] - '0';
        if ((o.v != 1 && o.v != 2) || (o.b != 1 && o.b != 2))
            throw std::invalid_argument("objective needs v,b in {1,2}: " + tag);
    } else {
        throw std::invalid_argument("unknown objective tag: " + tag);
    }
    return o;
}

Index worker_count(Index jobs) {
    Index hw = static_cast<Index>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("CHEEGER_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = std::min<Index>(hw, static_cast<Index>(v));
    }
    return std::max<Index>(1, std::min(hw, jobs));
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.domain = domain_from_json(j.value("domain", json::object()));
    cfg.kernel = kernel_from_spec(j.value("kernel", "uniform"), cfg.domain.dim());
    for (const auto& o : j.value("objectives", json::array()))
        cfg.objectives.push_back(o.get<std::string>());
    for (const auto& n : j.value("n", json::array())) cfg.n_schedule.push_back(n.get<Index>());
    if (j.contains("r")) {
        const auto& r = j["r"];
        if (r.is_array()) {
            for (const auto& v : r) cfg.r_list.push_back(v.get<double>());
        } else if (r.is_object()) {
            if (r.value("rule", "clogn") != "clogn")
                throw std::invalid_argument("unknown r rule");
            cfg.r_coefficient = r.value("c", 2.0);
        } else {
            cfg.r_coefficient = r.get<double>();
        }
    }
    cfg.replicates = j.value("replicates", 1);
    cfg.master_seed = j.value("master_seed", 0ULL);
    cfg.method = j.value("method", "default");
    cfg.tail_eps = j.value("tail_eps", 1e-12);
    if (cfg.n_schedule.empty()) throw std::invalid_argument("config needs an n schedule");
    if (cfg.replicates < 1) throw std::invalid_argument("config needs replicates >= 1");
    for (const auto& tag : cfg.objectives) parse_objective(tag);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::vector<ConvergenceRecord> run_convergence(const ExperimentConfig& config) {
    std::vector<ObjectiveSpec> objectives;
    for (const auto& tag : config.objectives) objectives.push_back(parse_objective(tag));
    if (objectives.empty()) return {};

    const auto& dd = config.domain;
    const int d = dd.dim();
    const double sigma = surface_tension(config.kernel);

    // continuum targets, shared by every record of the same objective
    std::vector<double> targets(objectives.size(), 0.0);
    for (std::size_t o = 0; o < objectives.size(); ++o) {
        if (objectives[o].is_vol2)
            targets[o] = domain_volume(dd, 2) * total_mass(config.kernel);
        else if (objectives[o].is_mbis)
            targets[o] = 0.5 * sigma * continuum_mbis(dd).value;
        else
            targets[o] = 0.5 * sigma * continuum_cheeger(dd, objectives[o].v, objectives[o].b).value;
    }

    struct Job {
        std::size_t n_index;
        Index replicate;
    };
    std::vector<Job> jobs;
    for (std::size_t ni = 0; ni < config.n_schedule.size(); ++ni)
        for (Index rep = 0; rep < config.replicates; ++rep) jobs.push_back({ni, rep});

    std::vector<std::vector<ConvergenceRecord>> slots(jobs.size());
    auto run_job = [&](std::size_t jid) {
        const Job& job = jobs[jid];
        const Index n = config.n_schedule[job.n_index];
        const double r = config.r_for(job.n_index);
        const std::uint64_t seed = config.master_seed + static_cast<std::uint64_t>(job.replicate);
        PointCloud cloud = sample_points(dd, n, seed);
        GeoGraph g(std::move(cloud), r, config.kernel, config.tail_eps);
        GammaChoice gamma = choose_gamma(n, r, d);
        BoxGrid grid = build_grid(dd, g.cloud(), r, gamma.value);
        const bool regime = config.regime_ok(n, r);

        for (std::size_t o = 0; o < objectives.size(); ++o) {
            const auto& spec = objectives[o];
            ConvergenceRecord rec;
            rec.n = n;
            rec.r = r;
            rec.gamma = gamma.value;
            rec.seed = seed;
            rec.objective = spec.tag;
            rec.target = targets[o];
            rec.regime_ok = regime;
            const auto t0 = std::chrono::steady_clock::now();
            if (spec.is_vol2) {
                rec.raw = g.total_volume2();
                rec.rescaled = rec.raw / (static_cast<double>(n) * static_cast<double>(n) *
                                          std::pow(r, d));
                rec.method = "volume-law";
            } else if (spec.is_mbis) {
                OptimizerResult res =
                    local_search_bisection(g, median_axis_bisection(g), 16);
                rec.raw = res.value;
                rec.rescaled = rescaled_estimator(rec.raw, n, r, d);
                rec.method = res.method;
            } else {
                OptimizerResult res = refine_pipeline(g, grid, spec.v, spec.b);
                rec.raw = res.value;
                rec.rescaled = rescaled_estimator(rec.raw, n, r, d);
                rec.method = res.method;
            }
            rec.runtime_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rec.rel_deviation = rec.target != 0.0 ? (rec.rescaled - rec.target) / rec.target
                                                  : rec.rescaled;
            slots[jid].push_back(std::move(rec));
        }
    };

    const Index workers = worker_count(static_cast<Index>(jobs.size()));
    if (workers <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (Index w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    std::size_t j = next.fetch_add(1);
                    if (j >= jobs.size()) break;
                    run_job(j);
                }
            });
        for (auto& t : pool) t.join();
    }

    std::vector<ConvergenceRecord> out;
    for (auto& slot : slots)
        for (auto& rec : slot) out.push_back(std::move(rec));
    return out;
}

double weak_convergence_distance(const BoxGrid& grid, const Partition& y, const CutSet& cut,
                                 const DomainDensity& dd, Index n) {
    const Index nb = grid.box_count();
    std::vector<double> y_frac(static_cast<std::size_t>(nb), 0.0);
    double assigned = 0.0;
    for (Index b = 0; b < nb; ++b) {
        Index black = 0;
        for (Index p : grid.points_in_box(b)) black += y[static_cast<std::size_t>(p)] ? 1 : 0;
        y_frac[static_cast<std::size_t>(b)] = static_cast<double>(black) / static_cast<double>(n);
        assigned += static_cast<double>(black);
    }
    const double outside_mass =
        (static_cast<double>(partition_count(y)) - assigned) / static_cast<double>(n);

    double nu_a_total = region_volume(dd, cut, 1);
    StableSum direct, complement;
    StableSum nu_a_sum;
    for (Index b = 0; b < nb; ++b) {
        double nua = grid.nu_in_cut(dd, cut, b);
        nu_a_sum.add(nua);
        direct.add(std::abs(y_frac[static_cast<std::size_t>(b)] - nua));
        complement.add(std::abs(y_frac[static_cast<std::size_t>(b)] - (grid.nu(b) - nua)));
    }
    double resid_a = std::max(0.0, nu_a_total - nu_a_sum.value());
    double resid_ac = std::max(0.0, (1.0 - nu_a_total) - (1.0 - nu_a_sum.value()));
    double da = direct.value() + outside_mass + resid_a;
    double dac = complement.value() + outside_mass + resid_ac;
    return std::min(da, dac);
}

void write_records_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
    out << "n,r,gamma,seed,objective,raw,rescaled,target,rel_deviation,method,regime_ok\n";
    for (const auto& rec : records) {
        out << rec.n << ',' << format_double(rec.r) << ',' << format_double(rec.gamma) << ','
            << rec.seed << ',' << rec.objective << ',' << format_double(rec.raw) << ','
            << format_double(rec.rescaled) << ',' << format_double(rec.target) << ','
            << format_double(rec.rel_deviation) << ',' << rec.method << ','
            << (rec.regime_ok ? 1 : 0) << "\n";
    }
}

std::string records_csv(const std::vector<ConvergenceRecord>& records) {
    std::ostringstream ss;
    write_records_csv(ss, records);
    return ss.str();
}

std::string records_json(const std::vector<ConvergenceRecord>& records) {
    json arr = json::array();
    for (const auto& rec : records) {
        arr.push_back({{"n", rec.n},
                       {"r", rec.r},
                       {"gamma", rec.gamma},
                       {"seed", rec.seed},
                       {"objective", rec.objective},
                       {"raw", rec.raw},
                       {"rescaled", rec.rescaled},
                       {"target", rec.target},
                       {"rel_deviation", rec.rel_deviation},
                       {"method", rec.method},
                       {"runtime_s", rec.runtime_s},
                       {"regime_ok", rec.regime_ok}});
    }
    return arr.dump(2);
}

}  // namespace geocut
