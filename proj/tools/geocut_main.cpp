#include "geocut/harness.hpp"
#include "geocut/io.hpp"
#include "geocut/nonlocal.hpp"
#include "geocut/optimize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace geocut;
using nlohmann::json;

namespace {

struct DomainOpts {
    std::string shape = "square";
    int dim = 0;
    std::string density = "uniform";

    void attach(CLI::App* app) {
        app->add_option("--domain", shape, "square|cube|ball|box")->default_val(shape);
        app->add_option("--dim", dim, "ambient dimension (defaults per shape)");
        app->add_option("--density", density, "uniform or file:PATH (CSV x1,..,xd,rho)")
            ->default_val(density);
    }
    DomainDensity build() const {
        int d = dim > 0 ? dim : (shape == "cube" ? 3 : 2);
        DomainDensity dd = shape == "ball" ? DomainDensity::ball(RowVec::Zero(d), 1.0)
                                           : DomainDensity::unit_box(d);
        if (shape != "ball" && shape != "square" && shape != "cube" && shape != "box")
            throw CLI::ValidationError("--domain", "unknown shape " + shape);
        if (density.rfind("file:", 0) == 0)
            dd = dd.with_density(DomainDensity::density_from_csv(density.substr(5), d));
        else if (density != "uniform")
            throw CLI::ValidationError("--density", "unknown density " + density);
        return dd;
    }
};

Kernel make_kernel(const std::string& spec, int dim) {
    if (spec == "uniform") return Kernel::uniform(dim);
    if (spec == "gaussian") return Kernel::gaussian(dim);
    if (spec.rfind("file:", 0) == 0) return Kernel::from_csv(spec.substr(5), dim);
    throw CLI::ValidationError("--kernel", "unknown kernel " + spec);
}

void parse_objective(const std::string& tag, int& v, int& b, bool& is_mbis) {
    if (tag == "mbis") {
        is_mbis = true;
        return;
    }
    is_mbis = false;
    if (tag.rfind("che:", 0) == 0 && tag.size() == 7 && tag[5] == ',') {
        v = tag[4] - '0';
        b = tag[6] - '0';
        if ((v == 1 || v == 2) && (b == 1 || b == 2)) return;
    }
    throw CLI::ValidationError("--objective", "expected che:v,b or mbis, got " + tag);
}

CutSet parse_cut(const std::string& spec, int dim) {
    auto colon = spec.find(':');
    std::string family = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto comma = args.find(',');
    if ((family == "halfspace" || family == "cap") && comma != std::string::npos) {
        int axis = std::stoi(args.substr(0, comma));
        double offset = std::stod(args.substr(comma + 1));
        return axis_halfspace(axis, offset, dim);
    }
    if (family == "corner" && comma != std::string::npos) {
        CornerDisc c;
        c.corner_mask = std::stoi(args.substr(0, comma));
        c.radius = std::stod(args.substr(comma + 1));
        return c;
    }
    throw CLI::ValidationError("--cut",
                               "expected halfspace:axis,offset or corner:mask,radius");
}

json cut_to_json(const DomainDensity& dd, const CutSet& cut) {
    json j;
    j["descriptor"] = describe(dd, cut);
    if (const auto* h = std::get_if<Halfspace>(&cut)) {
        std::vector<double> n(h->normal.data(), h->normal.data() + h->normal.size());
        j["family"] = "halfspace";
        j["normal"] = n;
        j["offset"] = h->offset;
    } else if (const auto* c = std::get_if<CornerDisc>(&cut)) {
        j["family"] = "corner-disc";
        j["corner"] = c->corner_mask;
        j["radius"] = c->radius;
    } else {
        const auto& bu = std::get<BoxUnion>(cut);
        j["family"] = "box-union";
        j["cells_per_axis"] = bu.cells_per_axis;
        j["cells"] = bu.cells.size();
    }
    return j;
}

struct PointsOpts {
    std::string path;
    Index n = 0;
    std::uint64_t seed = 0;

    void attach(CLI::App* app) {
        app->add_option("--points", path, "points CSV (x1,...,xd)");
        app->add_option("--n", n, "sample size when sampling from the domain");
        app->add_option("--seed", seed, "sampling seed")->default_val(0);
    }
    PointCloud load(const DomainDensity& dd) const {
        if (!path.empty()) return read_points_csv(path);
        if (n < 1)
            throw CLI::ValidationError("--points", "give --points PATH or --n to sample");
        return sample_points(dd, n, seed);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel-weighted geometric graph cuts and their continuum limits"};
    app.require_subcommand(1);

    // ---- kernel info ----
    auto* kernel_cmd = app.add_subcommand("kernel", "kernel utilities");
    kernel_cmd->require_subcommand(1);
    auto* kinfo = kernel_cmd->add_subcommand("info", "print kernel constants as JSON");
    std::string kinfo_kernel = "uniform";
    int kinfo_dim = 2;
    double kinfo_tail = 1e-12;
    kinfo->add_option("--kernel", kinfo_kernel, "uniform|gaussian|file:PATH")->required();
    kinfo->add_option("--dim", kinfo_dim, "ambient dimension")->required();
    kinfo->add_option("--tail-eps", kinfo_tail, "truncation threshold")->default_val(1e-12);
    kinfo->callback([&]() {
        Kernel k = make_kernel(kinfo_kernel, kinfo_dim);
        json out{{"kernel", kinfo_kernel},
                 {"dim", kinfo_dim},
                 {"sigma_phi", surface_tension(k)},
                 {"i_phi", total_mass(k)},
                 {"r_cut", effective_support(k, kinfo_tail)}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- continuum ----
    auto* cont = app.add_subcommand("continuum", "continuum Cheeger / bisection values");
    DomainOpts cont_dom;
    cont_dom.attach(cont);
    std::string cont_obj = "che:1,1";
    cont->add_option("--objective", cont_obj, "che:v,b or mbis")->default_val(cont_obj);
    cont->callback([&]() {
        DomainDensity dd = cont_dom.build();
        int v = 1, b = 1;
        bool is_mbis = false;
        parse_objective(cont_obj, v, b, is_mbis);
        ContinuumResult res = is_mbis ? continuum_mbis(dd) : continuum_cheeger(dd, v, b);
        json out{{"domain", dd.describe()},
                 {"objective", cont_obj},
                 {"value", res.value},
                 {"argmin", cut_to_json(dd, res.argmin)},
                 {"note", res.note},
                 {"balance_convention", "min(Vol(A), Vol(D\\A)) / Vol(D)"}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- graph stats ----
    auto* graph_cmd = app.add_subcommand("graph", "graph utilities");
    graph_cmd->require_subcommand(1);
    auto* gstats = graph_cmd->add_subcommand("stats", "build a graph and print summary stats");
    PointsOpts gpts;
    DomainOpts gdom;
    std::string gkernel = "uniform";
    double gr = 0.1;
    gpts.attach(gstats);
    gdom.attach(gstats);
    gstats->add_option("--r", gr, "distance parameter")->required();
    gstats->add_option("--kernel", gkernel)->default_val(gkernel);
    gstats->callback([&]() {
        DomainDensity dd = gdom.build();
        PointCloud cloud = gpts.load(dd);
        const Index n = cloud.n();
        const int d = cloud.dim();
        GeoGraph g(std::move(cloud), gr, make_kernel(gkernel, d));
        json out{{"n", n},
                 {"dim", d},
                 {"r", gr},
                 {"edges_above_tail", g.positive_edge_count()},
                 {"vol2", g.total_volume2()},
                 {"vol2_rescaled",
                  g.total_volume2() / (static_cast<double>(n) * n * std::pow(gr, d))},
                 {"all_pairs_fallback", g.all_pairs_fallback()}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- grid inspect ----
    auto* grid_cmd = app.add_subcommand("grid", "granulation utilities");
    grid_cmd->require_subcommand(1);
    auto* ginspect = grid_cmd->add_subcommand("inspect", "build the box grid and report it");
    PointsOpts ipts;
    DomainOpts idom;
    double ir = 0.1, igamma = 0.0;
    std::string ipartition;
    ipts.attach(ginspect);
    idom.attach(ginspect);
    ginspect->add_option("--r", ir)->required();
    ginspect->add_option("--gamma", igamma, "granulation factor (default: choose_gamma)");
    ginspect->add_option("--partition", ipartition, "0/1 per line, for color counts");
    ginspect->callback([&]() {
        DomainDensity dd = idom.build();
        PointCloud cloud = ipts.load(dd);
        const Index n = cloud.n();
        double gamma = igamma;
        bool regime = true;
        if (gamma <= 0.0) {
            auto gc = choose_gamma(n, ir, dd.dim());
            gamma = gc.value;
            regime = gc.regime_ok;
        }
        BoxGrid grid = build_grid(dd, cloud, ir, gamma);
        std::map<Index, Index> histogram;
        for (Index b = 0; b < grid.box_count(); ++b)
            histogram[static_cast<Index>(grid.points_in_box(b).size())]++;
        json hist = json::object();
        for (auto [count, boxes] : histogram) hist[std::to_string(count)] = boxes;
        json out{{"s_n", grid.box_count()},
                 {"gamma", gamma},
                 {"side", grid.side()},
                 {"regime_ok", regime},
                 {"merge_constant", grid.merge_constant()},
                 {"points_per_box_histogram", hist}};
        if (!ipartition.empty()) {
            Partition y = read_partition(ipartition);
            if (static_cast<Index>(y.size()) != n)
                throw error("partition length does not match the point count");
            BoxColors colors = classify_boxes(grid, y, n);
            Index black = 0, white = 0;
            for (auto c : colors.color) {
                if (c == BoxColor::Black) ++black;
                if (c == BoxColor::White) ++white;
            }
            out["colors"] = {{"black", black},
                             {"white", white},
                             {"grey", colors.grey_count(true)},
                             {"unclassifiable", colors.unclassifiable_count()}};
        }
        std::cout << out.dump(2) << "\n";
    });

    // ---- cut ----
    auto* cut_cmd = app.add_subcommand("cut", "optimize a Cheeger-type objective");
    PointsOpts cpts;
    DomainOpts cdom;
    std::string ckernel = "uniform", cobj = "che:1,1", cmethod = "refine", csweep = "axis",
                cout_partition;
    double cr = 0.1, cgamma = 0.0;
    cpts.attach(cut_cmd);
    cdom.attach(cut_cmd);
    cut_cmd->add_option("--r", cr)->required();
    cut_cmd->add_option("--kernel", ckernel)->default_val(ckernel);
    cut_cmd->add_option("--objective", cobj)->default_val(cobj);
    cut_cmd->add_option("--method", cmethod, "exact|sweep|refine")->default_val(cmethod);
    cut_cmd->add_option("--sweep-mode", csweep, "axis|fiedler")->default_val(csweep);
    cut_cmd->add_option("--gamma", cgamma, "granulation factor for refine");
    cut_cmd->add_option("--out-partition", cout_partition, "write the argmin as 0/1 lines");
    cut_cmd->callback([&]() {
        DomainDensity dd = cdom.build();
        PointCloud cloud = cpts.load(dd);
        const Index n = cloud.n();
        const int d = cloud.dim();
        int v = 1, b = 1;
        bool is_mbis = false;
        parse_objective(cobj, v, b, is_mbis);
        if (is_mbis) throw CLI::ValidationError("--objective", "use the bisect subcommand");
        GeoGraph g(std::move(cloud), cr, make_kernel(ckernel, d));
        SweepMode mode = csweep == "fiedler" ? SweepMode::Fiedler : SweepMode::Axis;
        OptimizerResult res;
        if (cmethod == "exact") {
            res = exact_cheeger(g, v, b);
        } else if (cmethod == "sweep") {
            res = sweep_cut(g, v, b, mode);
        } else if (cmethod == "refine") {
            double gamma = cgamma > 0.0 ? cgamma : choose_gamma(n, cr, d).value;
            BoxGrid grid = build_grid(dd, g.cloud(), cr, gamma);
            res = refine_pipeline(g, grid, v, b, mode);
        } else {
            throw CLI::ValidationError("--method", "expected exact, sweep or refine");
        }
        if (!cout_partition.empty()) write_partition(cout_partition, res.partition);
        json out{{"objective", cobj},
                 {"value", res.value},
                 {"rescaled", rescaled_estimator(res.value, n, cr, d)},
                 {"method", res.method},
                 {"seed", cpts.seed},
                 {"iterations", res.iterations},
                 {"fallback", res.fallback},
                 {"set_size", partition_count(res.partition)}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- bisect ----
    auto* bisect_cmd = app.add_subcommand("bisect", "minimum bisection");
    PointsOpts bpts;
    DomainOpts bdom;
    std::string bkernel = "uniform", bmethod = "local", bout_partition;
    double br = 0.1;
    Index bpasses = 16;
    bpts.attach(bisect_cmd);
    bdom.attach(bisect_cmd);
    bisect_cmd->add_option("--r", br)->required();
    bisect_cmd->add_option("--kernel", bkernel)->default_val(bkernel);
    bisect_cmd->add_option("--method", bmethod, "exact|local")->default_val(bmethod);
    bisect_cmd->add_option("--max-passes", bpasses)->default_val(16);
    bisect_cmd->add_option("--out-partition", bout_partition);
    bisect_cmd->callback([&]() {
        DomainDensity dd = bdom.build();
        PointCloud cloud = bpts.load(dd);
        const Index n = cloud.n();
        const int d = cloud.dim();
        GeoGraph g(std::move(cloud), br, make_kernel(bkernel, d));
        OptimizerResult res;
        if (bmethod == "exact") {
            res = exact_mbis(g);
        } else if (bmethod == "local") {
            res = local_search_bisection(g, median_axis_bisection(g), bpasses);
        } else {
            throw CLI::ValidationError("--method", "expected exact or local");
        }
        if (!bout_partition.empty()) write_partition(bout_partition, res.partition);
        json out{{"objective", "mbis"},
                 {"value", res.value},
                 {"rescaled", rescaled_estimator(res.value, n, br, d)},
                 {"method", res.method},
                 {"seed", bpts.seed},
                 {"iterations", res.iterations},
                 {"set_size", partition_count(res.partition)}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- tv-nonlocal ----
    auto* tv_cmd = app.add_subcommand("tv-nonlocal", "nonlocal TV recovery curve");
    DomainOpts tdom;
    std::string tkernel = "uniform", tcut = "halfspace:0,0.5", tout;
    std::vector<double> tr_list;
    Index tsamples = 1000000;
    std::uint64_t tseed = 0;
    tdom.attach(tv_cmd);
    tv_cmd->add_option("--kernel", tkernel)->default_val(tkernel);
    tv_cmd->add_option("--cut", tcut, "halfspace:axis,offset or corner:mask,radius")
        ->default_val(tcut);
    tv_cmd->add_option("--r-list", tr_list, "descending radii")->required()->delimiter(',');
    tv_cmd->add_option("--samples", tsamples)->default_val(1000000);
    tv_cmd->add_option("--seed", tseed)->default_val(0);
    tv_cmd->add_option("--out", tout, "CSV output path (r,estimate,stderr,target)");
    tv_cmd->callback([&]() {
        DomainDensity dd = tdom.build();
        Kernel k = make_kernel(tkernel, dd.dim());
        auto u = IndicatorField::from_cut(parse_cut(tcut, dd.dim()));
        RecoveryCurve curve = recovery_curve(dd, k, u, tr_list, tsamples, tseed);
        if (!tout.empty()) {
            std::ofstream f(tout);
            if (!f) throw error("cannot write " + tout);
            f << "r,estimate,stderr,target\n";
            for (const auto& row : curve.rows)
                f << format_double(row.r) << ',' << format_double(row.estimate) << ','
                  << format_double(row.std_error) << ',' << format_double(curve.target)
                  << "\n";
        }
        json rows = json::array();
        for (const auto& row : curve.rows)
            rows.push_back(
                {{"r", row.r}, {"estimate", row.estimate}, {"stderr", row.std_error}});
        json out{{"target", curve.target}, {"rows", rows}, {"samples", tsamples}};
        std::cout << out.dump(2) << "\n";
    });

    // ---- converge ----
    auto* conv = app.add_subcommand("converge", "run a convergence experiment");
    std::string conv_config, conv_out = "results.csv";
    bool conv_strict = false;
    conv->add_option("--config", conv_config, "JSON experiment config")->required();
    conv->add_option("--out", conv_out, "CSV output path")->default_val(conv_out);
    conv->add_flag("--strict", conv_strict, "exit 2 when any record is sub-regime");
    int exit_code = 0;
    conv->callback([&]() {
        ExperimentConfig cfg = ExperimentConfig::from_json_file(conv_config);
        auto records = run_convergence(cfg);
        std::ofstream f(conv_out);
        if (!f) throw error("cannot write " + conv_out);
        write_records_csv(f, records);
        bool sub_regime = false;
        for (const auto& rec : records) sub_regime = sub_regime || !rec.regime_ok;
        json out{{"records", records.size()}, {"out", conv_out}, {"sub_regime", sub_regime}};
        std::cout << out.dump(2) << "\n";
        if (conv_strict && sub_regime) exit_code = 2;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
