#include "geocut/geograph.hpp"

#include <algorithm>
#include <cmath>

namespace geocut {

GeoGraph::GeoGraph(PointCloud cloud, double r, Kernel kernel, double tail_eps)
    : cloud_(std::move(cloud)), r_(r), kernel_(std::move(kernel)), tail_eps_(tail_eps) {
    if (!(r_ > 0.0)) throw std::invalid_argument("graph radius must be positive");
    if (cloud_.n() < 1) throw std::invalid_argument("graph needs at least one point");
    const int d = dim();
    if (d > kMaxDim) throw std::invalid_argument("dimension exceeds the supported maximum");
    if (kernel_.dim() != d) throw std::invalid_argument("kernel dimension mismatch");
    cutoff_ = r_ * effective_support(kernel_, tail_eps_);

    grid_lo_ = cloud_.pts.colwise().minCoeff();
    RowVec grid_hi = cloud_.pts.colwise().maxCoeff();
    cell_side_.resize(d);
    // cap the grid so tiny radii cannot blow up the cell count
    Index cap = std::max<Index>(
        1, 2 * static_cast<Index>(std::ceil(std::pow(static_cast<double>(n()), 1.0 / d))));
    Index total = 1;
    bool any_multi = false;
    for (int a = 0; a < d; ++a) {
        double extent = grid_hi[a] - grid_lo_[a];
        Index nc = 1;
        if (extent > 0.0 && cutoff_ > 0.0)
            nc = std::clamp<Index>(static_cast<Index>(std::floor(extent / cutoff_)), 1, cap);
        ncells_[a] = nc;
        cell_side_[a] = nc > 0 && extent > 0.0 ? extent / nc : 1.0;
        total *= nc;
        any_multi = any_multi || nc > 1;
    }
    all_pairs_ = !any_multi;

    cell_points_.assign(static_cast<std::size_t>(total), {});
    point_cell_.resize(static_cast<std::size_t>(n()));
    for (Index i = 0; i < n(); ++i) {
        Index cell = 0;
        for (int a = 0; a < d; ++a) {
            double extent_pos = cloud_.pts(i, a) - grid_lo_[a];
            Index c = static_cast<Index>(std::floor(extent_pos / cell_side_[a]));
            c = std::clamp<Index>(c, 0, ncells_[a] - 1);
            cell = cell * ncells_[a] + c;
        }
        point_cell_[static_cast<std::size_t>(i)] = cell;
        cell_points_[static_cast<std::size_t>(cell)].push_back(i);
    }

    // weighted degrees, one compensated accumulator per point
    std::vector<StableSum> acc(static_cast<std::size_t>(n()));
    Index edges = 0;
    for_each_pair([&](Index i, Index j, double w) {
        acc[static_cast<std::size_t>(i)].add(w);
        acc[static_cast<std::size_t>(j)].add(w);
        if (w > tail_eps_) ++edges;
    });
    positive_edges_ = edges;
    degree_.resize(static_cast<std::size_t>(n()));
    StableSum tot;
    for (Index i = 0; i < n(); ++i) {
        degree_[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)].value();
        tot.add(degree_[static_cast<std::size_t>(i)]);
    }
    vol2_total_ = tot.value();
}

GeoGraph build_graph(PointCloud cloud, double r, const Kernel& kernel, double tail_eps) {
    return GeoGraph(std::move(cloud), r, kernel, tail_eps);
}

std::vector<Index> GeoGraph::neighbors(Index i) const {
    std::vector<Index> out;
    for_each_neighbor(i, [&](Index j, double w) {
        if (w > 0.0) out.push_back(j);
    });
    std::sort(out.begin(), out.end());
    return out;
}

double cut_weight(const GeoGraph& g, const Partition& y) {
    if (static_cast<Index>(y.size()) != g.n())
        throw std::invalid_argument("partition size mismatch");
    StableSum acc;
    g.for_each_pair([&](Index i, Index j, double w) {
        if (y[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)]) acc.add(w);
    });
    return acc.value();
}

double volume(const GeoGraph& g, const Partition& y, int v) {
    if (static_cast<Index>(y.size()) != g.n())
        throw std::invalid_argument("partition size mismatch");
    if (v == 1) return static_cast<double>(partition_count(y));
    if (v != 2) throw std::invalid_argument("v must be 1 or 2");
    StableSum acc;
    for (Index i = 0; i < g.n(); ++i)
        if (y[static_cast<std::size_t>(i)]) acc.add(g.weighted_degree(i));
    return acc.value();
}

double balance(const GeoGraph& g, const Partition& y, int v, int b) {
    double total = v == 1 ? static_cast<double>(g.n()) : g.total_volume2();
    if (!(total > 0.0)) throw degenerate_graph_error("total volume is zero (edgeless graph)");
    double in = volume(g, y, v);
    double out = total - in;
    if (b == 1) return std::min(in, out) / total;
    if (b == 2) return in * out / (total * total);
    throw std::invalid_argument("b must be 1 or 2");
}

double objective(const GeoGraph& g, const Partition& y, int v, int b) {
    Index k = partition_count(y);
    if (k == 0 || k == g.n())
        throw std::invalid_argument("objective needs a nonempty proper subset");
    double cut = cut_weight(g, y);
    if (cut == 0.0) return 0.0;
    double bal = balance(g, y, v, b);
    if (!(bal > 0.0)) return std::numeric_limits<double>::infinity();
    return cut / bal;
}

double rescaled_estimator(double value, Index n, double r, int d) {
    if (n <= 0 || !(r > 0.0)) throw std::invalid_argument("rescaling needs n, r > 0");
    return value / (static_cast<double>(n) * static_cast<double>(n) * std::pow(r, d + 1));
}

}  // namespace geocut
