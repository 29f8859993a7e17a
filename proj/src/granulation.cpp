#include "geocut/granulation.hpp"

#include <algorithm>
#include <cmath>

namespace geocut {

GammaChoice choose_gamma(Index n, double r, int d) {
    if (n < 2 || !(r > 0.0)) throw std::invalid_argument("choose_gamma needs n >= 2, r > 0");
    const double logn = std::log(static_cast<double>(n));
    const double nrd = static_cast<double>(n) * std::pow(r, d);
    GammaChoice out;
    out.regime_ok = nrd > logn;
    double concentration = std::pow(8.0 * logn / nrd, 1.0 / (d + 2));
    double smallness = std::pow(r, 1.0 / (d + 5));
    out.value = std::clamp(std::max(concentration, smallness), 0.01, 0.5);
    return out;
}

namespace {

// cube k covers [side*(k-1/2), side*(k+1/2)) per axis; a cube center sits at
// the origin
long long cube_index_of(double x, double side) {
    return static_cast<long long>(std::floor(x / side + 0.5));
}

}  // namespace

RowVec BoxGrid::center(Index b) const {
    const auto& k = box_coords_[static_cast<std::size_t>(b)];
    RowVec z(dim_);
    for (int a = 0; a < dim_; ++a) z[a] = side_ * static_cast<double>(k[a]);
    return z;
}

Index BoxGrid::lattice_extent_span() const {
    Index m = 0;
    for (int a = 0; a < dim_; ++a)
        m = std::max<Index>(m, static_cast<Index>(lattice_hi_[a] - lattice_lo_[a] + 1));
    return m;
}

double BoxGrid::nu_in_cut(const DomainDensity& dd, const CutSet& cut, Index b) const {
    StableSum acc;
    for (const auto& [lo, hi] : box_cubes_[static_cast<std::size_t>(b)])
        acc.add(cell_cut_measure(dd, cut, lo, hi));
    return acc.value() / nu_norm_;
}

BoxGrid build_grid(const DomainDensity& dd, const PointCloud& cloud, double r, double gamma) {
    if (!(r > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("build_grid needs r, gamma > 0");
    const int d = dd.dim();
    if (cloud.dim() != d) throw std::invalid_argument("cloud dimension mismatch");
    BoxGrid grid;
    grid.dim_ = d;
    grid.gamma_ = gamma;
    grid.r_ = r;
    const double side = gamma * r;
    grid.side_ = side;

    grid.lattice_lo_.resize(d);
    grid.lattice_hi_.resize(d);
    Index lattice_total = 1;
    for (int a = 0; a < d; ++a) {
        grid.lattice_lo_[a] = cube_index_of(dd.bbox_lo()[a], side) - 1;
        grid.lattice_hi_[a] = cube_index_of(dd.bbox_hi()[a], side) + 1;
        lattice_total *= static_cast<Index>(grid.lattice_hi_[a] - grid.lattice_lo_[a] + 1);
    }
    if (lattice_total > (Index{1} << 28))
        throw grid_too_coarse_error("granulation lattice too large for this domain/side");

    auto flat_of = [&](const std::vector<long long>& k) {
        Index f = 0;
        for (int a = 0; a < d; ++a)
            f = f * static_cast<Index>(grid.lattice_hi_[a] - grid.lattice_lo_[a] + 1) +
                static_cast<Index>(k[a] - grid.lattice_lo_[a]);
        return f;
    };

    // classify cubes: interior (all corners + center in D) / intersecting
    std::vector<char> intersects(static_cast<std::size_t>(lattice_total), 0);
    grid.lattice_map_.assign(static_cast<std::size_t>(lattice_total), -1);
    std::vector<std::vector<long long>> boundary_cubes;
    std::vector<long long> k(d);
    for (int a = 0; a < d; ++a) k[a] = grid.lattice_lo_[a];
    RowVec z(d), pt(d);
    for (;;) {
        for (int a = 0; a < d; ++a) z[a] = side * static_cast<double>(k[a]);
        bool interior = dd.contains(z);
        for (int m = 0; interior && m < (1 << d); ++m) {
            for (int a = 0; a < d; ++a)
                pt[a] = z[a] + (((m >> a) & 1) ? 0.5 : -0.5) * side;
            interior = dd.contains(pt);
        }
        if (interior) {
            grid.lattice_map_[static_cast<std::size_t>(flat_of(k))] =
                static_cast<Index>(grid.box_coords_.size());
            grid.box_coords_.push_back(k);
        } else {
            bool hit;
            if (dd.shape() == Shape::Box) {
                hit = true;
                for (int a = 0; a < d; ++a)
                    hit = hit && z[a] + 0.5 * side > dd.box_lo()[a] &&
                          z[a] - 0.5 * side < dd.box_hi()[a];
            } else {
                double d2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    double lo = z[a] - 0.5 * side, hi = z[a] + 0.5 * side;
                    double gap = std::max({lo - dd.center()[a], dd.center()[a] - hi, 0.0});
                    d2 += gap * gap;
                }
                hit = d2 < dd.radius() * dd.radius();
            }
            if (hit) {
                intersects[static_cast<std::size_t>(flat_of(k))] = 1;
                boundary_cubes.push_back(k);
            }
        }
        int a = d - 1;
        while (a >= 0 && ++k[a] > grid.lattice_hi_[a]) {
            k[a] = grid.lattice_lo_[a];
            --a;
        }
        if (a < 0) break;
    }
    const Index nboxes = static_cast<Index>(grid.box_coords_.size());
    if (nboxes == 0) throw grid_too_coarse_error("no interior cubes: gamma*r too large for D");

    // merge every D-intersecting boundary cube into its nearest interior cube
    // (lexicographically smallest center on ties)
    grid.box_cubes_.resize(static_cast<std::size_t>(nboxes));
    std::vector<std::pair<std::vector<long long>, Index>> merge_map;
    double merge_factor = 0.0;
    for (const auto& bk : boundary_cubes) {
        Index best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        std::vector<long long> best_k;
        std::vector<long long> probe(d);
        for (long long ring = 1;; ++ring) {
            std::vector<long long> off(d, -ring);
            bool ring_has_cells = false;
            for (;;) {
                long long cheb = 0;
                for (int a = 0; a < d; ++a) cheb = std::max(cheb, std::llabs(off[a]));
                if (cheb == ring) {
                    bool in_range = true;
                    for (int a = 0; a < d; ++a) {
                        probe[a] = bk[a] + off[a];
                        if (probe[a] < grid.lattice_lo_[a] || probe[a] > grid.lattice_hi_[a])
                            in_range = false;
                    }
                    if (in_range) {
                        ring_has_cells = true;
                        Index id = grid.lattice_map_[static_cast<std::size_t>(flat_of(probe))];
                        if (id >= 0) {
                            double d2 = 0.0;
                            for (int a = 0; a < d; ++a) {
                                double diff = side * static_cast<double>(off[a]);
                                d2 += diff * diff;
                            }
                            bool better = d2 < best_d2;
                            if (!better && d2 == best_d2 && best >= 0)
                                better = std::lexicographical_compare(
                                    probe.begin(), probe.end(), best_k.begin(), best_k.end());
                            if (better) {
                                best_d2 = d2;
                                best = id;
                                best_k = probe;
                            }
                        }
                    }
                }
                int a = d - 1;
                while (a >= 0 && ++off[a] > ring) off[a--] = -ring;
                if (a < 0) break;
            }
            bool exhausted = !ring_has_cells && ring > grid.lattice_extent_span();
            if ((best >= 0 && static_cast<double>(ring) * side > std::sqrt(best_d2)) || exhausted)
                break;
        }
        if (best < 0) throw grid_too_coarse_error("boundary cube found no interior neighbor");
        merge_map.emplace_back(bk, best);
        merge_factor = std::max(merge_factor, std::sqrt(best_d2) / side);
    }
    grid.merge_constant_ = 3.0 * merge_factor + std::sqrt(static_cast<double>(d));

    // member cubes (clipped to the domain bounding box) and merged bboxes
    auto cube_box = [&](const std::vector<long long>& kk, RowVec& lo, RowVec& hi) {
        for (int a = 0; a < d; ++a) {
            lo[a] = std::max(side * (static_cast<double>(kk[a]) - 0.5), dd.bbox_lo()[a]);
            hi[a] = std::min(side * (static_cast<double>(kk[a]) + 0.5), dd.bbox_hi()[a]);
        }
    };
    RowVec lo(d), hi(d);
    for (Index b = 0; b < nboxes; ++b) {
        cube_box(grid.box_coords_[static_cast<std::size_t>(b)], lo, hi);
        grid.box_cubes_[static_cast<std::size_t>(b)].emplace_back(lo, hi);
        grid.box_lo_.push_back(lo);
        grid.box_hi_.push_back(hi);
    }
    for (const auto& [bk, id] : merge_map) {
        cube_box(bk, lo, hi);
        grid.box_cubes_[static_cast<std::size_t>(id)].emplace_back(lo, hi);
        grid.box_lo_[static_cast<std::size_t>(id)] =
            grid.box_lo_[static_cast<std::size_t>(id)].cwiseMin(lo);
        grid.box_hi_[static_cast<std::size_t>(id)] =
            grid.box_hi_[static_cast<std::size_t>(id)].cwiseMax(hi);
    }
    double max_diam = 0.0, max_radius = 0.0;
    for (Index b = 0; b < nboxes; ++b) {
        max_diam = std::max(
            max_diam, (grid.box_hi_[static_cast<std::size_t>(b)] -
                       grid.box_lo_[static_cast<std::size_t>(b)])
                          .norm());
        RowVec z = grid.center(b);
        double rad = 0.0;
        for (int m = 0; m < (1 << d); ++m) {
            RowVec c(d);
            for (int a = 0; a < d; ++a)
                c[a] = ((m >> a) & 1) ? grid.box_hi_[static_cast<std::size_t>(b)][a]
                                      : grid.box_lo_[static_cast<std::size_t>(b)][a];
            rad = std::max(rad, (c - z).norm());
        }
        max_radius = std::max(max_radius, rad);
    }
    grid.max_box_diameter_ = max_diam;
    grid.max_merge_extent_ = max_radius;

    // box measures, renormalized so they sum to exactly 1
    StableSum total;
    grid.nu_.resize(static_cast<std::size_t>(nboxes));
    for (Index b = 0; b < nboxes; ++b) {
        StableSum acc;
        for (const auto& [clo, chi] : grid.box_cubes_[static_cast<std::size_t>(b)])
            acc.add(cell_measure(dd, clo, chi));
        grid.nu_[static_cast<std::size_t>(b)] = acc.value();
        total.add(acc.value());
    }
    grid.nu_norm_ = total.value();
    if (!(grid.nu_norm_ > 0.0)) throw grid_too_coarse_error("granulation measures vanish");
    for (auto& v : grid.nu_) v /= grid.nu_norm_;

    // assign points to boxes
    std::vector<Index> boundary_assign(static_cast<std::size_t>(lattice_total), -1);
    for (const auto& [bk, id] : merge_map)
        boundary_assign[static_cast<std::size_t>(flat_of(bk))] = id;
    const Index n = cloud.n();
    grid.box_points_.resize(static_cast<std::size_t>(nboxes));
    grid.point_box_.resize(static_cast<std::size_t>(n));
    std::vector<long long> pk(d);
    for (Index i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) pk[a] = cube_index_of(cloud.pts(i, a), side);
        Index flat = flat_of(pk);
        Index id = grid.lattice_map_[static_cast<std::size_t>(flat)];
        if (id < 0) id = boundary_assign[static_cast<std::size_t>(flat)];
        if (id < 0) throw error("point falls outside every granulation cube");
        grid.point_box_[static_cast<std::size_t>(i)] = id;
        grid.box_points_[static_cast<std::size_t>(id)].push_back(i);
    }
    return grid;
}

Index BoxColors::grey_count(bool include_unclassifiable) const {
    Index c = 0;
    for (std::size_t i = 0; i < color.size(); ++i)
        if (color[i] == BoxColor::Grey && (include_unclassifiable || !unclassifiable[i])) ++c;
    return c;
}

Index BoxColors::unclassifiable_count() const {
    Index c = 0;
    for (auto u : unclassifiable) c += u ? 1 : 0;
    return c;
}

BoxColors classify_boxes(const BoxGrid& grid, const Partition& y, Index n) {
    BoxColors out;
    const Index nb = grid.box_count();
    out.color.resize(static_cast<std::size_t>(nb));
    out.unclassifiable.assign(static_cast<std::size_t>(nb), 0);
    const double gamma = grid.gamma();
    for (Index b = 0; b < nb; ++b) {
        Index black = 0;
        const auto& pts = grid.points_in_box(b);
        for (Index p : pts) black += y[static_cast<std::size_t>(p)] ? 1 : 0;
        Index white = static_cast<Index>(pts.size()) - black;
        const double expected = static_cast<double>(n) * grid.nu(b);
        if (std::min(black, white) > gamma * expected) {
            out.color[static_cast<std::size_t>(b)] = BoxColor::Grey;
        } else if (black >= (1.0 - 2.0 * gamma) * expected) {
            out.color[static_cast<std::size_t>(b)] = BoxColor::Black;
        } else if (white >= (1.0 - 2.0 * gamma) * expected) {
            out.color[static_cast<std::size_t>(b)] = BoxColor::White;
        } else {
            // possible only when the concentration event fails
            out.color[static_cast<std::size_t>(b)] = BoxColor::Grey;
            out.unclassifiable[static_cast<std::size_t>(b)] = 1;
        }
    }
    return out;
}

double chernoff_tail(double n, double p, double k) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must lie in [0,1]");
    if (k < 0.0) throw std::invalid_argument("k/np must be nonnegative");
    const double np = n * p;
    if (np == 0.0) return k == 0.0 ? 1.0 : 0.0;
    const double x = k / np;
    const double h = x == 0.0 ? 1.0 : 1.0 - x + x * std::log(x);
    return std::exp(-np * h);
}

std::pair<double, double> kernel_box_bounds(const BoxGrid& grid, const Kernel& kernel, double r,
                                            Index i, Index j) {
    if (i < 0 || j < 0 || i >= grid.box_count() || j >= grid.box_count())
        throw std::invalid_argument("box id out of range");
    const RowVec &li = grid.bbox_lo(i), &hi = grid.bbox_hi(i);
    const RowVec &lj = grid.bbox_lo(j), &hj = grid.bbox_hi(j);
    double min2 = 0.0, max2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        double gap = std::max({lj[a] - hi[a], li[a] - hj[a], 0.0});
        min2 += gap * gap;
        double far = std::max(hj[a] - li[a], hi[a] - lj[a]);
        max2 += far * far;
    }
    return {kernel(std::sqrt(max2) / r), kernel(std::sqrt(min2) / r)};
}

namespace {

struct BoxCounts {
    std::vector<double> black, white, total;
};

BoxCounts box_counts(const BoxGrid& grid, const Partition& y) {
    BoxCounts c;
    const Index nb = grid.box_count();
    c.black.assign(static_cast<std::size_t>(nb), 0.0);
    c.white.assign(static_cast<std::size_t>(nb), 0.0);
    c.total.assign(static_cast<std::size_t>(nb), 0.0);
    for (Index b = 0; b < nb; ++b) {
        Index bl = 0;
        const auto& pts = grid.points_in_box(b);
        for (Index p : pts) bl += y[static_cast<std::size_t>(p)] ? 1 : 0;
        c.black[static_cast<std::size_t>(b)] = static_cast<double>(bl);
        c.white[static_cast<std::size_t>(b)] = static_cast<double>(pts.size()) - bl;
        c.total[static_cast<std::size_t>(b)] = static_cast<double>(pts.size());
    }
    return c;
}

}  // namespace

double modified_cut(const BoxGrid& grid, const GeoGraph& g, const Partition& y) {
    if (static_cast<Index>(y.size()) != g.n())
        throw std::invalid_argument("partition size mismatch");
    BoxCounts c = box_counts(grid, y);
    const double range = g.r() * g.kernel().exact_support();
    StableSum acc;
    grid.for_each_box_pair_within(range, [&](Index i, Index j) {
        auto [phi_lo, phi_hi] = kernel_box_bounds(grid, g.kernel(), g.r(), i, j);
        if (phi_lo == 0.0) return;
        auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        if (i == j)
            acc.add(phi_lo * c.black[si] * c.white[si]);
        else
            acc.add(phi_lo * (c.black[si] * c.white[sj] + c.black[sj] * c.white[si]));
    });
    return acc.value();
}

double modified_volume(const BoxGrid& grid, const GeoGraph& g, const Partition& y, int v) {
    if (static_cast<Index>(y.size()) != g.n())
        throw std::invalid_argument("partition size mismatch");
    if (v == 1) return static_cast<double>(partition_count(y));
    if (v != 2) throw std::invalid_argument("v must be 1 or 2");
    BoxCounts c = box_counts(grid, y);
    const double range = g.r() * g.kernel().exact_support();
    StableSum acc;
    grid.for_each_box_pair_within(range, [&](Index i, Index j) {
        if (i == j) return;  // phi-tilde vanishes within a box
        auto [phi_lo, phi_hi] = kernel_box_bounds(grid, g.kernel(), g.r(), i, j);
        if (phi_lo == 0.0) return;
        auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        acc.add(phi_lo * (c.black[si] * c.total[sj] + c.black[sj] * c.total[si]));
    });
    return acc.value();
}

double boundary_flux(const BoxGrid& grid, const GeoGraph& g, const Partition& y,
                     const BoxColors& colors) {
    if (colors.grey_count(true) > 0)
        throw precondition_error("boundary flux requires a grey-free coloring");
    BoxCounts c = box_counts(grid, y);
    const double range = g.r() * g.kernel().exact_support();
    StableSum acc;
    grid.for_each_box_pair_within(range, [&](Index i, Index j) {
        auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        if (colors.color[si] == colors.color[sj]) return;
        auto [phi_lo, phi_hi] = kernel_box_bounds(grid, g.kernel(), g.r(), i, j);
        if (phi_lo == 0.0) return;
        acc.add(phi_lo * (c.black[si] * c.white[sj] + c.black[sj] * c.white[si]));
    });
    return acc.value();
}

}  // namespace geocut
