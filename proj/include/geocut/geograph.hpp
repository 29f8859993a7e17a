#pragma once

#include "geocut/common.hpp"
#include "geocut/domain.hpp"
#include "geocut/kernel.hpp"

#include <array>
#include <vector>

namespace geocut {

// Membership mask over the n points; 1 = in Y ("black").
using Partition = std::vector<std::uint8_t>;

inline Index partition_count(const Partition& y) {
    Index c = 0;
    for (auto v : y) c += v ? 1 : 0;
    return c;
}

inline Partition partition_complement(const Partition& y) {
    Partition out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] ? 0 : 1;
    return out;
}

/// Immutable kernel-weighted geometric graph over a point cloud. Edge weights
/// are phi(|x-y|/r), truncated to 0 beyond r * R_cut where R_cut is the
/// effective kernel support at tail_eps; the truncation error in any cut sum
/// is at most n^2 * tail_eps. Neighbor queries run over a uniform cell grid
/// with cell side >= r * R_cut, so 3^d adjacent cells suffice.
class GeoGraph {
public:
    GeoGraph(PointCloud cloud, double r, Kernel kernel, double tail_eps = 1e-12);

    const PointCloud& cloud() const { return cloud_; }
    Index n() const { return cloud_.n(); }
    int dim() const { return cloud_.dim(); }
    double r() const { return r_; }
    const Kernel& kernel() const { return kernel_; }
    double tail_eps() const { return tail_eps_; }
    double cutoff() const { return cutoff_; }
    bool all_pairs_fallback() const { return all_pairs_; }
    double truncation_bound() const {
        return tail_eps_ * static_cast<double>(n()) * static_cast<double>(n());
    }

    double weight(Index i, Index j) const {
        if (i == j) return 0.0;
        double dist = (cloud_.pts.row(i) - cloud_.pts.row(j)).norm();
        return dist <= cutoff_ ? kernel_(dist / r_) : 0.0;
    }

    double weighted_degree(Index i) const { return degree_[static_cast<std::size_t>(i)]; }
    double total_volume2() const { return vol2_total_; }  // Vol_{n,2}(X_n)
    Index positive_edge_count() const { return positive_edges_; }

    // Visits j != i with |x_i - x_j| <= cutoff in a fixed order (ascending
    // neighbor cell id, ascending point index within a cell); fn(j, w).
    template <class F>
    void for_each_neighbor(Index i, F&& fn) const {
        const int d = dim();
        const double cutoff2 = cutoff_ * cutoff_;
        std::array<Index, kMaxDim> cc{};
        Index rem = point_cell_[static_cast<std::size_t>(i)];
        for (int a = d - 1; a >= 0; --a) {
            cc[a] = rem % ncells_[a];
            rem /= ncells_[a];
        }
        int combos = 1;
        for (int a = 0; a < d; ++a) combos *= 3;
        for (int k = 0; k < combos; ++k) {
            Index cell = 0;
            int rem2 = k;
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                int pw = 1;
                for (int q = a + 1; q < d; ++q) pw *= 3;
                int off = (rem2 / pw) % 3 - 1;
                Index v = cc[a] + off;
                if (v < 0 || v >= ncells_[a]) {
                    ok = false;
                    break;
                }
                cell = cell * ncells_[a] + v;
            }
            if (!ok) continue;
            for (Index j : cell_points_[static_cast<std::size_t>(cell)]) {
                if (j == i) continue;
                double d2 = (cloud_.pts.row(i) - cloud_.pts.row(j)).squaredNorm();
                if (d2 <= cutoff2) fn(j, kernel_(std::sqrt(d2) / r_));
            }
        }
    }

    // Visits each unordered in-range pair once, ascending i; fn(i, j, w).
    template <class F>
    void for_each_pair(F&& fn) const {
        for (Index i = 0; i < n(); ++i)
            for_each_neighbor(i, [&](Index j, double w) {
                if (j > i) fn(i, j, w);
            });
    }

    // Visits j != i with |x_i - x_j| <= radius (radius may exceed the graph
    // cutoff); fn(j, dist).
    template <class F>
    void for_each_within(Index i, double radius, F&& fn) const {
        const int d = dim();
        const double rad2 = radius * radius;
        std::array<Index, kMaxDim> cc{}, span{};
        Index rem = point_cell_[static_cast<std::size_t>(i)];
        for (int a = d - 1; a >= 0; --a) {
            cc[a] = rem % ncells_[a];
            rem /= ncells_[a];
        }
        Index combos = 1;
        for (int a = 0; a < d; ++a) {
            span[a] = static_cast<Index>(std::ceil(radius / cell_side_[a])) + 1;
            span[a] = std::min<Index>(span[a], ncells_[a]);
            combos *= 2 * span[a] + 1;
        }
        for (Index k = 0; k < combos; ++k) {
            Index cell = 0;
            Index rem2 = k;
            bool ok = true;
            for (int a = d - 1; a >= 0; --a) {
                Index width = 2 * span[a] + 1;
                Index off = rem2 % width - span[a];
                rem2 /= width;
                Index v = cc[a] + off;
                if (v < 0 || v >= ncells_[a]) {
                    ok = false;
                    break;
                }
                cell += v * cell_stride(a);
            }
            if (!ok) continue;
            for (Index j : cell_points_[static_cast<std::size_t>(cell)]) {
                if (j == i) continue;
                double d2 = (cloud_.pts.row(i) - cloud_.pts.row(j)).squaredNorm();
                if (d2 <= rad2) fn(j, std::sqrt(d2));
            }
        }
    }

    // Positive-weight neighbors of i, ascending.
    std::vector<Index> neighbors(Index i) const;

    static constexpr int kMaxDim = 8;

private:
    Index cell_stride(int axis) const {
        Index s = 1;
        for (int a = dim() - 1; a > axis; --a) s *= ncells_[a];
        return s;
    }

    PointCloud cloud_;
    double r_;
    Kernel kernel_;
    double tail_eps_;
    double cutoff_;
    bool all_pairs_ = false;
    std::array<Index, kMaxDim> ncells_{};
    RowVec grid_lo_;
    RowVec cell_side_;
    std::vector<std::vector<Index>> cell_points_;
    std::vector<Index> point_cell_;
    std::vector<double> degree_;
    double vol2_total_ = 0.0;
    Index positive_edges_ = 0;
};

GeoGraph build_graph(PointCloud cloud, double r, const Kernel& kernel, double tail_eps = 1e-12);

// Cut_{n,phi}(Y): total weight of edges from Y to its complement.
double cut_weight(const GeoGraph& g, const Partition& y);
// Vol_{n,v}(Y): v = 1 counts points, v = 2 sums weighted degrees.
double volume(const GeoGraph& g, const Partition& y, int v);
// Bal_{n,v,b}(Y) in [0,1].
double balance(const GeoGraph& g, const Partition& y, int v, int b);
// Cut/Bal with the conventions: 0 when the cut is empty, +inf when the
// balance vanishes with a positive cut.
double objective(const GeoGraph& g, const Partition& y, int v, int b);

// value / (n^2 r^{d+1})
double rescaled_estimator(double value, Index n, double r, int d);

}  // namespace geocut
