#pragma once

#include "geocut/domain.hpp"
#include "geocut/geograph.hpp"

#include <utility>
#include <vector>

namespace geocut {

struct GammaChoice {
    double value = 0.0;
    bool regime_ok = true;  // n r^d > log n
};

// gamma = clamp(max((8 log n / (n r^d))^{1/(d+2)}, r^{1/(d+5)}), 0.01, 0.5)
GammaChoice choose_gamma(Index n, double r, int d);

/// Granulation of the domain into half-open cubes of side gamma*r, aligned so
/// one cube center sits at the origin. Cubes fully inside D (all corners and
/// the center) are interior; every other cube intersecting D is merged into
/// its nearest interior cube, centers compared with lexicographic tiebreak.
/// The merged boxes partition D, and every cloud point lies in exactly one.
class BoxGrid {
public:
    Index box_count() const { return static_cast<Index>(nu_.size()); }  // |S_n|
    double gamma() const { return gamma_; }
    double r() const { return r_; }
    double side() const { return side_; }
    int dim() const { return dim_; }

    Index box_of_point(Index p) const { return point_box_[static_cast<std::size_t>(p)]; }
    const std::vector<Index>& points_in_box(Index b) const {
        return box_points_[static_cast<std::size_t>(b)];
    }
    double nu(Index b) const { return nu_[static_cast<std::size_t>(b)]; }
    RowVec center(Index b) const;  // z_i
    const RowVec& bbox_lo(Index b) const { return box_lo_[static_cast<std::size_t>(b)]; }
    const RowVec& bbox_hi(Index b) const { return box_hi_[static_cast<std::size_t>(b)]; }

    // diameter bound C*gamma*r recorded at build (C = 3*merge factor + sqrt(d))
    double merge_constant() const { return merge_constant_; }
    double max_box_diameter() const { return max_box_diameter_; }

    // nu(A ∩ Q_i), consistent with the nu(Q_i) normalization
    double nu_in_cut(const DomainDensity& dd, const CutSet& cut, Index b) const;

    // Visits box pairs i <= j whose merged bounding boxes could be closer
    // than max_dist; fn(i, j). Enumerates the interior-cube lattice.
    template <class F>
    void for_each_box_pair_within(double max_dist, F&& fn) const {
        const double reach = max_dist + 2.0 * max_merge_extent_;
        const Index span = static_cast<Index>(std::ceil(reach / side_)) + 1;
        for (Index i = 0; i < box_count(); ++i) {
            // lattice walk around box i, ascending box id
            if (2 * span + 1 >= lattice_extent_span()) {
                for (Index j = i; j < box_count(); ++j) fn(i, j);
                continue;
            }
            walk_lattice(i, span, [&](Index j) {
                if (j >= i) fn(i, j);
            });
        }
    }

    friend BoxGrid build_grid(const DomainDensity& dd, const PointCloud& cloud, double r,
                              double gamma);

private:
    Index lattice_extent_span() const;

    template <class F>
    void walk_lattice(Index i, Index span, F&& fn) const {
        const auto& ci = box_coords_[static_cast<std::size_t>(i)];
        std::vector<long long> off(dim_, -span);
        for (;;) {
            bool ok = true;
            Index flat = 0;
            for (int a = 0; a < dim_; ++a) {
                long long v = ci[a] + off[a];
                if (v < lattice_lo_[a] || v > lattice_hi_[a]) {
                    ok = false;
                    break;
                }
                flat = flat * static_cast<Index>(lattice_hi_[a] - lattice_lo_[a] + 1) +
                       static_cast<Index>(v - lattice_lo_[a]);
            }
            if (ok) {
                Index j = lattice_map_[static_cast<std::size_t>(flat)];
                if (j >= 0) fn(j);
            }
            int a = dim_ - 1;
            while (a >= 0 && ++off[a] > span) off[a--] = -span;
            if (a < 0) break;
        }
    }

    int dim_ = 0;
    double gamma_ = 0.0, r_ = 0.0, side_ = 0.0;
    double merge_constant_ = 0.0, max_box_diameter_ = 0.0, max_merge_extent_ = 0.0;
    double nu_norm_ = 1.0;
    std::vector<long long> lattice_lo_, lattice_hi_;     // interior lattice range per axis
    std::vector<Index> lattice_map_;                     // lattice -> box id (or -1)
    std::vector<std::vector<long long>> box_coords_;     // interior cube lattice coords
    std::vector<double> nu_;
    std::vector<RowVec> box_lo_, box_hi_;                // merged-region bounding boxes
    std::vector<std::vector<std::pair<RowVec, RowVec>>> box_cubes_;  // member cubes, clipped
    std::vector<std::vector<Index>> box_points_;
    std::vector<Index> point_box_;
};

BoxGrid build_grid(const DomainDensity& dd, const PointCloud& cloud, double r, double gamma);

enum class BoxColor : std::uint8_t { Black, White, Grey };

struct BoxColors {
    std::vector<BoxColor> color;
    std::vector<std::uint8_t> unclassifiable;  // grey by fallback, not by threshold
    Index grey_count(bool include_unclassifiable = false) const;
    Index unclassifiable_count() const;
};

// Thresholds: grey iff min(black, white) > gamma n nu; else black iff
// black >= (1-2 gamma) n nu; else white iff white >= (1-2 gamma) n nu;
// else grey with the unclassifiable flag.
BoxColors classify_boxes(const BoxGrid& grid, const Partition& y, Index n);

// exp(-n p H(k/np)) with H(x) = 1 - x + x log x, H(0) = 1; valid as an upper
// bound of the binomial upper tail for k >= np and lower tail for k <= np.
double chernoff_tail(double n, double p, double k);

// (phi_lo, phi_hi) = (phi(maxdist/r), phi(mindist/r)) over the merged-region
// bounding boxes of i and j.
std::pair<double, double> kernel_box_bounds(const BoxGrid& grid, const Kernel& kernel, double r,
                                            Index i, Index j);

// Cut'_{n,phi}(Y): cut with the box-constant lower kernel bound phi_n.
double modified_cut(const BoxGrid& grid, const GeoGraph& g, const Partition& y);
// \bar{Vol}_{n,v}(Y): phi_n between boxes, 0 within a box (v = 2); |Y| for v = 1.
double modified_volume(const BoxGrid& grid, const GeoGraph& g, const Partition& y, int v);
// Z_n: contribution to Cut'(Y) from pairs whose boxes have opposite colors.
double boundary_flux(const BoxGrid& grid, const GeoGraph& g, const Partition& y,
                     const BoxColors& colors);

}  // namespace geocut
