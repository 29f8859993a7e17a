#pragma once

#include "geocut/common.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace geocut {

struct PointCloud {
    PointMatrix pts;  // n x d, one point per row
    Index n() const { return pts.rows(); }
    int dim() const { return static_cast<int>(pts.cols()); }
};

enum class Shape { Box, Ball };

// Positive density samples on a regular rectilinear grid, evaluated by
// clamped multilinear interpolation.
struct GridDensity {
    std::vector<std::vector<double>> axes;  // strictly increasing per axis
    std::vector<double> values;             // row-major, last axis fastest
    double rho_min = 0.0;
    double rho_max = 0.0;
    double value_at(const RowVec& x) const;
};

/// Bounded domain (axis box or ball) carrying a probability density.
/// Uniform by default; tabulated densities are renormalized at load so the
/// reference quadrature of rho integrates to 1.
class DomainDensity {
public:
    static DomainDensity unit_box(int dim);
    static DomainDensity box(RowVec lo, RowVec hi);
    static DomainDensity ball(RowVec center, double radius);

    DomainDensity with_density(GridDensity g) const;
    static GridDensity density_from_csv(const std::string& path, int dim);

    int dim() const { return static_cast<int>(bbox_lo_.size()); }
    Shape shape() const { return shape_; }
    bool contains(const RowVec& x) const;
    double density(const RowVec& x) const;  // normalized rho
    double density_min() const { return rho_min_ / norm_; }
    double density_max() const { return rho_max_ / norm_; }
    bool uniform_density() const { return !grid_.has_value(); }

    const RowVec& bbox_lo() const { return bbox_lo_; }
    const RowVec& bbox_hi() const { return bbox_hi_; }
    const RowVec& box_lo() const { return bbox_lo_; }  // box shape only
    const RowVec& box_hi() const { return bbox_hi_; }
    const RowVec& center() const { return center_; }
    double radius() const { return radius_; }

    double lebesgue() const;  // |D|
    double inradius() const;
    double diameter() const;
    RowVec corner(int corner_mask) const;  // box corners, bit a set -> hi[a]

    std::string describe() const;

private:
    DomainDensity() = default;
    void normalize();

    Shape shape_ = Shape::Box;
    RowVec bbox_lo_, bbox_hi_;
    RowVec center_;
    double radius_ = 0.0;
    std::optional<GridDensity> grid_;
    double norm_ = 1.0;  // raw density integral
    double rho_min_ = 1.0, rho_max_ = 1.0;
};

// ---- cut sets -------------------------------------------------------------

// {x : x . normal < offset}; on a ball domain this is the spherical-cap family.
struct Halfspace {
    RowVec normal;
    double offset = 0.0;
};
Halfspace axis_halfspace(int axis, double offset, int dim);

// Ball of given radius around a box corner, intersected with the domain.
struct CornerDisc {
    int corner_mask = 0;
    double radius = 0.0;
};

// Union of cells of a cells_per_axis^d grid over the domain bounding box;
// cell ids are row-major, sorted ascending.
struct BoxUnion {
    int cells_per_axis = 0;
    std::vector<std::int64_t> cells;
};

using CutSet = std::variant<Halfspace, CornerDisc, BoxUnion>;

bool in_cut(const DomainDensity& dd, const CutSet& cut, const RowVec& x);
std::string describe(const DomainDensity& dd, const CutSet& cut);

// ---- operations -----------------------------------------------------------

// n i.i.d. points with density rho, by rejection from the bounding box.
// Deterministic for a fixed seed.
PointCloud sample_points(const DomainDensity& dd, Index n, std::uint64_t seed);

// Vol_{nu,v}(A) = integral over A of rho^v.
double region_volume(const DomainDensity& dd, const CutSet& cut, int v);
// Vol_{nu,v}(D).
double domain_volume(const DomainDensity& dd, int v);

// Weighted perimeter: integral of rho^2 over the part of the cut boundary
// interior to D.
double continuum_tv(const DomainDensity& dd, const CutSet& cut);

double balance_nu(const DomainDensity& dd, const CutSet& cut, int v, int b);

struct ContinuumResult {
    double value = 0.0;
    CutSet argmin;
    // Parametric + grid scans bound the infimum from above; callers treat the
    // value as an upper-bound estimate.
    std::string note;
};

ContinuumResult continuum_cheeger(const DomainDensity& dd, int v, int b);
ContinuumResult continuum_mbis(const DomainDensity& dd);

// Discrete minimizer over box-union candidates, used to cross-check the
// parametric scans through an independent face-sum route.
struct GridScanResult {
    double value = 0.0;
    BoxUnion set;
    double cell_diameter = 0.0;
    double surface_bound = 0.0;  // crude bound on candidate boundary areas
};
GridScanResult grid_scan_cheeger(const DomainDensity& dd, int v, int b);
GridScanResult grid_scan_mbis(const DomainDensity& dd);

// nu(A ∩ [lo,hi) ∩ D) and nu([lo,hi) ∩ D); exact for uniform density on a box
// domain with axis-aligned halfspace cuts, midpoint-subsampled otherwise.
double cell_measure(const DomainDensity& dd, const RowVec& lo, const RowVec& hi);
double cell_cut_measure(const DomainDensity& dd, const CutSet& cut, const RowVec& lo,
                        const RowVec& hi);

}  // namespace geocut
