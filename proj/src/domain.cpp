#include "geocut/domain.hpp"

#include "geocut/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace geocut {

namespace {

int quad_res(int d) { return d == 2 ? 512 : 64; }
int scan_quad_res(int d) { return d == 2 ? 192 : 48; }

// 20-node Gauss-Legendre panel.
constexpr int kGN = 10;
const double kGX[kGN] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
const double kGW[kGN] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

template <class F>
double gauss_integrate(F&& f, double a, double b, int panels = 64) {
    if (b <= a) return 0.0;
    StableSum acc;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * h, hw = 0.5 * h;
        for (int i = 0; i < kGN; ++i)
            acc.add(kGW[i] * hw * (f(c - hw * kGX[i]) + f(c + hw * kGX[i])));
    }
    return acc.value();
}

double sphere_area(int d) {  // H^{d-1}(S^{d-1})
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}
double ball_volume(int d) { return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// Lebesgue measure of {x in B(0,R) : x_1 < t}. The angular substitution keeps
// the integrand smooth at the endpoints.
double cap_volume(int d, double R, double t) {
    if (t <= -R) return 0.0;
    if (t >= R) return ball_volume(d) * std::pow(R, d);
    double tau = std::clamp(t / R, -1.0, 1.0);
    double J = gauss_integrate([&](double th) { return std::pow(std::cos(th), d); },
                               -0.5 * M_PI, std::asin(tau), 64);
    return ball_volume(d - 1) * std::pow(R, d) * J;
}

// (d-1)-measure of the cap boundary disc inside the ball.
double cap_section(int d, double R, double t) {
    double q = R * R - t * t;
    if (q <= 0.0) return 0.0;
    return ball_volume(d - 1) * std::pow(q, 0.5 * (d - 1));
}

}  // namespace

// ---- GridDensity ------------------------------------------------------------

double GridDensity::value_at(const RowVec& x) const {
    const int d = static_cast<int>(axes.size());
    Index lo[8];
    double w[8];
    for (int a = 0; a < d; ++a) {
        const auto& ax = axes[a];
        double xa = std::clamp(x[a], ax.front(), ax.back());
        auto it = std::upper_bound(ax.begin(), ax.end(), xa);
        Index hi = std::clamp<Index>(it - ax.begin(), 1, static_cast<Index>(ax.size()) - 1);
        lo[a] = hi - 1;
        w[a] = (xa - ax[lo[a]]) / (ax[hi] - ax[lo[a]]);
    }
    double out = 0.0;
    for (int mask = 0; mask < (1 << d); ++mask) {
        double ww = 1.0;
        Index idx = 0;
        for (int a = 0; a < d; ++a) {
            bool up = (mask >> a) & 1;
            ww *= up ? w[a] : 1.0 - w[a];
            idx = idx * static_cast<Index>(axes[a].size()) + lo[a] + (up ? 1 : 0);
        }
        out += ww * values[static_cast<std::size_t>(idx)];
    }
    return std::clamp(out, rho_min, rho_max);
}

// ---- DomainDensity ----------------------------------------------------------

DomainDensity DomainDensity::unit_box(int dim) {
    return box(RowVec::Zero(dim), RowVec::Ones(dim));
}

DomainDensity DomainDensity::box(RowVec lo, RowVec hi) {
    if (lo.size() != hi.size() || lo.size() < 1)
        throw std::invalid_argument("box bounds must have equal positive dimension");
    for (Index a = 0; a < lo.size(); ++a)
        if (!(lo[a] < hi[a])) throw std::invalid_argument("box must have positive extent");
    DomainDensity dd;
    dd.shape_ = Shape::Box;
    dd.bbox_lo_ = std::move(lo);
    dd.bbox_hi_ = std::move(hi);
    dd.center_ = 0.5 * (dd.bbox_lo_ + dd.bbox_hi_);
    dd.normalize();
    return dd;
}

DomainDensity DomainDensity::ball(RowVec center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    DomainDensity dd;
    dd.shape_ = Shape::Ball;
    dd.center_ = std::move(center);
    dd.radius_ = radius;
    dd.bbox_lo_ = dd.center_.array() - radius;
    dd.bbox_hi_ = dd.center_.array() + radius;
    dd.normalize();
    return dd;
}

double DomainDensity::lebesgue() const {
    if (shape_ == Shape::Box) return (bbox_hi_ - bbox_lo_).prod();
    return ball_volume(dim()) * std::pow(radius_, dim());
}

double DomainDensity::inradius() const {
    if (shape_ == Shape::Box) return 0.5 * (bbox_hi_ - bbox_lo_).minCoeff();
    return radius_;
}

double DomainDensity::diameter() const {
    if (shape_ == Shape::Box) return (bbox_hi_ - bbox_lo_).norm();
    return 2.0 * radius_;
}

RowVec DomainDensity::corner(int corner_mask) const {
    if (shape_ != Shape::Box)
        throw unsupported_domain_error("corners exist for box domains only");
    RowVec c(dim());
    for (int a = 0; a < dim(); ++a)
        c[a] = ((corner_mask >> a) & 1) ? bbox_hi_[a] : bbox_lo_[a];
    return c;
}

bool DomainDensity::contains(const RowVec& x) const {
    if (shape_ == Shape::Box) {
        for (Index a = 0; a < x.size(); ++a)
            if (!(x[a] > bbox_lo_[a] && x[a] < bbox_hi_[a])) return false;
        return true;
    }
    return (x - center_).squaredNorm() < radius_ * radius_;
}

double DomainDensity::density(const RowVec& x) const {
    if (!grid_) return 1.0 / norm_;
    return grid_->value_at(x) / norm_;
}

void DomainDensity::normalize() {
    if (!grid_) {
        norm_ = lebesgue();
        rho_min_ = rho_max_ = 1.0;
        return;
    }
    rho_min_ = grid_->rho_min;
    rho_max_ = grid_->rho_max;
    const int d = dim();
    const int res = quad_res(d);
    RowVec side = (bbox_hi_ - bbox_lo_) / res;
    const double cellvol = side.prod();
    StableSum acc;
    std::vector<int> idx(d, 0);
    RowVec x(d);
    for (;;) {
        for (int a = 0; a < d; ++a) x[a] = bbox_lo_[a] + (idx[a] + 0.5) * side[a];
        if (contains(x)) acc.add(grid_->value_at(x) * cellvol);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == res) idx[a--] = 0;
        if (a < 0) break;
    }
    norm_ = acc.value();
    if (!(norm_ > 0.0)) throw std::invalid_argument("density integrates to zero on the domain");
}

DomainDensity DomainDensity::with_density(GridDensity g) const {
    if (static_cast<int>(g.axes.size()) != dim())
        throw std::invalid_argument("density grid dimension mismatch");
    if (!(g.rho_min > 0.0) || !(g.rho_max >= g.rho_min))
        throw std::invalid_argument("density bounds must satisfy 0 < rho_min <= rho_max");
    std::size_t expect = 1;
    for (auto& ax : g.axes) {
        if (ax.size() < 2) throw std::invalid_argument("density grid needs >= 2 nodes per axis");
        expect *= ax.size();
    }
    if (g.values.size() != expect) throw std::invalid_argument("density grid value count mismatch");
    for (double v : g.values)
        if (!(v > 0.0)) throw std::invalid_argument("density must be positive");
    DomainDensity dd = *this;
    dd.grid_ = std::move(g);
    dd.normalize();
    return dd;
}

GridDensity DomainDensity::density_from_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw error("cannot open density file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw error("empty density file: " + path);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (static_cast<int>(row.size()) != dim + 1)
            throw error("density row needs dim+1 columns: " + line);
        rows.push_back(std::move(row));
    }
    GridDensity g;
    g.axes.resize(dim);
    for (int a = 0; a < dim; ++a) {
        std::vector<double> c;
        for (auto& r : rows) c.push_back(r[a]);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        g.axes[a] = std::move(c);
    }
    std::size_t total = 1;
    for (auto& ax : g.axes) total *= ax.size();
    if (rows.size() != total) throw error("density rows do not form a full regular grid");
    g.values.assign(total, -1.0);
    for (auto& r : rows) {
        Index idx = 0;
        for (int a = 0; a < dim; ++a) {
            auto& ax = g.axes[a];
            auto it = std::lower_bound(ax.begin(), ax.end(), r[a]);
            idx = idx * static_cast<Index>(ax.size()) + (it - ax.begin());
        }
        g.values[static_cast<std::size_t>(idx)] = r[dim];
    }
    g.rho_min = *std::min_element(g.values.begin(), g.values.end());
    g.rho_max = *std::max_element(g.values.begin(), g.values.end());
    if (!(g.rho_min > 0.0)) throw error("density file must be positive everywhere");
    return g;
}

std::string DomainDensity::describe() const {
    std::ostringstream ss;
    ss << (shape_ == Shape::Box ? "box" : "ball") << " d=" << dim()
       << (uniform_density() ? " uniform" : " tabulated");
    return ss.str();
}

// ---- cut sets ---------------------------------------------------------------

Halfspace axis_halfspace(int axis, double offset, int dim) {
    Halfspace h;
    h.normal = RowVec::Zero(dim);
    h.normal[axis] = 1.0;
    h.offset = offset;
    return h;
}

namespace {

// axis index if the normal is +/- one coordinate direction, else -1
int axis_of(const Halfspace& h, double* sign) {
    int axis = -1;
    for (Index a = 0; a < h.normal.size(); ++a) {
        if (h.normal[a] != 0.0) {
            if (axis >= 0) return -1;
            axis = static_cast<int>(a);
        }
    }
    if (axis < 0) return -1;
    if (std::abs(std::abs(h.normal[axis]) - 1.0) > 1e-14) return -1;
    *sign = h.normal[axis];
    return axis;
}

Index cell_of(const DomainDensity& dd, const BoxUnion& bu, const RowVec& x) {
    Index idx = 0;
    for (int a = 0; a < dd.dim(); ++a) {
        double w = (dd.bbox_hi()[a] - dd.bbox_lo()[a]) / bu.cells_per_axis;
        Index i = static_cast<Index>(std::floor((x[a] - dd.bbox_lo()[a]) / w));
        i = std::clamp<Index>(i, 0, bu.cells_per_axis - 1);
        idx = idx * bu.cells_per_axis + i;
    }
    return idx;
}

}  // namespace

bool in_cut(const DomainDensity& dd, const CutSet& cut, const RowVec& x) {
    if (const auto* h = std::get_if<Halfspace>(&cut)) return x.dot(h->normal) < h->offset;
    if (const auto* c = std::get_if<CornerDisc>(&cut))
        return (x - dd.corner(c->corner_mask)).norm() < c->radius;
    const auto& bu = std::get<BoxUnion>(cut);
    return std::binary_search(bu.cells.begin(), bu.cells.end(), cell_of(dd, bu, x));
}

std::string describe(const DomainDensity& dd, const CutSet& cut) {
    std::ostringstream ss;
    if (const auto* h = std::get_if<Halfspace>(&cut)) {
        double sign = 0.0;
        int axis = axis_of(*h, &sign);
        if (axis >= 0)
            ss << "halfspace axis=" << axis << " offset=" << sign * h->offset
               << (sign > 0 ? " (lower side)" : " (upper side)");
        else
            ss << "halfspace offset=" << h->offset;
    } else if (const auto* c = std::get_if<CornerDisc>(&cut)) {
        ss << "corner-disc corner=" << c->corner_mask << " radius=" << c->radius;
    } else {
        const auto& bu = std::get<BoxUnion>(cut);
        ss << "box-union res=" << bu.cells_per_axis << " cells=" << bu.cells.size();
    }
    (void)dd;
    return ss.str();
}

// ---- sampling ---------------------------------------------------------------

PointCloud sample_points(const DomainDensity& dd, Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_points needs n >= 1");
    const int d = dd.dim();
    auto rng = make_rng(seed);
    PointCloud cloud;
    cloud.pts.resize(n, d);
    RowVec x(d);
    const bool uniform = dd.uniform_density();
    const double rho_max = dd.density_max();
    for (Index i = 0; i < n; ++i) {
        for (;;) {
            for (int a = 0; a < d; ++a) x[a] = uniform_in(rng, dd.bbox_lo()[a], dd.bbox_hi()[a]);
            if (!dd.contains(x)) continue;
            if (uniform) break;
            if (uniform01(rng) * rho_max <= dd.density(x)) break;
        }
        cloud.pts.row(i) = x;
    }
    return cloud;
}

// ---- measures ---------------------------------------------------------------

namespace {

bool axis_clip(const Halfspace& h, RowVec& lo, RowVec& hi) {
    double sign = 0.0;
    int axis = axis_of(h, &sign);
    if (axis < 0) return false;
    if (sign > 0)
        hi[axis] = std::min(hi[axis], h.offset);
    else
        lo[axis] = std::max(lo[axis], -h.offset);
    return true;
}

double clipped_box_volume(const RowVec& lo, const RowVec& hi) {
    double v = 1.0;
    for (Index a = 0; a < lo.size(); ++a) v *= std::max(hi[a] - lo[a], 0.0);
    return v;
}

// midpoint quadrature of rho^v over [lo,hi] ∩ D ∩ A (A optional)
double midpoint_measure(const DomainDensity& dd, const CutSet* cut, const RowVec& lo,
                        const RowVec& hi, int v, int res) {
    const int d = dd.dim();
    RowVec side = (hi - lo) / res;
    const double cellvol = side.prod();
    StableSum acc;
    std::vector<int> idx(d, 0);
    RowVec x(d);
    for (;;) {
        for (int a = 0; a < d; ++a) x[a] = lo[a] + (idx[a] + 0.5) * side[a];
        if (dd.contains(x) && (!cut || in_cut(dd, *cut, x)))
            acc.add(std::pow(dd.density(x), v) * cellvol);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == res) idx[a--] = 0;
        if (a < 0) break;
    }
    return acc.value();
}

}  // namespace

double domain_volume(const DomainDensity& dd, int v) {
    if (v == 1) return 1.0;
    if (dd.uniform_density()) {
        double rho = 1.0 / dd.lebesgue();
        return std::pow(rho, v) * dd.lebesgue();
    }
    return midpoint_measure(dd, nullptr, dd.bbox_lo(), dd.bbox_hi(), v, quad_res(dd.dim()));
}

double region_volume(const DomainDensity& dd, const CutSet& cut, int v) {
    if (v != 1 && v != 2) throw std::invalid_argument("v must be 1 or 2");
    const int d = dd.dim();
    if (dd.uniform_density()) {
        const double rho = 1.0 / dd.lebesgue();
        if (const auto* h = std::get_if<Halfspace>(&cut)) {
            if (dd.shape() == Shape::Box) {
                RowVec lo = dd.box_lo(), hi = dd.box_hi();
                if (axis_clip(*h, lo, hi)) return std::pow(rho, v) * clipped_box_volume(lo, hi);
            } else {
                double nn = h->normal.norm();
                double t = (h->offset - dd.center().dot(h->normal)) / nn;
                return std::pow(rho, v) * cap_volume(d, dd.radius(), t);
            }
        } else if (const auto* c = std::get_if<CornerDisc>(&cut)) {
            if (dd.shape() == Shape::Box && c->radius <= (dd.box_hi() - dd.box_lo()).minCoeff())
                return std::pow(rho, v) * ball_volume(d) * std::pow(c->radius, d) /
                       std::pow(2.0, d);
        } else {
            const auto& bu = std::get<BoxUnion>(cut);
            RowVec side = (dd.bbox_hi() - dd.bbox_lo()) / bu.cells_per_axis;
            StableSum acc;
            RowVec lo(d), hi(d);
            for (auto cidx : bu.cells) {
                Index rem = cidx;
                for (int a = d - 1; a >= 0; --a) {
                    Index ia = rem % bu.cells_per_axis;
                    rem /= bu.cells_per_axis;
                    lo[a] = dd.bbox_lo()[a] + ia * side[a];
                    hi[a] = lo[a] + side[a];
                }
                if (dd.shape() == Shape::Box)
                    acc.add(std::pow(rho, v) * clipped_box_volume(lo, hi));
                else
                    acc.add(v == 1 ? midpoint_measure(dd, nullptr, lo, hi, 1, 8)
                                   : midpoint_measure(dd, nullptr, lo, hi, 2, 8));
            }
            return acc.value();
        }
    }
    return midpoint_measure(dd, &cut, dd.bbox_lo(), dd.bbox_hi(), v, scan_quad_res(d));
}

double continuum_tv(const DomainDensity& dd, const CutSet& cut) {
    const int d = dd.dim();
    if (const auto* h = std::get_if<Halfspace>(&cut)) {
        double sign = 0.0;
        int axis = axis_of(*h, &sign);
        if (dd.shape() == Shape::Box && axis >= 0) {
            double t = sign * h->offset;  // cut plane x_axis = t
            if (t <= dd.box_lo()[axis] || t >= dd.box_hi()[axis]) return 0.0;
            if (dd.uniform_density()) {
                double rho = 1.0 / dd.lebesgue();
                double area = 1.0;
                for (int a = 0; a < d; ++a)
                    if (a != axis) area *= dd.box_hi()[a] - dd.box_lo()[a];
                return rho * rho * area;
            }
            // rho^2 over the cross-section by midpoint quadrature
            const int res = quad_res(d);
            std::vector<int> other;
            for (int a = 0; a < d; ++a)
                if (a != axis) other.push_back(a);
            RowVec side = RowVec::Zero(d);
            double cellvol = 1.0;
            for (int a : other) {
                side[a] = (dd.box_hi()[a] - dd.box_lo()[a]) / res;
                cellvol *= side[a];
            }
            std::vector<int> idx(other.size(), 0);
            RowVec x(d);
            x[axis] = t;
            StableSum acc;
            for (;;) {
                for (std::size_t q = 0; q < other.size(); ++q)
                    x[other[q]] = dd.box_lo()[other[q]] + (idx[q] + 0.5) * side[other[q]];
                if (dd.contains(x)) {
                    double r = dd.density(x);
                    acc.add(r * r * cellvol);
                }
                int q = static_cast<int>(other.size()) - 1;
                while (q >= 0 && ++idx[q] == res) idx[q--] = 0;
                if (q < 0) break;
            }
            return acc.value();
        }
        if (dd.shape() == Shape::Ball) {
            if (!dd.uniform_density())
                throw unsupported_domain_error("tabulated density on a ball: TV unsupported");
            double rho = 1.0 / dd.lebesgue();
            double nn = h->normal.norm();
            double t = (h->offset - dd.center().dot(h->normal)) / nn;
            return rho * rho * cap_section(d, dd.radius(), t);
        }
        throw unsupported_domain_error("halfspace TV needs an axis-aligned normal on boxes");
    }
    if (const auto* c = std::get_if<CornerDisc>(&cut)) {
        if (dd.shape() != Shape::Box)
            throw unsupported_domain_error("corner discs exist on box domains only");
        if (c->radius > (dd.box_hi() - dd.box_lo()).minCoeff())
            throw unsupported_domain_error("corner disc radius exceeds the box side");
        if (dd.uniform_density()) {
            double rho = 1.0 / dd.lebesgue();
            return rho * rho * sphere_area(d) * std::pow(c->radius, d - 1) / std::pow(2.0, d);
        }
        if (d == 2) {
            RowVec corner = dd.corner(c->corner_mask);
            double sx = ((c->corner_mask >> 0) & 1) ? -1.0 : 1.0;
            double sy = ((c->corner_mask >> 1) & 1) ? -1.0 : 1.0;
            return gauss_integrate(
                [&](double th) {
                    RowVec x(2);
                    x[0] = corner[0] + sx * c->radius * std::cos(th);
                    x[1] = corner[1] + sy * c->radius * std::sin(th);
                    double r = dd.density(x);
                    return r * r * c->radius;
                },
                0.0, 0.5 * M_PI, 64);
        }
        throw unsupported_domain_error("corner-disc TV with tabulated density needs d = 2");
    }
    // box-union: interior face sums, rho^2 at face centers
    const auto& bu = std::get<BoxUnion>(cut);
    RowVec side = (dd.bbox_hi() - dd.bbox_lo()) / bu.cells_per_axis;
    StableSum acc;
    RowVec fc(d);
    std::vector<Index> ia(d);
    for (auto cidx : bu.cells) {
        Index rem = cidx;
        for (int a = d - 1; a >= 0; --a) {
            ia[a] = rem % bu.cells_per_axis;
            rem /= bu.cells_per_axis;
        }
        for (int a = 0; a < d; ++a) {
            double face_area = 1.0;
            for (int q = 0; q < d; ++q)
                if (q != a) face_area *= side[q];
            for (int dir = -1; dir <= 1; dir += 2) {
                Index na = ia[a] + dir;
                bool nb_in = false;
                if (na >= 0 && na < bu.cells_per_axis) {
                    Index nidx = 0;
                    for (int q = 0; q < d; ++q)
                        nidx = nidx * bu.cells_per_axis + (q == a ? na : ia[q]);
                    nb_in = std::binary_search(bu.cells.begin(), bu.cells.end(), nidx);
                }
                if (nb_in) continue;
                for (int q = 0; q < d; ++q) fc[q] = dd.bbox_lo()[q] + (ia[q] + 0.5) * side[q];
                fc[a] = dd.bbox_lo()[a] + (ia[a] + (dir > 0 ? 1.0 : 0.0)) * side[a];
                if (dd.contains(fc)) {
                    double r = dd.density(fc);
                    acc.add(r * r * face_area);
                }
            }
        }
    }
    return acc.value();
}

double balance_nu(const DomainDensity& dd, const CutSet& cut, int v, int b) {
    double total = domain_volume(dd, v);
    double inside = region_volume(dd, cut, v);
    double outside = total - inside;
    if (b == 1) return std::min(inside, outside) / total;
    if (b == 2) return inside * outside / (total * total);
    throw std::invalid_argument("b must be 1 or 2");
}

// ---- parametric scans -------------------------------------------------------

namespace {

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    std::optional<CutSet> cut;
};

void consider(Candidate& best, double value, CutSet cut) {
    if (value < best.value) {
        best.value = value;
        best.cut = std::move(cut);
    }
}

template <class F>
double golden_refine(F&& f, double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 200 && b - a > 1e-12; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

void check_supported(const DomainDensity& dd) {
    if (!dd.uniform_density() && !(dd.shape() == Shape::Box && dd.dim() == 2))
        throw unsupported_domain_error(
            "continuum functionals support uniform densities, or tabulated densities on "
            "2-d boxes");
}

double che_value(const DomainDensity& dd, const CutSet& cut, int v, int b) {
    double bal = balance_nu(dd, cut, v, b);
    if (!(bal > 0.0)) return std::numeric_limits<double>::infinity();
    double val = continuum_tv(dd, cut) / bal;
    return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
}

template <class MakeCut>
void scan_family(const DomainDensity& dd, int v, int b, double lo, double hi, MakeCut&& make,
                 Candidate& best) {
    const int steps = dd.uniform_density() ? 10000 : 256;
    const double h = (hi - lo) / steps;
    double best_t = lo + h;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 1; i < steps; ++i) {
        double t = lo + i * h;
        double val = che_value(dd, make(t), v, b);
        if (val < best_v) {
            best_v = val;
            best_t = t;
        }
    }
    if (!std::isfinite(best_v)) return;
    double t = golden_refine([&](double s) { return che_value(dd, make(s), v, b); },
                             std::max(lo + 1e-12, best_t - h), std::min(hi - 1e-12, best_t + h));
    CutSet cut = make(t);
    consider(best, che_value(dd, cut, v, b), cut);
}

// offset with region mass = 1/2, by bisection (mass monotone in the offset)
template <class MakeCut>
bool bisect_mass(const DomainDensity& dd, double lo, double hi, MakeCut&& make, double* out) {
    auto mass = [&](double t) { return region_volume(dd, make(t), 1); };
    if ((mass(lo) - 0.5) * (mass(hi) - 0.5) > 0.0) return false;
    for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mass(mid) < 0.5)
            lo = mid;
        else
            hi = mid;
    }
    *out = 0.5 * (lo + hi);
    return std::abs(mass(*out) - 0.5) <= 1e-8;
}

// ---- grid oracle ------------------------------------------------------------

struct GridModel {
    int res = 0;
    int d = 0;
    RowVec side;
    std::vector<double> m1, m2;  // per-cell integral of rho^v
    const DomainDensity* dd = nullptr;

    Index cell_count() const {
        Index c = 1;
        for (int a = 0; a < d; ++a) c *= res;
        return c;
    }
    double mass(Index idx, int v) const { return v == 1 ? m1[idx] : m2[idx]; }
};

GridModel build_grid_model(const DomainDensity& dd) {
    GridModel gm;
    gm.d = dd.dim();
    gm.res = gm.d == 2 ? 256 : 64;
    gm.dd = &dd;
    gm.side = (dd.bbox_hi() - dd.bbox_lo()) / gm.res;
    const Index total = gm.cell_count();
    gm.m1.resize(total);
    gm.m2.resize(total);
    const double cellvol = gm.side.prod();
    RowVec lo(gm.d), hi(gm.d), mid(gm.d);
    for (Index c = 0; c < total; ++c) {
        Index rem = c;
        for (int a = gm.d - 1; a >= 0; --a) {
            Index ia = rem % gm.res;
            rem /= gm.res;
            lo[a] = dd.bbox_lo()[a] + ia * gm.side[a];
            hi[a] = lo[a] + gm.side[a];
        }
        if (dd.shape() == Shape::Box && dd.uniform_density()) {
            double rho = 1.0 / dd.lebesgue();
            gm.m1[c] = rho * cellvol;
            gm.m2[c] = rho * rho * cellvol;
        } else if (dd.shape() == Shape::Ball && dd.uniform_density()) {
            mid = 0.5 * (lo + hi);
            double half_diag = 0.5 * (hi - lo).norm();
            double cd = (mid - dd.center()).norm();
            double rho = 1.0 / dd.lebesgue();
            if (cd + half_diag < dd.radius()) {
                gm.m1[c] = rho * cellvol;
                gm.m2[c] = rho * rho * cellvol;
            } else if (cd - half_diag > dd.radius()) {
                gm.m1[c] = gm.m2[c] = 0.0;
            } else {
                gm.m1[c] = midpoint_measure(dd, nullptr, lo, hi, 1, 8);
                gm.m2[c] = midpoint_measure(dd, nullptr, lo, hi, 2, 8);
            }
        } else {
            gm.m1[c] = midpoint_measure(dd, nullptr, lo, hi, 1, 4);
            gm.m2[c] = midpoint_measure(dd, nullptr, lo, hi, 2, 4);
        }
    }
    return gm;
}

// face-sum TV of a membership mask over the grid cells
double grid_tv(const GridModel& gm, const std::vector<char>& in_set) {
    const auto& dd = *gm.dd;
    StableSum acc;
    RowVec fc(gm.d);
    std::vector<Index> ia(gm.d);
    for (Index c = 0; c < gm.cell_count(); ++c) {
        if (!in_set[c]) continue;
        Index rem = c;
        for (int a = gm.d - 1; a >= 0; --a) {
            ia[a] = rem % gm.res;
            rem /= gm.res;
        }
        Index stride = 1;
        for (int a = gm.d - 1; a >= 0; --a) {
            double face_area = 1.0;
            for (int q = 0; q < gm.d; ++q)
                if (q != a) face_area *= gm.side[q];
            for (int dir = -1; dir <= 1; dir += 2) {
                Index na = ia[a] + dir;
                bool nb_in = na >= 0 && na < gm.res && in_set[c + dir * stride];
                if (nb_in) continue;
                for (int q = 0; q < gm.d; ++q)
                    fc[q] = dd.bbox_lo()[q] + (ia[q] + 0.5) * gm.side[q];
                fc[a] = dd.bbox_lo()[a] + (ia[a] + (dir > 0 ? 1.0 : 0.0)) * gm.side[a];
                if (dd.contains(fc)) {
                    double r = dd.density(fc);
                    acc.add(r * r * face_area);
                }
            }
            stride *= gm.res;
        }
    }
    return acc.value();
}

// rho^2-weighted face sum across the plane between slabs t-1 and t of an axis
double plane_tv(const GridModel& gm, int axis, int t) {
    const auto& dd = *gm.dd;
    Index stride = 1;
    for (int q = gm.d - 1; q > axis; --q) stride *= gm.res;
    double face_area = 1.0;
    for (int q = 0; q < gm.d; ++q)
        if (q != axis) face_area *= gm.side[q];
    StableSum acc;
    RowVec fc(gm.d);
    std::vector<Index> ia(gm.d);
    for (Index c = 0; c < gm.cell_count(); ++c) {
        Index rem = c;
        for (int a = gm.d - 1; a >= 0; --a) {
            ia[a] = rem % gm.res;
            rem /= gm.res;
        }
        if (ia[axis] != t - 1) continue;
        for (int q = 0; q < gm.d; ++q) fc[q] = dd.bbox_lo()[q] + (ia[q] + 0.5) * gm.side[q];
        fc[axis] = dd.bbox_lo()[axis] + t * gm.side[axis];
        if (dd.contains(fc)) {
            double r = dd.density(fc);
            acc.add(r * r * face_area);
        }
    }
    return acc.value();
}

struct GridCandidate {
    double value = std::numeric_limits<double>::infinity();
    std::vector<char> in_set;
};

void grid_consider(GridCandidate& best, double value, std::vector<char> in_set) {
    if (value < best.value) {
        best.value = value;
        best.in_set = std::move(in_set);
    } else if (value == best.value && !best.in_set.empty()) {
        for (std::size_t i = 0; i < in_set.size(); ++i) {
            if (in_set[i] != best.in_set[i]) {
                if (in_set[i]) best.in_set = std::move(in_set);
                break;
            }
        }
    }
}

// Candidate family: grid-aligned axis prefixes and corner balls. The callback
// receives (mass1, mass2, tv, materialize) with lazy set materialization.
template <class CB>
void grid_candidates(const GridModel& gm, CB&& cb) {
    const auto& dd = *gm.dd;
    const Index total = gm.cell_count();
    for (int axis = 0; axis < gm.d; ++axis) {
        Index stride = 1;
        for (int q = gm.d - 1; q > axis; --q) stride *= gm.res;
        std::vector<double> slab1(gm.res, 0.0), slab2(gm.res, 0.0);
        for (Index c = 0; c < total; ++c) {
            Index ia = (c / stride) % gm.res;
            slab1[ia] += gm.m1[c];
            slab2[ia] += gm.m2[c];
        }
        double mass1 = 0.0, mass2 = 0.0;
        for (int t = 1; t < gm.res; ++t) {
            mass1 += slab1[t - 1];
            mass2 += slab2[t - 1];
            double tv = plane_tv(gm, axis, t);
            auto materialize = [&gm, axis, t, stride, total]() {
                std::vector<char> s(total, 0);
                for (Index c = 0; c < total; ++c)
                    if ((c / stride) % gm.res < static_cast<Index>(t)) s[c] = 1;
                return s;
            };
            cb(mass1, mass2, tv, materialize);
        }
    }
    if (dd.shape() == Shape::Box) {
        double rmax = (dd.box_hi() - dd.box_lo()).minCoeff();
        const int steps = gm.res / 2;
        std::vector<double> dist(total);
        RowVec mid(gm.d);
        for (int corner = 0; corner < (1 << gm.d); ++corner) {
            RowVec cpt = dd.corner(corner);
            for (Index c = 0; c < total; ++c) {
                Index rem = c;
                for (int a = gm.d - 1; a >= 0; --a) {
                    Index ia = rem % gm.res;
                    rem /= gm.res;
                    mid[a] = dd.bbox_lo()[a] + (ia + 0.5) * gm.side[a];
                }
                dist[c] = (mid - cpt).norm();
            }
            for (int j = 1; j <= steps; ++j) {
                double rad = rmax * j / steps;
                std::vector<char> in_set(total, 0);
                double mass1 = 0.0, mass2 = 0.0;
                for (Index c = 0; c < total; ++c)
                    if (dist[c] < rad) {
                        in_set[c] = 1;
                        mass1 += gm.m1[c];
                        mass2 += gm.m2[c];
                    }
                double tv = grid_tv(gm, in_set);
                auto materialize = [&in_set]() { return in_set; };
                cb(mass1, mass2, tv, materialize);
            }
        }
    }
}

BoxUnion to_box_union(const GridModel& gm, const std::vector<char>& in_set) {
    BoxUnion bu;
    bu.cells_per_axis = gm.res;
    for (Index c = 0; c < gm.cell_count(); ++c)
        if (in_set[c]) bu.cells.push_back(c);
    return bu;
}

double grid_surface_bound(const DomainDensity& dd) {
    if (dd.shape() == Shape::Box) {
        double s = 0.0;
        for (int a = 0; a < dd.dim(); ++a) {
            double face = 1.0;
            for (int q = 0; q < dd.dim(); ++q)
                if (q != a) face *= dd.box_hi()[q] - dd.box_lo()[q];
            s += 2.0 * face;
        }
        return s;
    }
    return sphere_area(dd.dim()) * std::pow(dd.radius(), dd.dim() - 1);
}

}  // namespace

GridScanResult grid_scan_cheeger(const DomainDensity& dd, int v, int b) {
    check_supported(dd);
    GridModel gm = build_grid_model(dd);
    double total = 0.0;
    for (Index c = 0; c < gm.cell_count(); ++c) total += gm.mass(c, v);
    GridCandidate best;
    grid_candidates(gm, [&](double mass1, double mass2, double tv, auto&& materialize) {
        double m = v == 1 ? mass1 : mass2;
        double bal = b == 1 ? std::min(m, total - m) / total : m * (total - m) / (total * total);
        if (!(bal > 0.0)) return;
        double val = tv / bal;
        if (val <= best.value) grid_consider(best, val, materialize());
    });
    GridScanResult out;
    out.value = best.value;
    out.set = to_box_union(gm, best.in_set);
    out.cell_diameter = gm.side.norm();
    out.surface_bound = grid_surface_bound(dd);
    return out;
}

GridScanResult grid_scan_mbis(const DomainDensity& dd) {
    check_supported(dd);
    GridModel gm = build_grid_model(dd);
    // feasibility band: half of the largest slab mass over all axes
    double max_slab = 0.0;
    for (int axis = 0; axis < gm.d; ++axis) {
        Index stride = 1;
        for (int q = gm.d - 1; q > axis; --q) stride *= gm.res;
        std::vector<double> slab(gm.res, 0.0);
        for (Index c = 0; c < gm.cell_count(); ++c) slab[(c / stride) % gm.res] += gm.m1[c];
        max_slab = std::max(max_slab, *std::max_element(slab.begin(), slab.end()));
    }
    const double band = 0.5 * max_slab + 1e-12;
    GridCandidate best;
    grid_candidates(gm, [&](double mass1, double, double tv, auto&& materialize) {
        if (std::abs(mass1 - 0.5) > band) return;
        if (tv <= best.value) grid_consider(best, tv, materialize());
    });
    if (best.in_set.empty()) throw unsupported_domain_error("grid scan found no near-bisections");
    GridScanResult out;
    out.value = best.value;
    out.set = to_box_union(gm, best.in_set);
    out.cell_diameter = gm.side.norm();
    out.surface_bound = grid_surface_bound(dd);
    return out;
}

// ---- continuum optimizers ---------------------------------------------------

ContinuumResult continuum_cheeger(const DomainDensity& dd, int v, int b) {
    if ((v != 1 && v != 2) || (b != 1 && b != 2))
        throw std::invalid_argument("v and b must be 1 or 2");
    check_supported(dd);
    const int d = dd.dim();
    Candidate best;
    if (dd.shape() == Shape::Box) {
        for (int axis = 0; axis < d; ++axis)
            scan_family(
                dd, v, b, dd.box_lo()[axis], dd.box_hi()[axis],
                [&](double t) { return CutSet(axis_halfspace(axis, t, d)); }, best);
        double rmax = (dd.box_hi() - dd.box_lo()).minCoeff();
        for (int corner = 0; corner < (1 << d); ++corner)
            scan_family(
                dd, v, b, 0.0, rmax, [&](double t) { return CutSet(CornerDisc{corner, t}); },
                best);
    } else {
        for (int axis = 0; axis < d; ++axis)
            scan_family(
                dd, v, b, dd.center()[axis] - dd.radius(), dd.center()[axis] + dd.radius(),
                [&](double t) { return CutSet(axis_halfspace(axis, t, d)); }, best);
    }
    GridScanResult grid = grid_scan_cheeger(dd, v, b);
    ContinuumResult out;
    out.note = "upper-bound estimate (parametric families + grid scan)";
    // the grid value carries O(1/res) discretization error; take its set only
    // when it is better beyond numerical noise
    if (grid.value < best.value * (1.0 - 1e-9)) {
        out.value = grid.value;
        out.argmin = CutSet(grid.set);
    } else {
        out.value = best.value;
        out.argmin = *best.cut;
    }
    return out;
}

ContinuumResult continuum_mbis(const DomainDensity& dd) {
    check_supported(dd);
    const int d = dd.dim();
    Candidate best;
    if (dd.shape() == Shape::Box) {
        for (int axis = 0; axis < d; ++axis) {
            double t = 0.0;
            if (bisect_mass(
                    dd, dd.box_lo()[axis], dd.box_hi()[axis],
                    [&](double s) { return CutSet(axis_halfspace(axis, s, d)); }, &t)) {
                CutSet cut = axis_halfspace(axis, t, d);
                consider(best, continuum_tv(dd, cut), cut);
            }
        }
        double rmax = (dd.box_hi() - dd.box_lo()).minCoeff();
        for (int corner = 0; corner < (1 << d); ++corner) {
            double t = 0.0;
            if (bisect_mass(
                    dd, 1e-9, rmax, [&](double s) { return CutSet(CornerDisc{corner, s}); },
                    &t)) {
                CutSet cut = CornerDisc{corner, t};
                consider(best, continuum_tv(dd, cut), cut);
            }
        }
    } else {
        for (int axis = 0; axis < d; ++axis) {
            double t = 0.0;
            if (bisect_mass(
                    dd, dd.center()[axis] - dd.radius(), dd.center()[axis] + dd.radius(),
                    [&](double s) { return CutSet(axis_halfspace(axis, s, d)); }, &t)) {
                CutSet cut = axis_halfspace(axis, t, d);
                consider(best, continuum_tv(dd, cut), cut);
            }
        }
    }
    if (!best.cut) throw unsupported_domain_error("no feasible parametric bisection found");
    GridScanResult grid = grid_scan_mbis(dd);
    ContinuumResult out;
    out.note = "upper-bound estimate; constraint solved to 1e-8 on the parametric families";
    if (grid.value < best.value * (1.0 - 1e-9)) {
        out.value = grid.value;
        out.argmin = CutSet(grid.set);
    } else {
        out.value = best.value;
        out.argmin = *best.cut;
    }
    return out;
}

// ---- cell measures (granulation support) -------------------------------------

double cell_measure(const DomainDensity& dd, const RowVec& lo, const RowVec& hi) {
    if (dd.shape() == Shape::Box && dd.uniform_density()) {
        RowVec clo = lo.cwiseMax(dd.box_lo()), chi = hi.cwiseMin(dd.box_hi());
        return clipped_box_volume(clo, chi) / dd.lebesgue();
    }
    return midpoint_measure(dd, nullptr, lo, hi, 1, 8);
}

double cell_cut_measure(const DomainDensity& dd, const CutSet& cut, const RowVec& lo,
                        const RowVec& hi) {
    if (dd.shape() == Shape::Box && dd.uniform_density()) {
        if (const auto* h = std::get_if<Halfspace>(&cut)) {
            RowVec clo = lo.cwiseMax(dd.box_lo()), chi = hi.cwiseMin(dd.box_hi());
            if (axis_clip(*h, clo, chi)) return clipped_box_volume(clo, chi) / dd.lebesgue();
        }
    }
    return midpoint_measure(dd, &cut, lo, hi, 1, 8);
}

}  // namespace geocut
