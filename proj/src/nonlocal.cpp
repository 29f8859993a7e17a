#include "geocut/nonlocal.hpp"

#include "geocut/rng.hpp"

#include <cmath>

namespace geocut {

namespace {

constexpr Index kBlock = 1 << 16;

}  // namespace

TvEstimate nonlocal_tv(const DomainDensity& dd, const Kernel& kernel, double r,
                       const IndicatorField& u, Index samples, std::uint64_t seed) {
    if (!(r > 0.0)) throw std::invalid_argument("nonlocal_tv needs r > 0");
    if (samples < 1) throw std::invalid_argument("nonlocal_tv needs samples >= 1");
    const int d = dd.dim();
    if (kernel.dim() != d) throw std::invalid_argument("kernel dimension mismatch");
    const double rcut = effective_support(kernel, 1e-12);
    const double mass_trunc = truncated_mass(kernel, rcut);
    const double phi0 = kernel.at_zero();
    const bool uniform = dd.uniform_density();
    const double rho_max = dd.density_max();

    StableSum sum, sum_sq;
    RowVec x(d), z(d), y(d);
    const Index blocks = (samples + kBlock - 1) / kBlock;
    Index done = 0;
    for (Index blk = 0; blk < blocks; ++blk) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(blk));
        const Index count = std::min<Index>(kBlock, samples - done);
        for (Index s = 0; s < count; ++s) {
            // x ~ nu by rejection from the bounding box
            for (;;) {
                for (int a = 0; a < d; ++a)
                    x[a] = uniform_in(rng, dd.bbox_lo()[a], dd.bbox_hi()[a]);
                if (!dd.contains(x)) continue;
                if (uniform || uniform01(rng) * rho_max <= dd.density(x)) break;
            }
            // displacement z with density phi(|z|)/mass_trunc on B(0, rcut):
            // uniform in the ball, thinned by phi(|z|)/phi(0)
            for (;;) {
                double n2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    z[a] = 2.0 * uniform01(rng) - 1.0;
                    n2 += z[a] * z[a];
                }
                if (n2 > 1.0) continue;
                double t = std::sqrt(n2) * rcut;
                if (uniform01(rng) * phi0 <= kernel(t)) {
                    z *= rcut;
                    break;
                }
            }
            y = x + r * z;
            double w = 0.0;
            if (dd.contains(y))
                w = std::abs(u(dd, x) - u(dd, y)) * dd.density(y);
            sum.add(w);
            sum_sq.add(w * w);
        }
        done += count;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum.value() / n;
    double var = 0.0;
    if (samples > 1) var = std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0));
    TvEstimate out;
    out.value = mass_trunc / r * mean;
    out.std_error = mass_trunc / r * std::sqrt(var / n);
    out.samples = samples;
    return out;
}

RecoveryCurve recovery_curve(const DomainDensity& dd, const Kernel& kernel,
                             const IndicatorField& u, const std::vector<double>& r_list,
                             Index samples, std::uint64_t seed) {
    if (r_list.empty()) throw std::invalid_argument("recovery_curve needs radii");
    for (std::size_t i = 1; i < r_list.size(); ++i)
        if (!(r_list[i] < r_list[i - 1]))
            throw std::invalid_argument("recovery_curve radii must be descending");
    RecoveryCurve out;
    if (u.cut_backed()) {
        out.target = surface_tension(kernel) * continuum_tv(dd, u.cut()) * u.scale();
    } else {
        out.target = 0.0;  // constant fields have no perimeter
    }
    for (std::size_t i = 0; i < r_list.size(); ++i) {
        TvEstimate e =
            nonlocal_tv(dd, kernel, r_list[i], u, samples, seed + static_cast<std::uint64_t>(i));
        out.rows.push_back({r_list[i], e.value, e.std_error});
    }
    return out;
}

}  // namespace geocut
