#pragma once

#include "geocut/common.hpp"

#include <string>
#include <vector>

namespace geocut {

enum class KernelProfile { Uniform, Gaussian, Tabulated };

/// Nonincreasing radial weight profile phi with phi(0) > 0 and a finite
/// surface-tension integral. Immutable after construction; safe to share
/// across threads.
class Kernel {
public:
    static Kernel uniform(int dim);
    static Kernel gaussian(int dim);
    // Samples on a strictly increasing grid starting at t = 0. Rejected if not
    // nonincreasing or if phi(0) <= 0; evaluates by linear interpolation and
    // is 0 beyond the last node.
    static Kernel tabulated(std::vector<double> t, std::vector<double> phi, int dim);
    // CSV with header "t,phi".
    static Kernel from_csv(const std::string& path, int dim);

    double operator()(double t) const;
    int dim() const { return dim_; }
    KernelProfile profile() const { return profile_; }
    double at_zero() const;

    // Radius beyond which operator() returns exactly 0 (infinity for gaussian
    // up to double underflow).
    double exact_support() const;

private:
    Kernel(KernelProfile p, int dim) : profile_(p), dim_(dim) {}

    KernelProfile profile_;
    int dim_;
    std::vector<double> tab_t_;
    std::vector<double> tab_phi_;
};

// sigma_phi = integral over R^d of phi(|x|)|x_1| dx. Closed form for the
// uniform and gaussian profiles, radial quadrature otherwise.
double surface_tension(const Kernel& k);
// I_phi = integral over R^d of phi(|x|) dx.
double total_mass(const Kernel& k);
// Smallest R with phi(t) <= tail_eps for all t >= R.
double effective_support(const Kernel& k, double tail_eps);

// Quadrature-only routes (the closed forms' independent cross-check).
double surface_tension_numeric(const Kernel& k);
double total_mass_numeric(const Kernel& k);
// integral of phi(|x|) over the ball of the given radius
double truncated_mass(const Kernel& k, double radius);

// Geometry constants.
double unit_ball_volume(int d);   // omega_d
double unit_sphere_area(int d);   // H^{d-1}(S^{d-1})
// Integral of |w_1| over the unit sphere S^{d-1}.
double sphere_abs_coord_integral(int d);

}  // namespace geocut
