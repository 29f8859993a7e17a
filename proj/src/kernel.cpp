#include "geocut/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace geocut {

namespace {

// 20-node Gauss-Legendre rule on [-1,1].
constexpr int kGaussN = 10;  // symmetric half
const double kGaussX[kGaussN] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
const double kGaussW[kGaussN] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

template <class F>
double gauss_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGaussN; ++i)
        s += kGaussW[i] * (f(c - h * kGaussX[i]) + f(c + h * kGaussX[i]));
    return s * h;
}

// Composite Gauss rule with dyadic panel refinement to an absolute tolerance.
template <class F>
double adaptive_gauss(F&& f, double a, double b, double abs_tol) {
    int panels = 16;
    double prev = 0.0;
    for (int pass = 0; pass < 16; ++pass, panels *= 2) {
        StableSum acc;
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p)
            acc.add(gauss_panel(f, a + p * h, a + (p + 1) * h));
        double cur = acc.value();
        if (pass > 0 && std::abs(cur - prev) < abs_tol) return cur;
        prev = cur;
    }
    throw non_integrable_kernel_error("radial quadrature failed to converge");
}

double check_dim(int d) {
    if (d < 2) throw std::invalid_argument("kernel dimension must be >= 2");
    return d;
}

}  // namespace

Kernel Kernel::uniform(int dim) {
    check_dim(dim);
    return Kernel(KernelProfile::Uniform, dim);
}

Kernel Kernel::gaussian(int dim) {
    check_dim(dim);
    return Kernel(KernelProfile::Gaussian, dim);
}

Kernel Kernel::tabulated(std::vector<double> t, std::vector<double> phi, int dim) {
    check_dim(dim);
    if (t.size() != phi.size() || t.size() < 2)
        throw std::invalid_argument("tabulated kernel needs >= 2 matching nodes");
    if (t.front() != 0.0)
        throw std::invalid_argument("tabulated kernel must start at t = 0");
    if (phi.front() <= 0.0)
        throw std::invalid_argument("tabulated kernel needs phi(0) > 0");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("tabulated kernel grid must be strictly increasing");
        if (phi[i] > phi[i - 1])
            throw std::invalid_argument("tabulated kernel must be nonincreasing");
        if (phi[i] < 0.0)
            throw std::invalid_argument("tabulated kernel must be nonnegative");
    }
    Kernel k(KernelProfile::Tabulated, dim);
    k.tab_t_ = std::move(t);
    k.tab_phi_ = std::move(phi);
    return k;
}

Kernel Kernel::from_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw error("cannot open kernel file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw error("empty kernel file: " + path);
    std::vector<double> ts, phis;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t, p;
        if (!(row >> t >> p)) throw error("bad kernel row: " + line);
        ts.push_back(t);
        phis.push_back(p);
    }
    return tabulated(std::move(ts), std::move(phis), dim);
}

double Kernel::operator()(double t) const {
    if (t < 0.0) throw std::invalid_argument("kernel argument must be >= 0");
    switch (profile_) {
        case KernelProfile::Uniform:
            return t <= 1.0 ? 1.0 : 0.0;  // closed interval: 1_{[0,1]}
        case KernelProfile::Gaussian:
            return std::exp(-t * t);
        case KernelProfile::Tabulated: {
            if (t >= tab_t_.back()) return t == tab_t_.back() ? tab_phi_.back() : 0.0;
            auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
            std::size_t hi = static_cast<std::size_t>(it - tab_t_.begin());
            std::size_t lo = hi - 1;
            double w = (t - tab_t_[lo]) / (tab_t_[hi] - tab_t_[lo]);
            return tab_phi_[lo] + w * (tab_phi_[hi] - tab_phi_[lo]);
        }
    }
    return 0.0;
}

double Kernel::at_zero() const { return (*this)(0.0); }

double Kernel::exact_support() const {
    switch (profile_) {
        case KernelProfile::Uniform:
            return 1.0;
        case KernelProfile::Gaussian:
            // exp(-t^2) underflows to exactly 0 past here
            return 27.5;
        case KernelProfile::Tabulated:
            return tab_t_.back();
    }
    return 1.0;
}

double unit_ball_volume(int d) {
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double unit_sphere_area(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double sphere_abs_coord_integral(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * (d - 1)) / std::tgamma(0.5 * (d + 1));
}

double effective_support(const Kernel& k, double tail_eps) {
    if (!(tail_eps > 0.0) || tail_eps >= k.at_zero())
        throw std::invalid_argument("tail_eps must lie in (0, phi(0))");
    switch (k.profile()) {
        case KernelProfile::Uniform:
            return 1.0;
        case KernelProfile::Gaussian:
            return std::sqrt(std::log(1.0 / tail_eps));
        case KernelProfile::Tabulated: {
            // phi nonincreasing: bisect for the crossing phi(R) = tail_eps
            double hi = k.exact_support();
            if (k(hi) > tail_eps) return hi;  // jump to zero at the last node
            double lo = 0.0;
            for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
                double mid = 0.5 * (lo + hi);
                (k(mid) <= tail_eps ? hi : lo) = mid;
            }
            return hi;
        }
    }
    return 1.0;
}

namespace {

// integral of phi(t) t^m dt on [0, Rcut]
double radial_moment(const Kernel& k, int m) {
    const double rcut = effective_support(k, 1e-14);
    return adaptive_gauss([&](double t) { return k(t) * std::pow(t, m); }, 0.0, rcut, 1e-10);
}

}  // namespace

double surface_tension_numeric(const Kernel& k) {
    double v = sphere_abs_coord_integral(k.dim()) * radial_moment(k, k.dim());
    if (!(v > 0.0) || !std::isfinite(v))
        throw non_integrable_kernel_error("surface tension integral is not positive finite");
    return v;
}

double total_mass_numeric(const Kernel& k) {
    double v = unit_sphere_area(k.dim()) * radial_moment(k, k.dim() - 1);
    if (!(v > 0.0) || !std::isfinite(v))
        throw non_integrable_kernel_error("kernel mass integral is not positive finite");
    return v;
}

double truncated_mass(const Kernel& k, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("truncation radius must be positive");
    const int m = k.dim() - 1;
    return unit_sphere_area(k.dim()) *
           adaptive_gauss([&](double t) { return k(t) * std::pow(t, m); }, 0.0, radius, 1e-12);
}

double surface_tension(const Kernel& k) {
    const int d = k.dim();
    switch (k.profile()) {
        case KernelProfile::Uniform:
            return 2.0 * std::pow(M_PI, 0.5 * (d - 1)) /
                   ((d + 1) * std::tgamma(0.5 * (d + 1)));
        case KernelProfile::Gaussian:
            return std::pow(M_PI, 0.5 * (d - 1));
        case KernelProfile::Tabulated:
            return surface_tension_numeric(k);
    }
    return 0.0;
}

double total_mass(const Kernel& k) {
    const int d = k.dim();
    switch (k.profile()) {
        case KernelProfile::Uniform:
            return unit_ball_volume(d);
        case KernelProfile::Gaussian:
            return std::pow(M_PI, 0.5 * d);
        case KernelProfile::Tabulated:
            return total_mass_numeric(k);
    }
    return 0.0;
}

}  // namespace geocut
