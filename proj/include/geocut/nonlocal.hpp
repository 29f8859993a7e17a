#pragma once

#include "geocut/domain.hpp"
#include "geocut/kernel.hpp"

namespace geocut {

/// {0,1}-valued field on D (an indicator of a cut set, or a constant),
/// optionally scaled by a positive factor.
class IndicatorField {
public:
    static IndicatorField from_cut(CutSet cut) {
        IndicatorField f;
        f.cut_ = std::move(cut);
        return f;
    }
    static IndicatorField constant(double value) {
        IndicatorField f;
        f.const_value_ = value;
        return f;
    }
    IndicatorField scaled(double a) const {
        IndicatorField f = *this;
        f.scale_ *= a;
        return f;
    }
    IndicatorField complemented() const {
        if (!cut_) {
            IndicatorField f = *this;
            f.const_value_ = 1.0 - f.const_value_;
            return f;
        }
        IndicatorField f = *this;
        f.complement_ = !f.complement_;
        return f;
    }

    double operator()(const DomainDensity& dd, const RowVec& x) const {
        double base = cut_ ? (in_cut(dd, *cut_, x) ? 1.0 : 0.0) : const_value_;
        if (complement_) base = 1.0 - base;
        return scale_ * base;
    }
    bool cut_backed() const { return cut_.has_value(); }
    const CutSet& cut() const { return *cut_; }
    double scale() const { return scale_; }
    bool complement() const { return complement_; }

private:
    std::optional<CutSet> cut_;
    double const_value_ = 0.0;
    double scale_ = 1.0;
    bool complement_ = false;
};

struct TvEstimate {
    double value = 0.0;
    double std_error = 0.0;
    Index samples = 0;
};

// Monte Carlo estimate of TV_{phi,r}(u) =
//   r^{-d-1} ∬ phi(|x-y|/r) |u(x)-u(y)| nu(dx) nu(dy),
// importance-sampling the displacement from the normalized kernel inside
// r * R_cut. Deterministic for a fixed seed (independent per-block streams).
TvEstimate nonlocal_tv(const DomainDensity& dd, const Kernel& kernel, double r,
                       const IndicatorField& u, Index samples, std::uint64_t seed);

struct RecoveryRow {
    double r = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
};

struct RecoveryCurve {
    std::vector<RecoveryRow> rows;
    // sigma_phi * TV(u) when u is cut-backed (0 for constants), else NaN
    double target = 0.0;
};

// One nonlocal_tv estimate per radius; r_list must be descending.
RecoveryCurve recovery_curve(const DomainDensity& dd, const Kernel& kernel,
                             const IndicatorField& u, const std::vector<double>& r_list,
                             Index samples, std::uint64_t seed);

}  // namespace geocut
