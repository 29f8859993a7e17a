#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geocut {

using Index = Eigen::Index;

// Point clouds are stored one point per row, n x d.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct budget_error : error {
    using error::error;
};
struct degenerate_graph_error : error {
    using error::error;
};
struct unsupported_domain_error : error {
    using error::error;
};
struct non_integrable_kernel_error : error {
    using error::error;
};
struct grid_too_coarse_error : error {
    using error::error;
};
struct precondition_error : error {
    using error::error;
};

// Neumaier compensated accumulator. Summation order fixes the result bit-for-bit,
// which the reproducibility guarantees rely on.
class StableSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace geocut
