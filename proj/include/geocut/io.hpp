#pragma once

#include "geocut/domain.hpp"
#include "geocut/geograph.hpp"

#include <string>

namespace geocut {

// CSV with columns x1,...,xd; a non-numeric first line is treated as a header.
PointCloud read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const PointCloud& cloud);

// one 0/1 per line
Partition read_partition(const std::string& path);
void write_partition(const std::string& path, const Partition& y);

// shortest round-trip decimal form (deterministic across runs)
std::string format_double(double v);

}  // namespace geocut
