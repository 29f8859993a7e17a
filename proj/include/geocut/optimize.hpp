#pragma once

#include "geocut/geograph.hpp"
#include "geocut/granulation.hpp"

#include <string>

namespace geocut {

struct OptimizerResult {
    Partition partition;
    double value = 0.0;  // recomputed from the returned partition
    std::string method;
    Index iterations = 0;
    double wall_seconds = 0.0;
    bool fallback = false;
};

// Exhaustive minimum of (Chee0) over the 2^n - 2 nonempty proper subsets,
// visited in Gray-code order with incremental cut/volume updates. Ties go to
// the lexicographically smallest membership mask. Requires n <= 22.
OptimizerResult exact_cheeger(const GeoGraph& g, int v, int b);

// Exhaustive minimum cut over subsets of size floor(n/2). Requires n <= 24.
OptimizerResult exact_mbis(const GeoGraph& g);

enum class SweepMode { Axis, Fiedler };

// Orders points by a scalar score (each coordinate, or the Fiedler vector of
// the weighted Laplacian) and evaluates all n-1 prefix cuts incrementally.
// Fiedler mode falls back to axis sweeping on disconnected graphs or when the
// power iteration hits its cap (result.fallback is set).
OptimizerResult sweep_cut(const GeoGraph& g, int v, int b, SweepMode mode);

enum class RemovalMode { Cut, Ratio };

// Recolors the boxes that are grey with respect to y, one at a time in
// ascending box id, to a single color chosen per the removal rule:
//   Cut   — endpoint minimization of l(w'-l') + m l' (ties -> white),
//   Ratio — sign of k(alpha y - beta x) with k in {+whites, -blacks}.
// Only points in grey boxes change membership.
Partition greyscale_removal(const GeoGraph& g, const BoxGrid& grid, const Partition& y,
                            RemovalMode mode, int v);

// Best-improvement single-swap descent on the bisection cut. One pass
// refreshes the candidate set (points within 2r of a cross edge) and then
// applies improving swaps until exhaustion; |Y| is invariant.
OptimizerResult local_search_bisection(const GeoGraph& g, const Partition& y0,
                                       Index max_passes);

// Axis-aligned half prefix of size floor(n/2) with the smallest cut; the
// standard seed for the bisection local search.
Partition median_axis_bisection(const GeoGraph& g);

// sweep_cut, then cut-mode greyscale removal; returns whichever of the two
// candidates has the smaller true objective.
OptimizerResult refine_pipeline(const GeoGraph& g, const BoxGrid& grid, int v, int b,
                                SweepMode mode = SweepMode::Axis);

}  // namespace geocut
