#pragma once

#include "geocut/domain.hpp"
#include "geocut/geograph.hpp"
#include "geocut/granulation.hpp"
#include "geocut/kernel.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace geocut {

/// Convergence-experiment configuration. The r rule is either an explicit
/// per-n list or r_n = c (log n / n)^{1/d}.
struct ExperimentConfig {
    DomainDensity domain = DomainDensity::unit_box(2);
    Kernel kernel = Kernel::uniform(2);
    std::vector<std::string> objectives;  // "che:v,b", "mbis", "vol2"
    std::vector<Index> n_schedule;
    std::vector<double> r_list;  // aligned with n_schedule when non-empty
    double r_coefficient = 2.0;
    Index replicates = 1;
    std::uint64_t master_seed = 0;
    std::string method = "default";
    double tail_eps = 1e-12;

    double r_for(std::size_t n_index) const;
    bool regime_ok(Index n, double r) const;  // n r^d >= 4 log n

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
};

struct ConvergenceRecord {
    Index n = 0;
    double r = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::string objective;
    double raw = 0.0;
    double rescaled = 0.0;  // raw / (n^2 r^{d+1}); vol2 uses raw / (n^2 r^d)
    double target = 0.0;
    double rel_deviation = 0.0;
    std::string method;
    double runtime_s = 0.0;  // JSON only; the CSV stays byte-reproducible
    bool regime_ok = true;
};

// One record per (n, replicate, objective), in schedule order. Replicate
// seeds are master_seed + replicate index; replicates may run on worker
// threads (capped by CHEEGER_THREADS) without affecting the output.
std::vector<ConvergenceRecord> run_convergence(const ExperimentConfig& config);

// Box-averaged L1 surrogate for the Prohorov distance between the empirical
// measure of Y and nu restricted to A; minimized over {A, complement}.
double weak_convergence_distance(const BoxGrid& grid, const Partition& y, const CutSet& cut,
                                 const DomainDensity& dd, Index n);

// Frozen column order: n,r,gamma,seed,objective,raw,rescaled,target,
// rel_deviation,method,regime_ok. Runtime lives in the JSON mirror.
void write_records_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
std::string records_csv(const std::vector<ConvergenceRecord>& records);
std::string records_json(const std::vector<ConvergenceRecord>& records);

}  // namespace geocut
