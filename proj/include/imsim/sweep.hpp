#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imsim/config.hpp"
#include "imsim/engine.hpp"
#include "imsim/trace.hpp"

namespace imsim {

enum class BaselineId { Baseline1, Baseline2, Baseline3, Proposed };

// Canned architectures: baseline-1 write-through 32KB L1, baseline-2
// write-back 32KB L1, baseline-3 write-back 4KB L1. Baselines carry no
// DBT/WBQ/BR.
HierarchyConfig baseline_config(BaselineId id, const HierarchyConfig& base);

struct SweepSpec {
    std::vector<uint32_t> k_values;
    std::vector<std::pair<uint32_t, uint32_t>> mn_pairs;
    std::vector<uint32_t> wc_bits;
    std::vector<Policy> policies;
    std::vector<bool> br_enabled;
    std::vector<uint64_t> failure_counts;
    std::string trace_path;
    HierarchyConfig base;

    // All (M, N) with M in 1..K, N = K - M.
    static std::vector<std::pair<uint32_t, uint32_t>> all_pairs(uint32_t k);
};

SweepSpec parse_sweep_spec(std::istream& in, const std::string& name = "<sweep>");
SweepSpec load_sweep_spec(const std::string& path);

struct SweepPoint {
    HierarchyConfig config;
    uint64_t failures = 0;
    std::string label;
};

struct ExpandResult {
    std::vector<SweepPoint> points;
    uint64_t filtered = 0; // (M, N) combinations rejected because M + N != K
};

ExpandResult expand(const SweepSpec& spec); // throws ConfigError on empty product

struct RunResult {
    SweepPoint point;
    SimStats stats;
    SimStats baseline_stats; // paired baseline-2 run under the same schedule
    double gain_pct = 0.0;   // (E_base - E_cfg) / E_base * 100
};

std::vector<RunResult> run_sweep(const SweepSpec& spec,
                                 std::span<const AccessRecord> trace,
                                 unsigned max_threads = 0);

enum class RankMetric { TotalEnergy, TotalCycles, LlcWrites, PcmWrites };

// Sorted ascending by metric; ties broken by a hash of the canonical config.
std::vector<const RunResult*> rank(const std::vector<RunResult>& results,
                                   RankMetric metric = RankMetric::TotalEnergy);

std::string stats_csv_header();
std::string stats_csv_row(const std::string& label, const HierarchyConfig& cfg,
                          uint64_t failures, const std::string& role,
                          const SimStats& s, double gain_pct);

// One row per run plus its paired baseline-2 row.
void write_results_csv(std::ostream& out, const std::vector<RunResult>& results);
void write_ranking(std::ostream& out, const std::vector<RunResult>& results,
                   RankMetric metric = RankMetric::TotalEnergy);

} // namespace imsim
