#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cscn/cacheplan.hpp"

namespace cscn {

enum class CachePolicy { UC, LRU, PCUD, LCPCUD, GAC, TSFUC };

const char* policy_name(CachePolicy p);
std::optional<CachePolicy> parse_policy(std::string_view name);

// shared per-seed demand + channel trace for one transmission block
struct BlockTrace {
  int block_index = 0;
  std::vector<RequestBatch> demand;
  std::vector<ChannelRealization> channels;
};

BlockTrace make_block_trace(const Scenario& s,
                            std::span<const PreferencePattern> patterns,
                            std::span<const int> user_assignment,
                            int block_index, std::uint64_t seed);

struct BlockMetrics {
  double total_power_wf = 0.0;  // Eq-(11) power summed over frames, W*frames
  double edge_power_wf = 0.0;
  double fh_power_wf = 0.0;
  int infeasible_frames = 0;
  int solved_frames = 0;
  double mean_iterations = 0.0;
  double hit_fraction = 0.0;  // request-weighted mean cached fraction
  std::vector<double> frame_power;  // per frame, 0 for empty/infeasible
  std::vector<bool> frame_feasible;
};

struct BlockRun {
  BlockMetrics metrics;
  BlockHistory history;
};

// Per-frame short-term solves over one block under a fixed cache matrix;
// with `lru` set the cache evolves between frames through the LRU rule.
BlockRun run_block(const Scenario& s, const BlockTrace& trace, const Mat& cache_l,
                   bool unicast, const ShortTermParams& params,
                   LruState* lru = nullptr, int threads = 1);

// Eq-(11) power of one frame policy.
double power_of(const TransmissionPolicy& p, const Scenario& s);

// ---------------------------------------------------------------------------
// enumeration oracle
// ---------------------------------------------------------------------------

enum class OracleCertificate { ExactSocp, MultiStartLocal };

struct OracleResult {
  bool ok = false;
  double objective_w = 0.0;
  Mat best_clustering;
  OracleCertificate certificate = OracleCertificate::MultiStartLocal;
  int enumerated = 0;
  std::string message;
};

// Enumerates every clustering with nonempty per-content clusters. Instances
// with single-user groups and single-antenna links are solved exactly per
// clustering through a rotated second-order-cone program; anything else
// falls back to multi-start local solves.
OracleResult oracle_short_term(const ShortTermInstance& inst, int budget = 4096,
                               int restarts = 20, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// policy orchestration (two consecutive blocks per the mixed-timescale loop)
// ---------------------------------------------------------------------------

struct PolicyRunParams {
  ShortTermParams short_term;
  PcudParams pcud;
  int threads = 1;
};

struct PolicyRunResult {
  BlockMetrics measured;  // block-2 metrics
  Mat final_l;
  int history_infeasible = 0;
};

PolicyRunResult run_policy(const Scenario& s, CachePolicy policy,
                           const BlockTrace& block1, const BlockTrace& block2,
                           std::uint64_t seed, const PolicyRunParams& params);

// versioned metrics CSV: one row per (policy, seed, block, sweep point)
void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const std::string& policy,
                       std::uint64_t seed, int block,
                       const std::string& sweep_param, double sweep_value,
                       const BlockMetrics& m);

}  // namespace cscn
