#pragma once

#include <cstdint>
#include <iosfwd>
#include <list>
#include <string>
#include <vector>

#include "cscn/delivery.hpp"

namespace cscn {

// F x B matrix of cached fractions with provenance for the CSV header.
struct CacheAllocation {
  Mat l;
  std::string algorithm;
  int block_id = 0;
  std::uint64_t seed = 0;
};

void write_cache_csv(std::ostream& os, const CacheAllocation& a);
CacheAllocation read_cache_csv(std::istream& is);

struct FrameRecord {
  RequestBatch batch;
  ChannelRealization channels;
  TransmissionPolicy policy;  // clustering used when the frame was feasible
  bool feasible = false;
};

struct BlockHistory {
  std::vector<FrameRecord> frames;
};

// l_{f,b} = mu everywhere
CacheAllocation uc_allocation(const Scenario& s);

// Cache update against observed clusterings: minimizes the summed fronthaul
// rate floors over the recorded frames subject to the storage budget, via
// the epigraph linear program.
Mat solve_p2(const Scenario& s, const BlockHistory& history);

// frequency of content f being served by SBS b over the block
struct LocalPreference {
  Mat q;                      // F x B, columns sum to 1
  std::vector<bool> uniform;  // SBS never served anything; uniform fallback
};
LocalPreference estimate_local_preference(const Scenario& s,
                                          const BlockHistory& history);

// learning-based cache update: epigraph LP on the preference-weighted floors
CacheAllocation lc_pcud(const Scenario& s, const BlockHistory& history,
                        int block_id = 0, std::uint64_t seed = 0);

struct PcudParams {
  int max_outer = 5;
  double stop_tol = 1e-3;
  ShortTermParams short_term;
  bool unicast = false;  // fronthaul-unicast variant of the inner solver
  int threads = 1;
};

struct PcudResult {
  CacheAllocation alloc;
  std::vector<double> outer_objectives;  // block power after each round, W-frames
  std::vector<TransmissionPolicy> final_policies;  // one per history frame
  std::vector<bool> frame_feasible;
  int outer_iterations = 0;
  int dropped_frames = 0;  // infeasible under every attempted clustering
};

// Inexact block coordinate descent: alternates per-frame transmission
// re-optimization with the cache update LP. The reported block objective is
// non-increasing; a round that fails to improve is rolled back and ends the
// descent.
PcudResult pcud(const Scenario& s, const BlockHistory& history,
                const Mat& initial_l, const PcudParams& params);

// Whole-content LRU state per SBS, most recent first.
struct LruState {
  std::vector<std::list<int>> recency;  // per SBS
  int skipped_oversize = 0;

  void init(int num_sbs) { recency.assign(size_t(num_sbs), {}); }
};

// Every SBS serving content f in this frame inserts f fully and evicts the
// least recently served contents until the budget holds.
void lru_update(LruState& state, const Scenario& s,
                const TransmissionPolicy& policy);
CacheAllocation lru_allocation(const LruState& state, const Scenario& s);

}  // namespace cscn
