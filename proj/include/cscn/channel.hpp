#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cscn/linalg.hpp"
#include "cscn/scenario.hpp"

namespace cscn {

// One frame of channel state: edge links h_{k,b} (M-vectors, linear
// amplitude) and fronthaul links H_b (N x M, linear amplitude).
struct ChannelRealization {
  int frame = 0;
  std::vector<CVec> edge;      // [k * B + b], length M
  std::vector<CMat> fronthaul;  // [b], N x M

  const CVec& h(int k, int b, int num_sbs) const {
    return edge[size_t(k) * size_t(num_sbs) + size_t(b)];
  }
};

// 148.1 + 37.6 lg(d) with d in km, clamped below at the scenario's minimum
// distance before the caller converts to km.
double path_loss_db(double d_km, double fixed_db = 148.1, double slope_db = 37.6);

// Large-scale linear power gain of one link; shadow_db is the log-normal
// draw for this (link, block).
double large_scale_gain(const Scenario& s, double distance_m, double shadow_db);

// Small-scale Rayleigh fading redrawn every frame; shadowing redrawn per
// transmission block; both derived deterministically from `seed`.
ChannelRealization sample_channels(const Scenario& s, int frame,
                                   std::uint64_t seed);

// Replay dump: one row per complex entry, columns
// t,link,k_or_cp,b,row,col,re,im with link in {edge, fh}.
void write_channel_trace_csv(std::ostream& os, const Scenario& s,
                             const std::vector<ChannelRealization>& frames);

}  // namespace cscn
