#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cscn/rng.hpp"

namespace cscn {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& key, const std::string& what)
      : std::runtime_error(key + ": " + what), key(key) {}
  std::string key;
};

// Static network description. Immutable after load_scenario(); shared
// read-only by every other module.
struct Scenario {
  int num_sbs = 0;        // B
  int num_users = 0;      // K
  int num_contents = 0;   // F
  int cp_antennas = 0;    // N
  int sbs_antennas = 0;   // M
  double cell_edge_m = 500.0;

  std::vector<std::array<double, 2>> sbs_positions;
  std::vector<std::array<double, 2>> user_positions;
  std::array<double, 2> cp_position{0.0, 0.0};

  std::vector<double> content_size_bits;  // s_f
  double segment_size_bits = 1e6;         // s_0
  double mu = 0.2;                        // fractional caching capacity
  double cache_capacity_bits = 0.0;       // S_b, derived from mu by default

  std::vector<double> max_tx_power_w;   // P_b
  std::vector<double> sinr_target_db;   // gamma_f as configured
  std::vector<double> sinr_target;      // gamma_f, linear, derived
  double edge_bandwidth_hz = 1e7;      // B1
  double fh_bandwidth_hz = 5e6;        // B2, per multicast group

  std::vector<double> power_slope_sbs;  // delta_b
  double power_slope_cp = 4.0;          // beta

  std::vector<double> noise_edge_w;  // sigma_k^2
  std::vector<double> noise_fh_w;    // z_b^2

  double tau0_bps = 0.0;  // big-M rate constant, >= max_f R_f
  int frames_per_block = 50;

  double pathloss_fixed_db = 148.1;
  double pathloss_slope_db = 37.6;
  double shadowing_std_db = 8.0;
  double antenna_gain_dbi = 10.0;
  double exclusion_radius_m = 30.0;
  double min_distance_m = 1.0;

  double p_active = 0.5;
  int users_per_pattern = 4;
  int num_patterns = 3;

  std::uint64_t rng_seed = 1;

  // derived
  std::vector<double> edge_rate_bps;  // R_f = B1 log2(1 + gamma_f)
  bool tau0_raised = false;           // configured tau0 was below max R_f

  double total_library_bits() const;
};

// Parses the flat `key = value` config text ('#' comments, comma-list
// arrays), applies defaults, derives S_b / R_f / tau0 and validates.
// Positions not present in the text are sampled from rng_seed.
Scenario load_scenario(std::string_view config_text);

// Canonical sorted key=value form; load_scenario(dump_scenario(s))
// round-trips bit-exactly.
std::string dump_scenario(const Scenario& s);

// Uniform rejection sampling of SBS and user positions over the hexagon,
// honoring the exclusion radius around SBSs and the CP. Throws
// ScenarioError after too many rejected draws.
void sample_topology(Scenario& s, Rng& rng);

bool inside_hexagon(double x, double y, double edge);

// Small network for fast experiments (B=3, K=6, M=2, N=4, F=20, T=30).
std::string desk_preset_config();
// The evaluation setup scale (B=5, K=12, M=4, N=8, F=100).
std::string paper_preset_config();

}  // namespace cscn
