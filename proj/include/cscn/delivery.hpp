#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cscn/channel.hpp"
#include "cscn/conic.hpp"
#include "cscn/demand.hpp"
#include "cscn/linalg.hpp"
#include "cscn/scenario.hpp"

namespace cscn {

// ---------------------------------------------------------------------------
// frame-level problem data, pre-scaled for the solver
// ---------------------------------------------------------------------------

// Edge channels are divided by the user noise amplitude and fronthaul
// channels by the SBS noise amplitude, so noise becomes 1 in SINR and
// capacity expressions; fronthaul rates are carried in units of B2.
struct ShortTermInstance {
  int num_sbs = 0, sbs_antennas = 0, cp_antennas = 0;
  int num_rows = 0;  // requested contents this frame
  std::vector<int> contents;            // row -> library index
  std::vector<double> gamma;            // per row, linear SINR target
  std::vector<double> rate_units;       // per row, R_f / B2
  double tau_units = 0.0;               // tau0 / B2
  Mat cached;                           // row x B cache fractions
  std::vector<std::vector<int>> group;  // per row: local user ids
  std::vector<CVec> user_channel;       // local user -> aggregate CVec(B*M)
  std::vector<CMat> fh_channel;         // b -> scaled N x M
  std::vector<double> fh_sigma1_sq;     // top singular value^2 per b
  std::vector<CVec> fh_u1;              // matching left singular vector
  std::vector<double> max_power;        // P_b
  std::vector<double> slope_sbs;        // delta_b
  double slope_cp = 4.0;
  double fh_bandwidth_hz = 0.0;
  int frame = 0;
};

ShortTermInstance make_instance(const Scenario& s, const ChannelRealization& ch,
                                const RequestBatch& batch, const Mat& cache_l);

// decision variables of the penalized subproblem, in solver scaling
struct ShortTermPoint {
  std::vector<CVec> edge_beam;            // per row, aggregate CVec(B*M)
  std::vector<CVec> fh_beam;              // per row, CVec(N)           (multicast)
  std::vector<std::vector<CVec>> fh_link; // per row x B, CVec(N)       (unicast)
  Mat clustering;                         // row x B in [0,1]
  Mat slack;                              // row x B, >= 0
  std::vector<double> rate;               // per row (multicast) in B2 units
  Mat rate_link;                          // row x B (unicast)
  double slack_norm_epi = 0.0;
};

struct SubproblemLayout {
  int num_sbs = 0, sbs_antennas = 0, cp_antennas = 0, rows = 0;
  bool unicast = false;
  int num_vars = 0;

  int v_idx(int j, int b, int m, int im) const;
  int w_idx(int j, int n, int im) const;  // multicast
  // unicast links carry one power variable along the precomputed dominant
  // beam direction (rank-one optimality per link)
  int link_power_idx(int j, int b) const;
  int e_idx(int j, int b) const;
  int slack_idx(int j, int b) const;
  int rate_idx(int j) const;
  int rate_link_idx(int j, int b) const;
  int epi_idx() const;
};

SubproblemLayout make_layout(const ShortTermInstance& inst, bool unicast);

std::vector<double> pack_point(const SubproblemLayout& lay,
                               const ShortTermPoint& p);
ShortTermPoint unpack_point(const ShortTermInstance& inst,
                            const SubproblemLayout& lay,
                            std::span<const double> x);

// The convexified subproblem at an expansion point: quadratic objective with
// the slack-norm penalty, per-SBS power, beam-clustering cones, linearized
// SINR, big-M exponential fronthaul capacity, linearized binary push, rate
// floors and the cluster cover cut.
conic::Problem build_ccp_subproblem(const ShortTermInstance& inst,
                                    const SubproblemLayout& lay,
                                    const ShortTermPoint& expansion,
                                    double lambda);

// ---------------------------------------------------------------------------
// spec-level formulas
// ---------------------------------------------------------------------------

// max_b (1 - l_{f,b}) e_{f,b} R_f
double min_required_fh_rate(std::span<const double> cached_row,
                            std::span<const double> clustering_row,
                            double edge_rate_bps);

// [max_b (1 - l_{f,b}) s0 / R_fh - s0 / R_f]^+ over the serving cluster
double buffering_time(std::span<const double> cached_row,
                      std::span<const double> clustering_row, double fh_rate_bps,
                      double edge_rate_bps, double segment_bits);

// ---------------------------------------------------------------------------
// policies
// ---------------------------------------------------------------------------

struct TransmissionPolicy {
  int frame = -1;
  bool unicast = false;
  std::vector<int> contents;                    // row -> library index
  Mat clustering;                               // rows x B, binary
  std::vector<std::vector<CVec>> edge_beams;    // [row][b] CVec(M), sqrt(W)
  std::vector<CVec> fh_beams;                   // [row] CVec(N)
  std::vector<std::vector<CVec>> fh_beams_link; // [row][b] CVec(N) (unicast)
  std::vector<double> fh_rate_bps;              // per row
  double edge_power_w = 0.0, fh_power_w = 0.0, power_w = 0.0;
  int ccp_iterations = 0;
  bool non_binary_residual = false;
};

// achieved SINR of a policy at (row, local user)
double achieved_sinr(const ShortTermInstance& inst, const TransmissionPolicy& p,
                     int row, int local_user);

// worst-case violations of the frame constraints, in solver scaling
struct PolicyCheck {
  double power = 0.0;      // per-SBS budget
  double coupling = 0.0;   // beams outside the cluster
  double sinr = 0.0;       // QoS targets
  double fh_capacity = 0.0;  // rate vs fronthaul capacity, in B2 units
  double fh_floor = 0.0;     // rate floor, in B2 units

  double worst() const;
};
PolicyCheck check_policy(const ShortTermInstance& inst,
                         const TransmissionPolicy& p);

enum class ShortTermStatus { Ok, Infeasible, NumericalTrouble };

struct ShortTermDiagnostics {
  std::vector<double> objective_history;  // penalized objective per iteration
  std::vector<double> lambda_history;
  int iterations = 0;
  bool non_binary_residual = false;
  int repair_flips = 0;
  std::string message;
};

struct ShortTermParams {
  double lambda0 = 1.0;
  double lambda_growth = 3.0;
  double lambda_max = 50.0;
  double epsilon = 0.01;   // clustering quantization threshold
  double stop_tol = 1e-3;  // relative objective change after saturation
  int max_iterations = 30;
  std::uint64_t init_seed = 1;           // E^(0) draw
  std::optional<Mat> fixed_clustering0;  // shared E^(0) (convergence demo)
  std::uint64_t beam_init_seed = 0;      // nonzero: random feasible beam init
  // warm re-solve: the start is already near-binary, so the penalty ladder
  // begins saturated (used by the cache-update descent rounds)
  bool penalty_start_max = false;
  // known-feasible beams standing in for the all-ones probe
  std::shared_ptr<const ShortTermPoint> warm_start;
};

struct ShortTermResult {
  ShortTermStatus status = ShortTermStatus::Infeasible;
  TransmissionPolicy policy;
  ShortTermDiagnostics diag;
};

// full short-term solve for one frame (penalty CCCP + quantize + polish)
ShortTermResult solve_short_term(const Scenario& s, const ChannelRealization& ch,
                                 const RequestBatch& batch, const Mat& cache_l,
                                 const ShortTermParams& params);

// fronthaul-unicast variant of the same pipeline
ShortTermResult solve_short_term_unicast(const Scenario& s,
                                         const ChannelRealization& ch,
                                         const RequestBatch& batch,
                                         const Mat& cache_l,
                                         const ShortTermParams& params);

// Best beams for a fixed binary clustering (used by the polishing step, the
// feasibility probe and the enumeration oracle). Rates sit at their floors;
// remaining nonconvexity is handled by successive convexification.
struct FixedClusteringResult {
  bool feasible = false;
  double objective_w = 0.0;  // watts
  std::vector<CVec> edge_beam;             // per row aggregate
  std::vector<CVec> fh_beam;               // multicast
  std::vector<std::vector<CVec>> fh_link;  // unicast
  std::vector<double> rate_units;          // per row (max over links if unicast)
  int iterations = 0;
};

struct FixedSolveOptions {
  int max_power_iters = 60;       // successive-convexification rounds
  int max_restore_iters = 15;     // feasibility-restoration rounds
  bool feasibility_only = false;  // stop at the first feasible point
  double warm_t0 = 1.0;           // barrier start when a hint is trusted
  double opt_tol = 1e-9;          // subproblem gap target
};

FixedClusteringResult solve_fixed_clustering(const ShortTermInstance& inst,
                                             const Mat& clustering_bin,
                                             bool unicast,
                                             const ShortTermPoint* hint,
                                             std::uint64_t init_seed = 0,
                                             const FixedSolveOptions& opts = {});

// policy dump, one record per cluster entry / fronthaul row / user SINR
void write_policy_csv(std::ostream& os, const ShortTermInstance& inst,
                      const TransmissionPolicy& p);

}  // namespace cscn
