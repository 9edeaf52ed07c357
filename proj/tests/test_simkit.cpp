#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cscn/simkit.hpp"

using namespace cscn;

namespace {

// tiny network that keeps block runs fast in unit tests
Scenario mini_scenario(const std::string& p_active = "0.7",
                       const std::string& extra = "") {
  return load_scenario(
      "num_sbs = 2\nnum_users = 3\nnum_contents = 6\n"
      "cp_antennas = 2\nsbs_antennas = 2\nframes_per_block = 6\n"
      "num_patterns = 1\nusers_per_pattern = 3\ncell_edge_m = 300\n"
      "cp_position = -450,0\nsinr_target_db = 5\nmu = 0.34\n"
      "p_active = " + p_active + "\nrng_seed = 3\n" + extra);
}

struct MiniWorld {
  Scenario s;
  std::vector<PreferencePattern> patterns;
  std::vector<int> assignment;
};

MiniWorld mini_world(const std::string& p_active = "0.7") {
  MiniWorld w;
  w.s = mini_scenario(p_active);
  Rng rng(seed_mix(w.s.rng_seed, 0x70617474ULL));
  w.patterns = build_patterns(w.s.num_patterns, w.s.num_contents, rng);
  w.assignment = default_user_assignment(w.s);
  return w;
}

}  // namespace

TEST_CASE("policy names round trip") {
  for (auto p : {CachePolicy::UC, CachePolicy::LRU, CachePolicy::PCUD,
                 CachePolicy::LCPCUD, CachePolicy::GAC, CachePolicy::TSFUC})
    CHECK(parse_policy(policy_name(p)) == p);
  CHECK_FALSE(parse_policy("nope").has_value());
}

TEST_CASE("frame power formula") {
  auto s = mini_scenario();
  TransmissionPolicy p;
  p.contents = {0};
  p.clustering = Mat(1, 2, 0.0);
  p.clustering(0, 0) = 1.0;
  // one edge beam with squared norm 0.5 at SBS 0, no fronthaul
  p.edge_beams = {{CVec{cd(std::sqrt(0.5), 0), cd(0, 0)}, CVec{cd(0, 0), cd(0, 0)}}};
  p.fh_beams = {CVec(2, cd(0, 0))};
  p.fh_rate_bps = {0.0};
  CHECK(power_of(p, s) == doctest::Approx(2.7 * 0.5).epsilon(1e-12));
  // pure fronthaul: beta ||w||^2 = 4.0 * 0.25
  p.edge_beams[0][0] = CVec{cd(0, 0), cd(0, 0)};
  p.fh_beams[0] = CVec{cd(0.5, 0), cd(0, 0)};
  CHECK(power_of(p, s) == doctest::Approx(1.0).epsilon(1e-12));
  p.fh_beams[0] = CVec(2, cd(0, 0));
  CHECK(power_of(p, s) == doctest::Approx(0.0));
}

TEST_CASE("zero active users produce zero power") {
  auto w = mini_world("0");
  auto trace = make_block_trace(w.s, w.patterns, w.assignment, 0, 4);
  ShortTermParams stp;
  auto run = run_block(w.s, trace, uc_allocation(w.s).l, false, stp);
  CHECK(run.metrics.total_power_wf == 0.0);
  CHECK(run.metrics.infeasible_frames == 0);
  CHECK(run.metrics.solved_frames == 0);
}

TEST_CASE("full caches silence the fronthaul across a block") {
  auto w = mini_world();
  auto trace = make_block_trace(w.s, w.patterns, w.assignment, 0, 4);
  ShortTermParams stp;
  Mat full(w.s.num_contents, w.s.num_sbs, 1.0);
  auto run = run_block(w.s, trace, full, false, stp);
  CHECK(run.metrics.solved_frames > 0);
  CHECK(run.metrics.fh_power_wf <= 1e-8);
  CHECK(run.metrics.hit_fraction == doctest::Approx(1.0));
}

TEST_CASE("block runs are deterministic") {
  auto w = mini_world();
  auto trace = make_block_trace(w.s, w.patterns, w.assignment, 0, 11);
  ShortTermParams stp;
  auto a = run_block(w.s, trace, uc_allocation(w.s).l, false, stp);
  auto b = run_block(w.s, trace, uc_allocation(w.s).l, false, stp);
  std::ostringstream csva, csvb;
  write_metrics_header(csva);
  write_metrics_row(csva, "UC", 11, 0, "none", 0.0, a.metrics);
  write_metrics_header(csvb);
  write_metrics_row(csvb, "UC", 11, 0, "none", 0.0, b.metrics);
  CHECK(csva.str() == csvb.str());
}

TEST_CASE("genie never loses to uniform caching on the same trace") {
  auto w = mini_world();
  PolicyRunParams params;
  auto b1 = make_block_trace(w.s, w.patterns, w.assignment, 0, 21);
  auto b2 = make_block_trace(w.s, w.patterns, w.assignment, 1, 21);
  auto uc = run_policy(w.s, CachePolicy::UC, b1, b2, 21, params);
  auto gac = run_policy(w.s, CachePolicy::GAC, b1, b2, 21, params);
  CHECK(gac.measured.total_power_wf <= uc.measured.total_power_wf + 1e-9);
}

TEST_CASE("oracle matches matched filtering on a fully cached single link") {
  auto s = load_scenario(
      "num_sbs = 1\nnum_users = 1\nnum_contents = 2\ncp_antennas = 1\n"
      "sbs_antennas = 2\nnoise_edge_w = 1\nnoise_fh_w = 1\n"
      "sbs_positions = 50,0\nuser_positions = 50,40\ncp_position = 0,-100\n"
      "sinr_target_db = 10\n");
  ChannelRealization ch;
  ch.frame = 0;
  ch.edge = {CVec{cd(8, 0), cd(6, 0)}};
  ch.fronthaul = {CMat(1, 2)};
  ch.fronthaul[0](0, 0) = cd(5, 0);
  auto batch = batch_from_requests(0, {{0, 0}});
  Mat full(2, 1, 1.0);
  auto inst = make_instance(s, ch, batch, full);
  auto orc = oracle_short_term(inst);
  REQUIRE(orc.ok);
  CHECK(orc.objective_w == doctest::Approx(2.7 * 10.0 / 100.0).epsilon(1e-4));
}

TEST_CASE("oracle avoids a dead SBS") {
  auto s = load_scenario(
      "num_sbs = 2\nnum_users = 1\nnum_contents = 2\ncp_antennas = 1\n"
      "sbs_antennas = 1\nnoise_edge_w = 1\nnoise_fh_w = 1\n"
      "sbs_positions = 50,0,-50,0\nuser_positions = 50,40\ncp_position = 0,-100\n"
      "sinr_target_db = 10\n");
  ChannelRealization ch;
  ch.frame = 0;
  ch.edge = {CVec{cd(10, 0)}, CVec{cd(0, 0)}};  // SBS 1 unreachable
  ch.fronthaul = {CMat(1, 1), CMat(1, 1)};
  ch.fronthaul[0](0, 0) = cd(5, 0);
  ch.fronthaul[1](0, 0) = cd(4, 0);
  auto batch = batch_from_requests(0, {{0, 0}});
  Mat full(2, 2, 1.0);
  auto inst = make_instance(s, ch, batch, full);
  auto orc = oracle_short_term(inst);
  REQUIRE(orc.ok);
  CHECK(orc.best_clustering(0, 0) == 1.0);
  CHECK(orc.best_clustering(0, 1) == 0.0);
  CHECK(orc.certificate == OracleCertificate::ExactSocp);
}

TEST_CASE("exact oracle certificate and algorithm agreement on unicast pairs") {
  // M = N = 1, two single-user groups, B = 2: every clustering solves exactly
  for (std::uint64_t seed : {5ULL, 6ULL}) {
    auto s = load_scenario(
        "num_sbs = 2\nnum_users = 2\nnum_contents = 4\ncp_antennas = 1\n"
        "sbs_antennas = 1\nframes_per_block = 4\ncell_edge_m = 300\n"
        "cp_position = -450,0\nsinr_target_db = 5\nmu = 0.25\n"
        "num_patterns = 1\nusers_per_pattern = 2\nrng_seed = " +
        std::to_string(seed) + "\n");
    auto ch = sample_channels(s, 0, seed);
    auto batch = batch_from_requests(0, {{0, 0}, {1, 1}});
    Mat cache(4, 2, 0.25);
    auto inst = make_instance(s, ch, batch, cache);
    auto orc = oracle_short_term(inst);
    REQUIRE(orc.ok);
    CHECK(orc.certificate == OracleCertificate::ExactSocp);
    ShortTermParams stp;
    stp.init_seed = seed;
    auto res = solve_short_term(s, ch, batch, cache, stp);
    REQUIRE(res.status == ShortTermStatus::Ok);
    CHECK(res.policy.power_w >= orc.objective_w - 1e-6);
    CHECK(res.policy.power_w <=
          orc.objective_w * (1.0 + 1e-4) + 1e-9);
  }
}

TEST_CASE("oracle enumeration budget is enforced") {
  auto w = mini_world();
  auto trace = make_block_trace(w.s, w.patterns, w.assignment, 0, 4);
  // fabricate an instance with too many rows
  RequestBatch big;
  big.frame = 0;
  std::vector<std::pair<int, int>> reqs;
  for (int u = 0; u < 3; ++u) reqs.emplace_back(u, u);
  big = batch_from_requests(0, reqs);
  auto inst = make_instance(w.s, trace.channels[0], big, uc_allocation(w.s).l);
  auto orc = oracle_short_term(inst, /*budget=*/4);
  CHECK_FALSE(orc.ok);
  CHECK(orc.message.find("budget") != std::string::npos);
}
