#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cscn/delivery.hpp"

using namespace cscn;

namespace {

// one- or two-SBS scenario with unit noise so channels pass through unscaled
Scenario unit_noise_scenario(int B, int M, int N, const std::string& extra) {
  std::string cfg =
      "num_sbs = " + std::to_string(B) + "\nnum_users = 2\nnum_contents = 3\n" +
      "cp_antennas = " + std::to_string(N) +
      "\nsbs_antennas = " + std::to_string(M) +
      "\nnoise_edge_w = 1\nnoise_fh_w = 1\n"
      "sbs_positions = " + (B == 1 ? "100,0" : "100,0,-100,0") +
      "\nuser_positions = 100,40,-100,40\ncp_position = 0,0\n" + extra;
  return load_scenario(cfg);
}

// edge given as one aggregate CVec(B*M) per user, split into (k,b) blocks
ChannelRealization manual_channels(const Scenario& s,
                                   const std::vector<CVec>& edge_aggregate,
                                   const std::vector<CMat>& fh) {
  ChannelRealization ch;
  ch.frame = 0;
  const int B = s.num_sbs, M = s.sbs_antennas;
  for (const auto& agg : edge_aggregate) {
    REQUIRE(int(agg.size()) == B * M);
    for (int b = 0; b < B; ++b)
      ch.edge.emplace_back(agg.begin() + b * M, agg.begin() + (b + 1) * M);
  }
  ch.fronthaul = fh;
  return ch;
}

Mat const_cache(int F, int B, double l) { return Mat(F, B, l); }

}  // namespace

TEST_CASE("achieved SINR closed forms") {
  auto s = unit_noise_scenario(1, 2, 1, "sinr_target_db = 10\n");
  // h = (1, 0), two contents requested by the two users
  std::vector<CVec> edge = {{cd(1, 0), cd(0, 0)}, {cd(0, 0), cd(1, 0)}};
  std::vector<CMat> fh(1, CMat(1, 2));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}, {1, 1}});
  auto inst = make_instance(s, ch, batch, const_cache(3, 1, 1.0));

  TransmissionPolicy p;
  p.contents = {0, 1};
  p.clustering = Mat(2, 1, 1.0);
  p.unicast = false;
  // v0 aligned with h0, squared norm 10; v1 orthogonal to h0
  p.edge_beams = {{{cd(std::sqrt(10.0), 0), cd(0, 0)}},
                  {{cd(0, 0), cd(1, 0)}}};
  p.fh_beams = {CVec(1, cd(0, 0)), CVec(1, cd(0, 0))};
  p.fh_rate_bps = {0.0, 0.0};
  CHECK(achieved_sinr(inst, p, 0, 0) == doctest::Approx(10.0).epsilon(1e-12));

  // user 0 sees v1 orthogonal to h0: no interference; now make v1 = h0-aligned
  p.edge_beams[1][0] = {cd(1, 0), cd(0, 0)};  // |h0^H v1|^2 = 1
  p.edge_beams[0][0] = {cd(2, 0), cd(0, 0)};  // |h0^H v0|^2 = 4
  CHECK(achieved_sinr(inst, p, 0, 0) == doctest::Approx(2.0).epsilon(1e-12));

  // beam orthogonal to the channel
  p.edge_beams[0][0] = {cd(0, 0), cd(3, 0)};
  CHECK(achieved_sinr(inst, p, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("minimum fronthaul rate floor") {
  std::vector<double> l1 = {1.0, 1.0}, e1 = {1.0, 1.0};
  CHECK(min_required_fh_rate(l1, e1, 10.0) == doctest::Approx(0.0));
  std::vector<double> l0 = {0.0}, e0 = {1.0};
  CHECK(min_required_fh_rate(l0, e0, 10.0) == doctest::Approx(10.0));
  std::vector<double> lm = {0.3, 0.6}, em = {1.0, 1.0};
  CHECK(min_required_fh_rate(lm, em, 10.0) == doctest::Approx(7.0));
  std::vector<double> eoff = {1.0, 0.0};
  CHECK(min_required_fh_rate(lm, eoff, 10.0) == doctest::Approx(7.0));
}

TEST_CASE("buffering time") {
  std::vector<double> l = {0.0}, e = {1.0};
  // R_fh = (1-l) R_f exactly -> zero
  CHECK(buffering_time(l, e, 1e7, 1e7, 1e6) == doctest::Approx(0.0));
  std::vector<double> lfull = {1.0};
  CHECK(buffering_time(lfull, e, 0.0, 1e7, 1e6) == doctest::Approx(0.0));
  CHECK(buffering_time(l, e, 5e6, 1e7, 1e6) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("binary-push linearization coefficients") {
  auto s = unit_noise_scenario(1, 1, 1, "");
  std::vector<CVec> edge = {{cd(10, 0)}, {cd(0, 10)}};
  std::vector<CMat> fh(1, CMat(1, 1));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  auto inst = make_instance(s, ch, batch, const_cache(3, 1, 1.0));
  auto lay = make_layout(inst, false);

  ShortTermPoint psi;
  psi.edge_beam = {CVec(1, cd(0.1, 0))};
  psi.fh_beam = {CVec(1, cd(0, 0))};
  psi.clustering = Mat(1, 1, 0.5);
  psi.slack = Mat(1, 1, 0.3);
  psi.rate = {0.0};
  psi.slack_norm_epi = 0.5;

  auto p = build_ccp_subproblem(inst, lay, psi, 1.0);
  // the push constraint is the first linear one: e0^2 - (2 e0 - 1) e - e' <= 0
  const auto& push = p.lin[0].expr;
  CHECK(push.offset == doctest::Approx(0.25));
  // coefficient on e vanishes at e0 = 0.5
  CHECK(push.coef[0] == doctest::Approx(0.0));
  CHECK(push.coef[1] == doctest::Approx(-1.0));

  psi.clustering(0, 0) = 1.0;
  auto p2 = build_ccp_subproblem(inst, lay, psi, 1.0);
  const auto& push2 = p2.lin[0].expr;
  CHECK(push2.offset == doctest::Approx(1.0));
  CHECK(push2.coef[0] == doctest::Approx(-1.0));  // -(2*1-1) e
  CHECK(push2.coef[1] == doctest::Approx(-1.0));
}

TEST_CASE("expansion point stays feasible for its own subproblem") {
  auto s = unit_noise_scenario(2, 2, 2,
                               "sinr_target_db = 7\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  Rng dummy(0);
  std::vector<CVec> edge = {
      {cd(4, 1), cd(0, 2), cd(1, -1), cd(2, 0)},
      {cd(-1, 2), cd(3, 0), cd(0, 1), cd(-2, 1)},
  };
  std::vector<CMat> fh(2, CMat(2, 2));
  fh[0](0, 0) = cd(4, 0);
  fh[0](1, 1) = cd(3, 1);
  fh[1](0, 0) = cd(2, -2);
  fh[1](1, 0) = cd(1, 1);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}, {1, 1}});
  auto inst = make_instance(s, ch, batch, const_cache(3, 2, 0.4));

  Mat ones(2, 2, 1.0);
  auto probe = solve_fixed_clustering(inst, ones, false, nullptr);
  REQUIRE(probe.feasible);

  ShortTermPoint psi;
  psi.edge_beam = probe.edge_beam;
  psi.fh_beam = probe.fh_beam;
  psi.clustering = ones;
  psi.slack = Mat(2, 2, 0.0);
  psi.rate = probe.rate_units;
  psi.slack_norm_epi = 0.0;

  auto lay = make_layout(inst, false);
  auto sp = build_ccp_subproblem(inst, lay, psi, 3.0);
  auto x = pack_point(lay, psi);
  CHECK(sp.max_violation(x) <= 1e-6);
}

TEST_CASE("fully cached single user matches matched filtering") {
  auto s = unit_noise_scenario(1, 2, 1, "sinr_target_db = 10\n");
  std::vector<CVec> edge = {{cd(8, 0), cd(6, 0)}, {cd(0, 1), cd(1, 0)}};
  std::vector<CMat> fh(1, CMat(1, 2));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  ShortTermParams params;
  auto res = solve_short_term(s, ch, batch, const_cache(3, 1, 1.0), params);
  REQUIRE(res.status == ShortTermStatus::Ok);
  // ||h||^2 = 100, gamma = 10, sigma^2 = 1 -> power = 2.7 * 10 / 100
  CHECK(res.policy.power_w == doctest::Approx(0.27).epsilon(0.01));
  CHECK(res.policy.fh_power_w == doctest::Approx(0.0).epsilon(1e-10));
  auto inst = make_instance(s, ch, batch, const_cache(3, 1, 1.0));
  CHECK(check_policy(inst, res.policy).worst() <= 1e-6);
}

TEST_CASE("uncached single link adds the closed-form fronthaul power") {
  auto s = unit_noise_scenario(1, 1, 1,
                               "sinr_target_db = 10\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  std::vector<CVec> edge = {{cd(10, 0)}, {cd(0, 1)}};
  std::vector<CMat> fh(1, CMat(1, 1));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  ShortTermParams params;
  auto res = solve_short_term(s, ch, batch, const_cache(3, 1, 0.0), params);
  REQUIRE(res.status == ShortTermStatus::Ok);
  const double edge_power = 2.7 * 10.0 / 100.0;
  const double rho = std::log2(11.0);  // R_f / B2
  const double fh_power = 4.0 * (std::exp2(rho) - 1.0) / 25.0;
  CHECK(res.policy.edge_power_w == doctest::Approx(edge_power).epsilon(0.01));
  CHECK(res.policy.fh_power_w == doctest::Approx(fh_power).epsilon(0.01));
  CHECK(res.policy.fh_rate_bps[0] == doctest::Approx(1e6 * rho).epsilon(1e-9));
}

TEST_CASE("ccp objective descends at fixed lambda and satisfies constraints") {
  auto s = unit_noise_scenario(2, 2, 2,
                               "sinr_target_db = 8\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  std::vector<CVec> edge = {
      {cd(5, 1), cd(1, 2), cd(2, -1), cd(3, 0)},
      {cd(-2, 2), cd(4, 0), cd(1, 1), cd(-1, 2)},
  };
  std::vector<CMat> fh(2, CMat(2, 2));
  fh[0](0, 0) = cd(6, 0);
  fh[0](1, 1) = cd(3, 2);
  fh[1](0, 0) = cd(4, -2);
  fh[1](1, 1) = cd(5, 1);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}, {1, 1}});
  Mat cache(3, 2, 0.5);
  ShortTermParams params;
  params.init_seed = 3;
  auto res = solve_short_term(s, ch, batch, cache, params);
  REQUIRE(res.status == ShortTermStatus::Ok);
  REQUIRE(res.diag.objective_history.size() >= 2);
  for (size_t i = 1; i < res.diag.objective_history.size(); ++i) {
    if (res.diag.lambda_history[i] == res.diag.lambda_history[i - 1])
      CHECK(res.diag.objective_history[i] <=
            res.diag.objective_history[i - 1] + 1e-6);
  }
  auto inst = make_instance(s, ch, batch, cache);
  CHECK(check_policy(inst, res.policy).worst() <= 1e-6);
  // clustering is binary
  for (int j = 0; j < 2; ++j)
    for (int b = 0; b < 2; ++b) {
      const double e = res.policy.clustering(j, b);
      CHECK((e == 0.0 || e == 1.0));
    }
}

TEST_CASE("raising cache fractions never raises the fixed-clustering power") {
  auto s = unit_noise_scenario(2, 2, 2,
                               "sinr_target_db = 8\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  std::vector<CVec> edge = {
      {cd(5, 1), cd(1, 2), cd(2, -1), cd(3, 0)},
      {cd(-2, 2), cd(4, 0), cd(1, 1), cd(-1, 2)},
  };
  std::vector<CMat> fh(2, CMat(2, 2));
  fh[0](0, 0) = cd(6, 0);
  fh[1](0, 0) = cd(4, -2);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}, {1, 1}});
  Mat ones(2, 2, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double l : {0.0, 0.4, 0.8, 1.0}) {
    auto inst = make_instance(s, ch, batch, const_cache(3, 2, l));
    auto fx = solve_fixed_clustering(inst, ones, false, nullptr);
    REQUIRE(fx.feasible);
    CHECK(fx.objective_w <= prev + 1e-6);
    prev = fx.objective_w;
  }
}

TEST_CASE("unicast equals multicast for singleton clusters") {
  auto s = unit_noise_scenario(1, 1, 1,
                               "sinr_target_db = 10\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  std::vector<CVec> edge = {{cd(10, 0)}, {cd(0, 1)}};
  std::vector<CMat> fh(1, CMat(1, 1));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  auto inst = make_instance(s, ch, batch, const_cache(3, 1, 0.3));
  Mat one(1, 1, 1.0);
  auto mc = solve_fixed_clustering(inst, one, false, nullptr);
  auto uc = solve_fixed_clustering(inst, one, true, nullptr);
  REQUIRE(mc.feasible);
  REQUIRE(uc.feasible);
  CHECK(mc.objective_w == doctest::Approx(uc.objective_w).epsilon(1e-4));
}

TEST_CASE("unicast doubles fronthaul power on identical links") {
  auto s = unit_noise_scenario(2, 1, 2,
                               "sinr_target_db = 6\nedge_bandwidth_hz = 1e6\n"
                               "fh_bandwidth_hz = 1e6\n");
  std::vector<CVec> edge = {
      {cd(9, 0), cd(7, 2)},
      {cd(1, -2), cd(8, 1)},
  };
  CMat H(2, 1);
  H(0, 0) = cd(4, 1);
  H(1, 0) = cd(-2, 3);
  std::vector<CMat> fh = {H, H};  // identical fronthaul channels
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  auto inst = make_instance(s, ch, batch, const_cache(3, 2, 0.0));
  Mat both(1, 2, 1.0);
  auto mc = solve_fixed_clustering(inst, both, false, nullptr);
  auto uc = solve_fixed_clustering(inst, both, true, nullptr);
  REQUIRE(mc.feasible);
  REQUIRE(uc.feasible);
  auto fh_power = [&](const FixedClusteringResult& r, bool unicast) {
    double p = 0.0;
    if (unicast) {
      for (const auto& row : r.fh_link)
        for (const auto& w : row)
          p += cscn::kernels::cnormsq(w.data(), w.size());
    } else {
      for (const auto& w : r.fh_beam)
        p += cscn::kernels::cnormsq(w.data(), w.size());
    }
    return p;
  };
  const double pm = fh_power(mc, false), pu = fh_power(uc, true);
  CHECK(pu == doctest::Approx(2.0 * pm).epsilon(1e-3));

  // fully cached: both routes need no fronthaul at all
  auto instc = make_instance(s, ch, batch, const_cache(3, 2, 1.0));
  auto mcc = solve_fixed_clustering(instc, both, false, nullptr);
  auto ucc = solve_fixed_clustering(instc, both, true, nullptr);
  REQUIRE(mcc.feasible);
  REQUIRE(ucc.feasible);
  CHECK(fh_power(mcc, false) == doctest::Approx(0.0));
  CHECK(fh_power(ucc, true) == doctest::Approx(0.0));
}

TEST_CASE("infeasible frame is reported") {
  // SINR target far above what unit power through a weak channel can reach
  auto s = unit_noise_scenario(1, 1, 1, "sinr_target_db = 30\n");
  std::vector<CVec> edge = {{cd(0.1, 0)}, {cd(0, 0.1)}};
  std::vector<CMat> fh(1, CMat(1, 1));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  ShortTermParams params;
  auto res = solve_short_term(s, ch, batch, const_cache(3, 1, 1.0), params);
  CHECK(res.status == ShortTermStatus::Infeasible);
}

TEST_CASE("empty batch yields an empty zero-power policy") {
  auto s = unit_noise_scenario(1, 1, 1, "");
  std::vector<CVec> edge = {{cd(1, 0)}, {cd(0, 1)}};
  std::vector<CMat> fh(1, CMat(1, 1));
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {});
  ShortTermParams params;
  auto res = solve_short_term(s, ch, batch, const_cache(3, 1, 0.5), params);
  REQUIRE(res.status == ShortTermStatus::Ok);
  CHECK(res.policy.power_w == 0.0);
}

TEST_CASE("policy csv dump") {
  auto s = unit_noise_scenario(1, 2, 1, "sinr_target_db = 10\n");
  std::vector<CVec> edge = {{cd(8, 0), cd(6, 0)}, {cd(0, 1), cd(1, 0)}};
  std::vector<CMat> fh(1, CMat(1, 2));
  fh[0](0, 0) = cd(5, 0);
  auto ch = manual_channels(s, edge, fh);
  auto batch = batch_from_requests(0, {{0, 0}});
  ShortTermParams params;
  auto res = solve_short_term(s, ch, batch, const_cache(3, 1, 1.0), params);
  REQUIRE(res.status == ShortTermStatus::Ok);
  auto inst = make_instance(s, ch, batch, const_cache(3, 1, 1.0));
  std::ostringstream os;
  write_policy_csv(os, inst, res.policy);
  const std::string out = os.str();
  CHECK(out.find("record,f,b_or_k,e,") != std::string::npos);
  CHECK(out.find("cluster,0,0,1,") != std::string::npos);
  CHECK(out.find("sinr,0,0,") != std::string::npos);
}
