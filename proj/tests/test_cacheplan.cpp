#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cscn/cacheplan.hpp"
#include "cscn/textio.hpp"
#include "lp_simplex.hpp"

using namespace cscn;

namespace {

Scenario toy_scenario(int B, int F, double capacity_bits,
                      const std::string& extra = "") {
  std::string sbs_pos = B == 1 ? "50,0" : "50,0,-50,0";
  return load_scenario(
      "num_sbs = " + std::to_string(B) + "\nnum_users = 2\nnum_contents = " +
      std::to_string(F) +
      "\ncp_antennas = 1\nsbs_antennas = 1\n"
      "content_size_bits = 1\ncache_capacity_bits = " +
      fmt_double(capacity_bits) +
      "\nnoise_edge_w = 1\nnoise_fh_w = 1\n"
      "sbs_positions = " + sbs_pos +
      "\nuser_positions = 50,40,-50,40\ncp_position = 0,-100\n" + extra);
}

// history with fixed clusterings: served[t] = (content, sbs mask, requests)
struct ServeEvent {
  int frame;
  int content;
  std::vector<int> sbs;
  int requests = 1;
};

BlockHistory history_from_events(const Scenario& s,
                                 const std::vector<ServeEvent>& events) {
  BlockHistory h;
  for (const auto& ev : events) {
    FrameRecord rec;
    std::vector<std::pair<int, int>> reqs;
    for (int r = 0; r < ev.requests; ++r) reqs.emplace_back(r, ev.content);
    rec.batch = batch_from_requests(ev.frame, reqs);
    rec.feasible = true;
    rec.policy.contents = {ev.content};
    rec.policy.clustering = Mat(1, s.num_sbs, 0.0);
    for (int b : ev.sbs) rec.policy.clustering(0, b) = 1.0;
    h.frames.push_back(std::move(rec));
  }
  return h;
}

}  // namespace

TEST_CASE("uniform caching fills every entry with mu") {
  auto s = toy_scenario(2, 4, 0.8);  // mu = 0.8/4 = 0.2
  auto a = uc_allocation(s);
  for (int f = 0; f < 4; ++f)
    for (int b = 0; b < 2; ++b) CHECK(a.l(f, b) == doctest::Approx(0.2));
  s.mu = 0.0;
  CHECK(uc_allocation(s).l(0, 0) == 0.0);
  s.mu = 1.0;
  CHECK(uc_allocation(s).l(0, 0) == 1.0);
}

TEST_CASE("cache update LP caches the most served content") {
  auto s = toy_scenario(1, 2, 1.0);
  auto h = history_from_events(
      s, {{0, 0, {0}}, {1, 0, {0}}, {2, 1, {0}}});  // content 0 twice, 1 once
  Mat l = solve_p2(s, h);
  CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(l(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
  // optimal objective equals one uncovered service of content 1
  const double R = s.edge_rate_bps[1];
  double obj = 0.0;
  for (const auto& rec : h.frames)
    for (int j = 0; j < 1; ++j) {
      std::vector<double> cached = {l(rec.policy.contents[0], 0)};
      std::vector<double> clus = {1.0};
      obj += min_required_fh_rate(cached, clus,
                                  s.edge_rate_bps[size_t(rec.policy.contents[0])]);
    }
  CHECK(obj == doctest::Approx(R).epsilon(1e-6));
}

TEST_CASE("ample capacity caches every served content fully") {
  auto s = toy_scenario(1, 3, 10.0);
  auto h = history_from_events(s, {{0, 0, {0}}, {1, 2, {0}}});
  Mat l = solve_p2(s, h);
  CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(l(2, 0) == doctest::Approx(1.0).epsilon(1e-7));
  // content never served keeps an empty slot
  CHECK(l(1, 0) <= 1e-6);
}

TEST_CASE("cache update LPs match the simplex vertex oracle") {
  // randomized small instances, F <= 4, B <= 2
  Rng rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const int F = 2 + int(rng.below(3));
    const int B = 1 + int(rng.below(2));
    const double cap = 1.0 + double(rng.below(2));
    auto s = toy_scenario(B, F, cap);
    std::vector<ServeEvent> events;
    const int T = 2 + int(rng.below(3));
    for (int t = 0; t < T; ++t) {
      ServeEvent ev;
      ev.frame = t;
      ev.content = int(rng.below(std::uint64_t(F)));
      for (int b = 0; b < B; ++b)
        if (rng.uniform01() < 0.7) ev.sbs.push_back(b);
      if (ev.sbs.empty()) ev.sbs.push_back(0);
      ev.requests = 1 + int(rng.below(2));
      events.push_back(ev);
    }
    auto h = history_from_events(s, events);
    Mat l = solve_p2(s, h);

    // the same objective evaluated by the independent simplex oracle
    double scale = 0.0;
    for (double r : s.edge_rate_bps) scale = std::max(scale, r);
    std::vector<std::vector<testlp::FloorBranch>> terms;
    for (const auto& ev : events) {
      std::vector<testlp::FloorBranch> t;
      for (int b : ev.sbs)
        t.push_back({ev.content, b, s.edge_rate_bps[size_t(ev.content)] / scale});
      terms.push_back(std::move(t));
    }
    auto oracle = testlp::floor_lp_oracle(
        F, B, std::vector<double>(size_t(F), 1.0), cap, terms);
    REQUIRE(oracle.ok);
    // value of the tested solution under the same objective
    double value = 0.0;
    for (const auto& ev : events) {
      double worst = 0.0;
      for (int b : ev.sbs)
        worst = std::max(worst, (1.0 - l(ev.content, b)) *
                                    s.edge_rate_bps[size_t(ev.content)] / scale);
      value += worst;
    }
    CHECK(value <= oracle.objective + 1e-9);
    CHECK(value >= oracle.objective - 1e-9);
  }
}

TEST_CASE("local preference ratios") {
  auto s = toy_scenario(1, 2, 1.0);
  // single frame: two requests for content 0, one for content 1, same SBS
  BlockHistory h;
  {
    FrameRecord rec;
    rec.batch = batch_from_requests(0, {{0, 0}, {1, 0}, {2, 1}});
    rec.feasible = true;
    rec.policy.contents = {0, 1};
    rec.policy.clustering = Mat(2, 1, 1.0);
    h.frames.push_back(rec);
  }
  auto lp = estimate_local_preference(s, h);
  CHECK(lp.q(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(lp.q(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(lp.uniform[0]);
}

TEST_CASE("local preference across frames and the uniform fallback") {
  auto s = toy_scenario(2, 2, 1.0);
  std::vector<ServeEvent> events = {{0, 0, {0}, 3}, {1, 1, {0}, 1}};
  auto h = history_from_events(s, events);
  auto lp = estimate_local_preference(s, h);
  CHECK(lp.q(0, 0) == doctest::Approx(0.75));
  CHECK(lp.q(1, 0) == doctest::Approx(0.25));
  // SBS 1 never served: uniform and flagged
  CHECK(lp.uniform[1]);
  CHECK(lp.q(0, 1) == doctest::Approx(0.5));
  double col = 0.0;
  for (int f = 0; f < 2; ++f) col += lp.q(f, 0);
  CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("learning-based update caches by preference mass") {
  auto s = toy_scenario(1, 2, 1.0);
  std::vector<ServeEvent> events = {{0, 0, {0}, 4}, {1, 1, {0}, 1}};
  auto h = history_from_events(s, events);
  auto a = lc_pcud(s, h);
  CHECK(a.l(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(a.l(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(a.algorithm == "LC-PCUD");
}

TEST_CASE("learning-based update under uniform preferences") {
  const int F = 4;
  auto s = toy_scenario(1, F, 2.0);  // mu = 0.5
  std::vector<ServeEvent> events;
  for (int f = 0; f < F; ++f) events.push_back({f, f, {0}, 1});
  auto h = history_from_events(s, events);
  auto a = lc_pcud(s, h);
  // objective value (1 - mu) R with equal rates and uniform preferences
  const double R = s.edge_rate_bps[0];
  double obj = 0.0;
  for (int f = 0; f < F; ++f) obj += 0.25 * (1.0 - a.l(f, 0)) * R;
  CHECK(obj == doctest::Approx((1.0 - 0.5) * R).epsilon(1e-7));
}

TEST_CASE("zero capacity leaves everything uncached") {
  auto s = toy_scenario(1, 3, 0.0);
  auto h = history_from_events(s, {{0, 0, {0}}, {1, 1, {0}}});
  auto a = lc_pcud(s, h);
  for (int f = 0; f < 3; ++f) CHECK(a.l(f, 0) == 0.0);
}

TEST_CASE("single-SBS preference update matches the greedy fill") {
  auto s = toy_scenario(1, 4, 2.0);
  std::vector<ServeEvent> events = {
      {0, 2, {0}, 5}, {1, 0, {0}, 3}, {2, 3, {0}, 2}, {3, 1, {0}, 1}};
  auto h = history_from_events(s, events);
  auto a = lc_pcud(s, h);
  // greedy: descending q' R with equal sizes -> cache contents 2 and 0
  CHECK(a.l(2, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.l(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.l(3, 0) + a.l(1, 0) <= 1e-5);
}

TEST_CASE("preference update is invariant to uniform demand scaling") {
  auto s = toy_scenario(2, 3, 1.0);
  std::vector<ServeEvent> events = {
      {0, 0, {0, 1}, 3}, {1, 1, {0}, 2}, {2, 2, {1}, 1}};
  auto h1 = history_from_events(s, events);
  // doubling every request count leaves the service frequencies unchanged
  std::vector<ServeEvent> doubled = events;
  for (auto& ev : doubled) ev.requests *= 2;
  auto h2 = history_from_events(s, doubled);
  auto a1 = lc_pcud(s, h1);
  auto a2 = lc_pcud(s, h2);
  for (size_t i = 0; i < a1.l.a.size(); ++i)
    CHECK(a1.l.a[i] == doctest::Approx(a2.l.a[i]).epsilon(1e-9));
}

TEST_CASE("lru keeps the most recently served whole contents") {
  auto s = toy_scenario(1, 4, 2.0);  // room for two unit contents
  LruState st;
  st.init(1);
  auto serve = [&](int f) {
    TransmissionPolicy p;
    p.contents = {f};
    p.clustering = Mat(1, 1, 1.0);
    lru_update(st, s, p);
  };
  serve(0);
  serve(1);
  serve(2);
  auto a = lru_allocation(st, s);
  CHECK(a.l(0, 0) == 0.0);
  CHECK(a.l(1, 0) == 1.0);
  CHECK(a.l(2, 0) == 1.0);
  // re-access content 1 then insert 3: cache = {1, 3}
  serve(1);
  serve(3);
  a = lru_allocation(st, s);
  CHECK(a.l(1, 0) == 1.0);
  CHECK(a.l(3, 0) == 1.0);
  CHECK(a.l(2, 0) == 0.0);
}

TEST_CASE("lru with zero capacity stays empty and oversize is skipped") {
  auto s = toy_scenario(1, 2, 0.0);
  LruState st;
  st.init(1);
  TransmissionPolicy p;
  p.contents = {0};
  p.clustering = Mat(1, 1, 1.0);
  lru_update(st, s, p);
  auto a = lru_allocation(st, s);
  CHECK(a.l(0, 0) == 0.0);
  CHECK(st.skipped_oversize == 1);
}

TEST_CASE("cache csv round trip") {
  CacheAllocation a;
  a.algorithm = "PCUD";
  a.block_id = 3;
  a.seed = 99;
  a.l = Mat(2, 2);
  a.l(0, 0) = 0.25;
  a.l(1, 1) = 1.0;
  std::ostringstream os;
  write_cache_csv(os, a);
  std::istringstream is(os.str());
  auto back = read_cache_csv(is);
  CHECK(back.algorithm == "PCUD");
  CHECK(back.block_id == 3);
  CHECK(back.seed == 99);
  CHECK(back.l.a == a.l.a);
}

TEST_CASE("block-coordinate descent caches the repeating content") {
  // one content requested every frame, cache holds exactly one content;
  // thermal noise so the sampled channels give workable SNR
  auto s = load_scenario(
      "num_sbs = 1\nnum_users = 2\nnum_contents = 2\n"
      "cp_antennas = 1\nsbs_antennas = 1\n"
      "content_size_bits = 1\ncache_capacity_bits = 1\n"
      "sbs_positions = 50,0\nuser_positions = 50,40,-50,40\ncp_position = 0,-100\n"
      "sinr_target_db = 5\nedge_bandwidth_hz = 1e6\nfh_bandwidth_hz = 1e6\n");
  BlockHistory h;
  for (int t = 0; t < 3; ++t) {
    FrameRecord rec;
    rec.batch = batch_from_requests(t, {{0, 0}});
    rec.channels = sample_channels(s, t, 5);
    h.frames.push_back(std::move(rec));
  }
  PcudParams params;
  auto res = pcud(s, h, uc_allocation(s).l, params);
  CHECK(res.alloc.l(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  REQUIRE(res.outer_objectives.size() >= 2);
  for (size_t i = 1; i < res.outer_objectives.size(); ++i)
    CHECK(res.outer_objectives[i] <= res.outer_objectives[i - 1] + 1e-6);
  CHECK(res.dropped_frames == 0);
}

TEST_CASE("empty history keeps the initial allocation") {
  auto s = toy_scenario(1, 2, 1.0);
  BlockHistory h;
  for (int t = 0; t < 2; ++t) {
    FrameRecord rec;
    rec.batch = batch_from_requests(t, {});
    h.frames.push_back(std::move(rec));
  }
  Mat init(2, 1, 0.5);
  PcudParams params;
  auto res = pcud(s, h, init, params);
  CHECK(res.alloc.l.a == init.a);
  CHECK(res.outer_iterations == 0);
}
