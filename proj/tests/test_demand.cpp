#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "cscn/demand.hpp"

using namespace cscn;

TEST_CASE("zipf probabilities normalize the rank weights") {
  auto p = make_pattern(0, {1, 2, 3}, 1.0);
  CHECK(p.prob[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-12));
  CHECK(p.prob[1] == doctest::Approx(3.0 / 11.0).epsilon(1e-12));
  CHECK(p.prob[2] == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("zero skew is uniform") {
  auto p = make_pattern(0, {3, 1, 2, 4}, 0.0);
  for (double v : p.prob) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one for a large library") {
  std::vector<int> rank(100);
  for (int f = 0; f < 100; ++f) rank[size_t(f)] = 100 - f;
  auto p = make_pattern(0, rank, 1.5);
  double sum = 0.0;
  for (double v : p.prob) sum += v;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("built patterns have valid permutations and skew in [1,3]") {
  Rng rng(11);
  auto ps = build_patterns(5, 40, rng);
  REQUIRE(ps.size() == 5);
  for (const auto& p : ps) {
    CHECK(p.kappa >= 1.0);
    CHECK(p.kappa <= 3.0);
    std::vector<bool> seen(41, false);
    for (int r : p.rank) {
      REQUIRE(r >= 1);
      REQUIRE(r <= 40);
      CHECK_FALSE(seen[size_t(r)]);
      seen[size_t(r)] = true;
    }
  }
  // distinct patterns get distinct orders with overwhelming probability
  CHECK(ps[0].rank != ps[1].rank);
}

namespace {
Scenario demand_scenario(const std::string& extra) {
  return load_scenario(
      "num_sbs = 1\nnum_users = 12\nnum_contents = 6\n"
      "cp_antennas = 1\nsbs_antennas = 1\nnum_patterns = 3\n"
      "users_per_pattern = 4\n" +
      extra);
}
}  // namespace

TEST_CASE("degenerate pattern groups users deterministically") {
  auto s = demand_scenario("p_active = 1\n");
  s.num_users = 2;
  s.user_positions.resize(2);
  s.noise_edge_w.resize(2);
  std::vector<PreferencePattern> pats = {make_pattern(0, {1, 2, 3, 4, 5, 6}, 1.0)};
  pats[0].prob = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<int> assign = {0, 0};
  auto b = sample_requests(s, pats, assign, 0, 77);
  REQUIRE(b.requests.size() == 2);
  REQUIRE(b.groups.size() == 1);
  CHECK(b.groups[0].content == 0);
  CHECK(b.groups[0].users == std::vector<int>{0, 1});
}

TEST_CASE("inactive users produce an empty batch") {
  auto s = demand_scenario("p_active = 0\n");
  std::vector<PreferencePattern> pats = {make_pattern(0, {1, 2, 3, 4, 5, 6}, 1.0)};
  std::vector<int> assign(12, 0);
  auto b = sample_requests(s, pats, assign, 0, 77);
  CHECK(b.empty());
}

TEST_CASE("empirical frequencies match the pattern distribution") {
  auto s = demand_scenario("p_active = 0.5\n");
  Rng rng(3);
  auto pats = build_patterns(3, 6, rng);
  auto assign = default_user_assignment(s);
  std::vector<std::map<int, double>> counts(3);
  std::vector<double> totals(3, 0.0);
  for (int t = 0; t < 10000; ++t) {
    auto b = sample_requests(s, pats, assign, t, 55);
    for (const auto& [k, f] : b.requests) {
      counts[size_t(assign[size_t(k)])][f] += 1.0;
      totals[size_t(assign[size_t(k)])] += 1.0;
    }
  }
  for (int i = 0; i < 3; ++i) {
    double tv = 0.0;
    for (int f = 0; f < 6; ++f)
      tv += std::abs(counts[size_t(i)][f] / totals[size_t(i)] -
                     pats[size_t(i)].prob[size_t(f)]);
    CHECK(tv / 2.0 < 0.02);
  }
}

TEST_CASE("groups never exceed active users or library size") {
  auto s = demand_scenario("p_active = 0.8\n");
  Rng rng(9);
  auto pats = build_patterns(3, 6, rng);
  auto assign = default_user_assignment(s);
  for (int t = 0; t < 200; ++t) {
    auto b = sample_requests(s, pats, assign, t, 4);
    CHECK(int(b.groups.size()) <= std::min(int(b.requests.size()), 6));
    // each active user appears exactly once
    std::vector<int> seen;
    for (const auto& [k, f] : b.requests) seen.push_back(k);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  }
}

TEST_CASE("sampling is reproducible per (seed, frame)") {
  auto s = demand_scenario("p_active = 0.5\n");
  Rng rng(3);
  auto pats = build_patterns(3, 6, rng);
  auto assign = default_user_assignment(s);
  auto a = sample_requests(s, pats, assign, 17, 55);
  auto b = sample_requests(s, pats, assign, 17, 55);
  CHECK(a.requests == b.requests);
  auto c = sample_requests(s, pats, assign, 18, 55);
  CHECK(a.requests != c.requests);
}

TEST_CASE("request trace round-trips") {
  std::vector<RequestBatch> frames;
  frames.push_back(batch_from_requests(0, {{2, 1}, {0, 1}, {1, 4}}));
  frames.push_back(batch_from_requests(2, {{3, 0}}));
  std::ostringstream os;
  write_request_trace_csv(os, frames);
  std::istringstream is(os.str());
  auto back = read_request_trace_csv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0].frame == 0);
  CHECK(back[0].groups.size() == 2);
  CHECK(back[1].requests == frames[1].requests);
  // groups partition users by content
  CHECK(back[0].groups[0].content == 1);
  CHECK(back[0].groups[0].users == std::vector<int>{0, 2});
}
