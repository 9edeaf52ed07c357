#include "cscn/demand.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "cscn/textio.hpp"

namespace cscn {

namespace {
constexpr std::uint64_t kRequestStream = 0x72657173ULL;
}

PreferencePattern make_pattern(int id, std::vector<int> rank, double kappa) {
  PreferencePattern p;
  p.id = id;
  p.rank = std::move(rank);
  p.kappa = kappa;
  p.prob.resize(p.rank.size());
  double norm = 0.0;
  for (size_t f = 0; f < p.rank.size(); ++f) {
    p.prob[f] = std::pow(double(p.rank[f]), -kappa);
    norm += p.prob[f];
  }
  for (auto& v : p.prob) v /= norm;
  return p;
}

std::vector<PreferencePattern> build_patterns(int num_patterns,
                                              int num_contents, Rng& rng) {
  std::vector<PreferencePattern> out;
  out.reserve(size_t(num_patterns));
  for (int i = 0; i < num_patterns; ++i) {
    std::vector<int> rank(static_cast<size_t>(num_contents));
    for (int f = 0; f < num_contents; ++f) rank[size_t(f)] = f + 1;
    // Fisher-Yates
    for (int f = num_contents - 1; f > 0; --f)
      std::swap(rank[size_t(f)], rank[size_t(rng.below(std::uint64_t(f) + 1))]);
    const double kappa = rng.uniform(1.0, 3.0);
    out.push_back(make_pattern(i, std::move(rank), kappa));
  }
  return out;
}

std::vector<int> default_user_assignment(const Scenario& s) {
  std::vector<int> a(size_t(s.num_users));
  for (int k = 0; k < s.num_users; ++k)
    a[size_t(k)] = (k / s.users_per_pattern) % s.num_patterns;
  return a;
}

RequestBatch batch_from_requests(int frame,
                                 std::vector<std::pair<int, int>> requests) {
  RequestBatch b;
  b.frame = frame;
  b.requests = std::move(requests);
  std::map<int, std::vector<int>> by_content;
  for (const auto& [k, f] : b.requests) by_content[f].push_back(k);
  for (auto& [f, users] : by_content) {
    std::sort(users.begin(), users.end());
    b.groups.push_back({f, std::move(users)});
  }
  return b;
}

RequestBatch sample_requests(const Scenario& s,
                             std::span<const PreferencePattern> patterns,
                             std::span<const int> user_pattern, int frame,
                             std::uint64_t seed) {
  std::vector<std::pair<int, int>> requests;
  for (int k = 0; k < s.num_users; ++k) {
    Rng r(seed_mix(seed, kRequestStream, std::uint64_t(frame), std::uint64_t(k)));
    if (r.uniform01() >= s.p_active) continue;
    const auto& p = patterns[size_t(user_pattern[size_t(k)])];
    double u = r.uniform01();
    int f = int(p.prob.size()) - 1;
    double acc = 0.0;
    for (size_t i = 0; i < p.prob.size(); ++i) {
      acc += p.prob[i];
      if (u < acc) {
        f = int(i);
        break;
      }
    }
    requests.emplace_back(k, f);
  }
  return batch_from_requests(frame, std::move(requests));
}

void write_request_trace_csv(std::ostream& os,
                             const std::vector<RequestBatch>& frames) {
  os << "t,k,f\n";
  for (const auto& b : frames)
    for (const auto& [k, f] : b.requests)
      os << b.frame << ',' << k << ',' << f << '\n';
}

std::vector<RequestBatch> read_request_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "t,k,f")
    throw std::runtime_error("request trace: bad header");
  std::map<int, std::vector<std::pair<int, int>>> by_frame;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 3) throw std::runtime_error("request trace: bad row");
    by_frame[std::stoi(cols[0])].emplace_back(std::stoi(cols[1]),
                                              std::stoi(cols[2]));
  }
  std::vector<RequestBatch> out;
  for (auto& [t, reqs] : by_frame)
    out.push_back(batch_from_requests(t, std::move(reqs)));
  return out;
}

}  // namespace cscn
