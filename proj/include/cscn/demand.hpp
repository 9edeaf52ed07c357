#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "cscn/scenario.hpp"

namespace cscn {

// A Zipf preference pattern: probability of content f is
// c_i * zeta_{i,f}^{-kappa_i} with zeta the rank of f in this pattern.
struct PreferencePattern {
  int id = 0;
  std::vector<int> rank;  // zeta_{i,f}, values 1..F
  double kappa = 1.0;
  std::vector<double> prob;  // normalized
};

struct MulticastGroup {
  int content = 0;
  std::vector<int> users;
};

struct RequestBatch {
  int frame = 0;
  std::vector<std::pair<int, int>> requests;  // (user k, content f)
  std::vector<MulticastGroup> groups;         // one per requested content

  bool empty() const { return requests.empty(); }
};

// Random rank order, kappa ~ Uniform[1,3] per pattern.
std::vector<PreferencePattern> build_patterns(int num_patterns, int num_contents,
                                              Rng& rng);

// Pattern with explicit ranks/skew, used by tests and replays.
PreferencePattern make_pattern(int id, std::vector<int> rank, double kappa);

// Default user->pattern assignment: batches of users_per_pattern in index
// order; users beyond num_patterns * users_per_pattern wrap around.
std::vector<int> default_user_assignment(const Scenario& s);

// Each user is active with probability p_active and then draws one content
// from its pattern; users sharing a content form one multicast group.
RequestBatch sample_requests(const Scenario& s,
                             std::span<const PreferencePattern> patterns,
                             std::span<const int> user_pattern, int frame,
                             std::uint64_t seed);

// groups/ordering rebuilt from a plain (user, content) list
RequestBatch batch_from_requests(int frame,
                                 std::vector<std::pair<int, int>> requests);

// request trace (t,k,f) export / import for fair policy comparisons
void write_request_trace_csv(std::ostream& os,
                             const std::vector<RequestBatch>& frames);
std::vector<RequestBatch> read_request_trace_csv(std::istream& is);

}  // namespace cscn
