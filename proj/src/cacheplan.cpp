#include "cscn/cacheplan.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "cscn/parallel.hpp"
#include "cscn/textio.hpp"

namespace cscn {

using conic::Affine;

void write_cache_csv(std::ostream& os, const CacheAllocation& a) {
  os << "# algorithm=" << a.algorithm << " block=" << a.block_id
     << " seed=" << a.seed << '\n';
  os << "f,b,l\n";
  for (int f = 0; f < a.l.rows; ++f)
    for (int b = 0; b < a.l.cols; ++b)
      os << f << ',' << b << ',' << fmt_double(a.l(f, b)) << '\n';
}

CacheAllocation read_cache_csv(std::istream& is) {
  CacheAllocation a;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# algorithm=", 0) != 0)
    throw std::runtime_error("cache csv: bad header");
  {
    auto fields = split(line.substr(2), ' ');
    for (const auto& f : fields) {
      auto eq = f.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = f.substr(0, eq), val = f.substr(eq + 1);
      if (key == "algorithm") a.algorithm = val;
      if (key == "block") a.block_id = std::stoi(val);
      if (key == "seed") a.seed = std::stoull(val);
    }
  }
  if (!std::getline(is, line) || trim(line) != "f,b,l")
    throw std::runtime_error("cache csv: bad column header");
  std::vector<std::tuple<int, int, double>> entries;
  int maxf = -1, maxb = -1;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 3) throw std::runtime_error("cache csv: bad row");
    entries.emplace_back(std::stoi(cols[0]), std::stoi(cols[1]),
                         std::stod(cols[2]));
    maxf = std::max(maxf, std::get<0>(entries.back()));
    maxb = std::max(maxb, std::get<1>(entries.back()));
  }
  a.l = Mat(maxf + 1, maxb + 1);
  for (auto& [f, b, v] : entries) a.l(f, b) = v;
  return a;
}

CacheAllocation uc_allocation(const Scenario& s) {
  CacheAllocation a;
  a.algorithm = "UC";
  a.l = Mat(s.num_contents, s.num_sbs, s.mu);
  return a;
}

// ---------------------------------------------------------------------------
// epigraph linear programs
// ---------------------------------------------------------------------------

namespace {

// shared LP core for the cache-update objectives:
//   minimize sum_r y_r,  y_r >= weight_{r,b} (1 - l_{f_r, b})  for b in set,
// subject to the per-SBS storage budget and the box on l.
// weights are pre-scaled by the caller to O(1).
struct FloorTerm {
  int content = 0;
  std::vector<std::pair<int, double>> branches;  // (b, weight)
};

Mat solve_floor_lp(const Scenario& s, const std::vector<FloorTerm>& terms) {
  const int F = s.num_contents, B = s.num_sbs;
  conic::Problem p;
  for (int f = 0; f < F; ++f)
    for (int b = 0; b < B; ++b) p.add_var(0.0, 1.0);  // l, row-major
  auto l_var = [&](int f, int b) { return f * B + b; };
  for (size_t r = 0; r < terms.size(); ++r) p.add_var(0.0);
  auto y_var = [&](size_t r) { return F * B + int(r); };

  for (size_t r = 0; r < terms.size(); ++r) {
    p.obj_linear.add(y_var(r), 1.0);
    for (const auto& [b, w] : terms[r].branches) {
      // w (1 - l) - y <= 0
      conic::LinearConstraint lc;
      lc.expr.offset = w;
      lc.expr.add(l_var(terms[r].content, b), -w);
      lc.expr.add(y_var(r), -1.0);
      p.lin.push_back(std::move(lc));
    }
  }
  // tiny pull toward empty caches so unused capacity is not smeared across
  // contents that never appear in any floor term
  for (int f = 0; f < F; ++f)
    for (int b = 0; b < B; ++b) p.obj_linear.add(l_var(f, b), 1e-11);

  const double cap = s.cache_capacity_bits;
  for (int b = 0; b < B; ++b) {
    conic::LinearConstraint lc;
    lc.expr.offset = -1.0;  // scaled by the budget
    for (int f = 0; f < F; ++f)
      lc.expr.add(l_var(f, b), s.content_size_bits[size_t(f)] / std::max(cap, 1e-30));
    if (cap <= 0.0) {
      // zero budget: force l = 0 via the box
      for (int f = 0; f < F; ++f) p.upper[size_t(l_var(f, b))] = 0.0;
      continue;
    }
    p.lin.push_back(std::move(lc));
  }

  conic::Settings st;
  st.feas_tol = 1e-9;
  st.opt_tol = 1e-12;
  st.max_newton = 4000;
  auto sol = conic::solve(p, st);
  Mat l(F, B, 0.0);
  if (!sol.x.empty())
    for (int f = 0; f < F; ++f)
      for (int b = 0; b < B; ++b)
        l(f, b) = std::clamp(sol.x[size_t(l_var(f, b))], 0.0, 1.0);
  // entries that appear in no floor term have zero objective weight; holding
  // them empty is exactly optimal and frees the budget
  Mat touched(F, B, 0.0);
  for (const auto& t : terms)
    for (const auto& [b, w] : t.branches) touched(t.content, b) = 1.0;
  for (int f = 0; f < F; ++f)
    for (int b = 0; b < B; ++b)
      if (touched(f, b) == 0.0) l(f, b) = 0.0;
  return l;
}

double rate_scale(const Scenario& s) {
  double m = 0.0;
  for (double r : s.edge_rate_bps) m = std::max(m, r);
  return m > 0 ? m : 1.0;
}

}  // namespace

Mat solve_p2(const Scenario& s, const BlockHistory& history) {
  const double scale = rate_scale(s);
  std::vector<FloorTerm> terms;
  for (const auto& rec : history.frames) {
    if (!rec.feasible) continue;
    for (int j = 0; j < int(rec.policy.contents.size()); ++j) {
      FloorTerm t;
      t.content = rec.policy.contents[size_t(j)];
      for (int b = 0; b < s.num_sbs; ++b)
        if (rec.policy.clustering(j, b) >= 0.5)
          t.branches.emplace_back(
              b, s.edge_rate_bps[size_t(t.content)] / scale);
      if (!t.branches.empty()) terms.push_back(std::move(t));
    }
  }
  return solve_floor_lp(s, terms);
}

LocalPreference estimate_local_preference(const Scenario& s,
                                          const BlockHistory& history) {
  const int F = s.num_contents, B = s.num_sbs;
  LocalPreference lp;
  lp.q = Mat(F, B, 0.0);
  lp.uniform.assign(size_t(B), false);
  Mat counts(F, B, 0.0);
  for (const auto& rec : history.frames) {
    if (!rec.feasible) continue;
    for (int j = 0; j < int(rec.policy.contents.size()); ++j) {
      const int f = rec.policy.contents[size_t(j)];
      // requests for f in this frame
      double n = 0.0;
      for (const auto& g : rec.batch.groups)
        if (g.content == f) n = double(g.users.size());
      for (int b = 0; b < B; ++b)
        if (rec.policy.clustering(j, b) >= 0.5) counts(f, b) += n;
    }
  }
  for (int b = 0; b < B; ++b) {
    double denom = 0.0;
    for (int f = 0; f < F; ++f) denom += counts(f, b);
    if (denom <= 0.0) {
      lp.uniform[size_t(b)] = true;
      for (int f = 0; f < F; ++f) lp.q(f, b) = 1.0 / double(F);
    } else {
      for (int f = 0; f < F; ++f) lp.q(f, b) = counts(f, b) / denom;
    }
  }
  return lp;
}

CacheAllocation lc_pcud(const Scenario& s, const BlockHistory& history,
                        int block_id, std::uint64_t seed) {
  LocalPreference lp = estimate_local_preference(s, history);
  const double scale = rate_scale(s);
  std::vector<FloorTerm> terms;
  for (int f = 0; f < s.num_contents; ++f) {
    FloorTerm t;
    t.content = f;
    for (int b = 0; b < s.num_sbs; ++b)
      if (lp.q(f, b) > 0.0)
        t.branches.emplace_back(
            b, lp.q(f, b) * s.edge_rate_bps[size_t(f)] / scale);
    if (!t.branches.empty()) terms.push_back(std::move(t));
  }
  CacheAllocation a;
  a.algorithm = "LC-PCUD";
  a.block_id = block_id;
  a.seed = seed;
  a.l = solve_floor_lp(s, terms);
  return a;
}

// ---------------------------------------------------------------------------
// Algorithm 2: inexact BCD over transmission policies and the cache matrix
// ---------------------------------------------------------------------------

PcudResult pcud(const Scenario& s, const BlockHistory& history,
                const Mat& initial_l, const PcudParams& params) {
  PcudResult res;
  res.alloc.algorithm = params.unicast ? "TS-FUC" : "PCUD";
  res.alloc.l = initial_l;

  std::vector<int> active;  // indices of frames with requests
  for (size_t i = 0; i < history.frames.size(); ++i)
    if (!history.frames[i].batch.empty()) active.push_back(int(i));
  if (active.empty()) {
    res.dropped_frames = 0;
    return res;  // nothing observed; keep the initial allocation
  }

  Mat l = initial_l;
  std::vector<TransmissionPolicy> policies(history.frames.size());
  std::vector<bool> feasible(history.frames.size(), false);
  std::vector<TransmissionPolicy> best_policies;
  std::vector<bool> best_feasible;
  Mat best_l = l;
  double best_obj = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < params.max_outer; ++outer) {
    // (a) re-optimize every frame under the current cache matrix
    std::vector<double> frame_power(history.frames.size(), 0.0);
    auto solve_frame = [&](int ai) {
      const int i = active[size_t(ai)];
      const auto& rec = history.frames[size_t(i)];
      ShortTermParams stp = params.short_term;
      stp.init_seed = seed_mix(params.short_term.init_seed, 0xa17ULL,
                               std::uint64_t(rec.batch.frame));
      if (outer > 0 && feasible[size_t(i)]) {
        stp.fixed_clustering0 = policies[size_t(i)].clustering;
        stp.penalty_start_max = true;
        auto inst0 = make_instance(s, rec.channels, rec.batch, l);
        auto ws = std::make_shared<ShortTermPoint>();
        const int B = s.num_sbs, M = s.sbs_antennas;
        const auto& pol = policies[size_t(i)];
        for (int j = 0; j < inst0.num_rows; ++j) {
          CVec agg(size_t(B) * size_t(M), cd{0, 0});
          for (int b = 0; b < B; ++b)
            for (int m = 0; m < M; ++m)
              agg[size_t(b * M + m)] = pol.edge_beams[size_t(j)][size_t(b)][size_t(m)];
          ws->edge_beam.push_back(std::move(agg));
          ws->rate.push_back(pol.fh_rate_bps[size_t(j)] / s.fh_bandwidth_hz);
        }
        ws->fh_beam = pol.fh_beams;
        ws->fh_link = pol.fh_beams_link;
        ws->rate_link = Mat(inst0.num_rows, B, 0.0);
        if (params.unicast)
          for (int j = 0; j < inst0.num_rows; ++j)
            for (int b = 0; b < B; ++b)
              ws->rate_link(j, b) = (1.0 - inst0.cached(j, b)) *
                                    inst0.rate_units[size_t(j)] *
                                    (pol.clustering(j, b) >= 0.5 ? 1.0 : 0.0);
        stp.warm_start = ws;
      }
      auto r = params.unicast
                   ? solve_short_term_unicast(s, rec.channels, rec.batch, l, stp)
                   : solve_short_term(s, rec.channels, rec.batch, l, stp);
      bool ok = r.status == ShortTermStatus::Ok;
      if (ok) {
        policies[size_t(i)] = r.policy;
        feasible[size_t(i)] = true;
        frame_power[size_t(i)] = r.policy.power_w;
      } else {
        feasible[size_t(i)] = false;
      }
    };
    parallel_for(int(active.size()), solve_frame, params.threads);

    double obj = 0.0;
    for (size_t i = 0; i < history.frames.size(); ++i)
      if (feasible[i]) obj += frame_power[i];

    if (obj > best_obj * (1.0 + 1e-9)) break;  // no descent: keep the best pair
    res.outer_objectives.push_back(obj);
    ++res.outer_iterations;
    const bool converged =
        std::isfinite(best_obj) &&
        best_obj - obj < params.stop_tol * std::max(1.0, best_obj);
    best_obj = obj;
    best_l = l;
    best_policies = policies;
    best_feasible = feasible;
    if (converged || outer == params.max_outer - 1) break;

    // (b) cache update against the current clusterings; the next round
    // validates it before it can become the output
    BlockHistory cur;
    for (size_t i = 0; i < history.frames.size(); ++i) {
      FrameRecord rec = history.frames[i];
      rec.policy = policies[i];
      rec.feasible = feasible[i];
      cur.frames.push_back(std::move(rec));
    }
    l = solve_p2(s, cur);
  }

  res.alloc.l = best_l;
  res.final_policies = best_policies;
  res.frame_feasible = best_feasible;
  for (int i : active)
    if (!best_feasible[size_t(i)]) ++res.dropped_frames;
  return res;
}

// ---------------------------------------------------------------------------
// LRU baseline
// ---------------------------------------------------------------------------

void lru_update(LruState& state, const Scenario& s,
                const TransmissionPolicy& policy) {
  for (int j = 0; j < int(policy.contents.size()); ++j) {
    const int f = policy.contents[size_t(j)];
    if (s.content_size_bits[size_t(f)] > s.cache_capacity_bits) {
      ++state.skipped_oversize;
      continue;
    }
    for (int b = 0; b < s.num_sbs; ++b) {
      if (policy.clustering(j, b) < 0.5) continue;
      auto& order = state.recency[size_t(b)];
      order.remove(f);
      order.push_front(f);
      double used = 0.0;
      for (int g : order) used += s.content_size_bits[size_t(g)];
      while (used > s.cache_capacity_bits && !order.empty()) {
        used -= s.content_size_bits[size_t(order.back())];
        order.pop_back();
      }
    }
  }
}

CacheAllocation lru_allocation(const LruState& state, const Scenario& s) {
  CacheAllocation a;
  a.algorithm = "LRU";
  a.l = Mat(s.num_contents, s.num_sbs, 0.0);
  for (int b = 0; b < s.num_sbs; ++b)
    for (int f : state.recency[size_t(b)]) a.l(f, b) = 1.0;
  return a;
}

}  // namespace cscn
