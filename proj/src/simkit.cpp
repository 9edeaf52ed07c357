#include "cscn/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cscn/parallel.hpp"
#include "cscn/rng.hpp"
#include "cscn/textio.hpp"

namespace cscn {

namespace k = cscn::kernels;

const char* policy_name(CachePolicy p) {
  switch (p) {
    case CachePolicy::UC: return "UC";
    case CachePolicy::LRU: return "LRU";
    case CachePolicy::PCUD: return "PCUD";
    case CachePolicy::LCPCUD: return "LC-PCUD";
    case CachePolicy::GAC: return "GAC";
    case CachePolicy::TSFUC: return "TS-FUC";
  }
  return "?";
}

std::optional<CachePolicy> parse_policy(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), ::toupper);
  if (up == "UC") return CachePolicy::UC;
  if (up == "LRU") return CachePolicy::LRU;
  if (up == "PCUD") return CachePolicy::PCUD;
  if (up == "LC-PCUD" || up == "LCPCUD") return CachePolicy::LCPCUD;
  if (up == "GAC") return CachePolicy::GAC;
  if (up == "TS-FUC" || up == "TSFUC") return CachePolicy::TSFUC;
  return std::nullopt;
}

BlockTrace make_block_trace(const Scenario& s,
                            std::span<const PreferencePattern> patterns,
                            std::span<const int> user_assignment,
                            int block_index, std::uint64_t seed) {
  BlockTrace t;
  t.block_index = block_index;
  const int T = s.frames_per_block;
  for (int i = 0; i < T; ++i) {
    const int frame = block_index * T + i;
    t.demand.push_back(sample_requests(s, patterns, user_assignment, frame, seed));
    t.channels.push_back(sample_channels(s, frame, seed));
  }
  return t;
}

double power_of(const TransmissionPolicy& p, const Scenario& s) {
  double total = 0.0;
  for (size_t j = 0; j < p.edge_beams.size(); ++j) {
    for (int b = 0; b < s.num_sbs; ++b)
      total += s.power_slope_sbs[size_t(b)] *
               k::cnormsq(p.edge_beams[j][size_t(b)].data(),
                          p.edge_beams[j][size_t(b)].size());
    if (p.unicast) {
      for (int b = 0; b < s.num_sbs; ++b)
        total += s.power_slope_cp *
                 k::cnormsq(p.fh_beams_link[j][size_t(b)].data(),
                            p.fh_beams_link[j][size_t(b)].size());
    } else {
      total += s.power_slope_cp *
               k::cnormsq(p.fh_beams[j].data(), p.fh_beams[j].size());
    }
  }
  return total;
}

namespace {

// per-frame clustering-initialization seed shared by every runner so that
// identical instances see identical starts regardless of the caller
std::uint64_t frame_init_seed(std::uint64_t base, int frame) {
  return seed_mix(base, 0xa17ULL, std::uint64_t(frame));
}

double frame_hit_fraction(const Mat& cache_l, const RequestBatch& batch,
                          const TransmissionPolicy& p, double* weight_out) {
  double acc = 0.0, weight = 0.0;
  for (int j = 0; j < int(p.contents.size()); ++j) {
    const int f = p.contents[size_t(j)];
    double n = 0.0;
    for (const auto& g : batch.groups)
      if (g.content == f) n = double(g.users.size());
    double lsum = 0.0;
    int cnt = 0;
    for (int b = 0; b < p.clustering.cols; ++b)
      if (p.clustering(j, b) >= 0.5) {
        lsum += cache_l(f, b);
        ++cnt;
      }
    if (cnt > 0) {
      acc += n * (lsum / cnt);
      weight += n;
    }
  }
  *weight_out = weight;
  return acc;
}

BlockMetrics metrics_from_policies(
    const Scenario& s, const BlockTrace& trace,
    const std::vector<TransmissionPolicy>& policies,
    const std::vector<bool>& feasible, const Mat& cache_l) {
  BlockMetrics m;
  m.frame_power.assign(trace.demand.size(), 0.0);
  m.frame_feasible.assign(trace.demand.size(), true);
  double hit_acc = 0.0, hit_weight = 0.0, iter_acc = 0.0;
  for (size_t i = 0; i < trace.demand.size(); ++i) {
    if (trace.demand[i].empty()) continue;
    if (!feasible[i]) {
      ++m.infeasible_frames;
      m.frame_feasible[i] = false;
      continue;
    }
    const auto& p = policies[i];
    ++m.solved_frames;
    iter_acc += p.ccp_iterations;
    m.frame_power[i] = p.power_w;
    m.total_power_wf += p.power_w;
    m.edge_power_wf += p.edge_power_w;
    m.fh_power_wf += p.fh_power_w;
    double w = 0.0;
    hit_acc += frame_hit_fraction(cache_l, trace.demand[i], p, &w);
    hit_weight += w;
  }
  if (m.solved_frames > 0) m.mean_iterations = iter_acc / m.solved_frames;
  if (hit_weight > 0) m.hit_fraction = hit_acc / hit_weight;
  return m;
}

}  // namespace

BlockRun run_block(const Scenario& s, const BlockTrace& trace, const Mat& cache_l,
                   bool unicast, const ShortTermParams& params, LruState* lru,
                   int threads) {
  const size_t T = trace.demand.size();
  BlockRun run;
  std::vector<TransmissionPolicy> policies(T);
  std::vector<bool> feasible(T, false);
  std::vector<Mat> frame_cache(T, cache_l);

  auto solve_frame = [&](const Mat& l, size_t i) {
    const auto& batch = trace.demand[i];
    ShortTermParams stp = params;
    stp.init_seed = frame_init_seed(params.init_seed, batch.frame);
    auto r = unicast
                 ? solve_short_term_unicast(s, trace.channels[i], batch, l, stp)
                 : solve_short_term(s, trace.channels[i], batch, l, stp);
    if (r.status == ShortTermStatus::Ok) {
      policies[i] = std::move(r.policy);
      feasible[i] = true;
    }
  };

  if (lru) {
    // the cache evolves between frames, so LRU runs in frame order
    for (size_t i = 0; i < T; ++i) {
      frame_cache[i] = lru_allocation(*lru, s).l;
      if (trace.demand[i].empty()) {
        feasible[i] = true;
        continue;
      }
      solve_frame(frame_cache[i], i);
      if (feasible[i]) lru_update(*lru, s, policies[i]);
    }
  } else {
    parallel_for(int(T), [&](int i) {
      if (trace.demand[size_t(i)].empty()) {
        feasible[size_t(i)] = true;
        return;
      }
      solve_frame(cache_l, size_t(i));
    }, threads);
  }

  // metrics and history
  BlockMetrics m;
  m.frame_power.assign(T, 0.0);
  m.frame_feasible.assign(T, true);
  double hit_acc = 0.0, hit_weight = 0.0, iter_acc = 0.0;
  for (size_t i = 0; i < T; ++i) {
    FrameRecord rec;
    rec.batch = trace.demand[i];
    rec.channels = trace.channels[i];
    if (!trace.demand[i].empty()) {
      if (feasible[i]) {
        rec.policy = policies[i];
        rec.feasible = true;
        ++m.solved_frames;
        iter_acc += policies[i].ccp_iterations;
        m.frame_power[i] = policies[i].power_w;
        m.total_power_wf += policies[i].power_w;
        m.edge_power_wf += policies[i].edge_power_w;
        m.fh_power_wf += policies[i].fh_power_w;
        double w = 0.0;
        hit_acc += frame_hit_fraction(frame_cache[i], trace.demand[i],
                                      policies[i], &w);
        hit_weight += w;
      } else {
        ++m.infeasible_frames;
        m.frame_feasible[i] = false;
      }
    }
    run.history.frames.push_back(std::move(rec));
  }
  if (m.solved_frames > 0) m.mean_iterations = iter_acc / m.solved_frames;
  if (hit_weight > 0) m.hit_fraction = hit_acc / hit_weight;
  run.metrics = std::move(m);
  return run;
}

// ---------------------------------------------------------------------------
// enumeration oracle
// ---------------------------------------------------------------------------

namespace {

struct ExactSocpOutcome {
  bool feasible = false;
  double objective_w = 0.0;
};

// Single-antenna, single-user-per-group clustering solved exactly: the edge
// problem is a rotated second-order-cone program after phase alignment, the
// fronthaul beam magnitude has a closed form against the slowest cluster link.
ExactSocpOutcome exact_socp_for_clustering(const ShortTermInstance& inst,
                                           const Mat& eb) {
  const int B = inst.num_sbs, rows = inst.num_rows;
  ExactSocpOutcome out;
  conic::Problem p;
  Mat vbase(rows, B, -1.0);
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b)
      if (eb(j, b) >= 0.5) {
        vbase(j, b) = p.add_var();
        p.add_var();
      }
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b)
      if (eb(j, b) >= 0.5) {
        conic::Affine re, im;
        const double w = std::sqrt(inst.slope_sbs[size_t(b)]);
        re.add(int(vbase(j, b)), w);
        im.add(int(vbase(j, b)) + 1, w);
        p.obj_squares.push_back(std::move(re));
        p.obj_squares.push_back(std::move(im));
      }
  for (int b = 0; b < B; ++b) {
    conic::QuadConstraint qc;
    bool any = false;
    for (int j = 0; j < rows; ++j)
      if (eb(j, b) >= 0.5) {
        conic::Affine re, im;
        re.add(int(vbase(j, b)), 1.0);
        im.add(int(vbase(j, b)) + 1, 1.0);
        qc.squares.push_back(std::move(re));
        qc.squares.push_back(std::move(im));
        any = true;
      }
    if (!any) continue;
    qc.lin.offset = -inst.max_power[size_t(b)];
    p.quad.push_back(std::move(qc));
  }
  for (int j = 0; j < rows; ++j) {
    const int user = inst.group[size_t(j)][0];
    const CVec& h = inst.user_channel[size_t(user)];
    const double sg = std::sqrt(inst.gamma[size_t(j)]);
    conic::SocConstraint sc;
    for (int j2 = 0; j2 < rows; ++j2) {
      if (j2 == j) continue;
      conic::Affine re, im;
      for (int b = 0; b < B; ++b) {
        if (eb(j2, b) < 0.5) continue;
        const cd hb = h[size_t(b)];
        re.add(int(vbase(j2, b)), sg * hb.real());
        re.add(int(vbase(j2, b)) + 1, sg * hb.imag());
        im.add(int(vbase(j2, b)), -sg * hb.imag());
        im.add(int(vbase(j2, b)) + 1, sg * hb.real());
      }
      sc.rows.push_back(std::move(re));
      sc.rows.push_back(std::move(im));
    }
    conic::Affine noise;
    noise.offset = sg;  // unit noise in solver scaling
    sc.rows.push_back(std::move(noise));
    for (int b = 0; b < B; ++b) {
      if (eb(j, b) < 0.5) continue;
      const cd hb = h[size_t(b)];
      sc.rhs.add(int(vbase(j, b)), hb.real());
      sc.rhs.add(int(vbase(j, b)) + 1, hb.imag());
    }
    p.soc.push_back(std::move(sc));
  }
  conic::Settings st;
  st.feas_tol = 1e-9;
  st.opt_tol = 1e-11;
  st.max_newton = 400;
  auto sol = conic::solve(p, st);
  if (!sol.ok()) return out;
  double obj = sol.objective;
  // closed-form fronthaul magnitude against the slowest serving link
  for (int j = 0; j < rows; ++j) {
    std::vector<double> cached(size_t(B), 0.0), clus(size_t(B), 0.0);
    for (int b = 0; b < B; ++b) {
      cached[size_t(b)] = inst.cached(j, b);
      clus[size_t(b)] = eb(j, b);
    }
    const double floor_units =
        min_required_fh_rate(cached, clus, inst.rate_units[size_t(j)]);
    if (floor_units <= 1e-12) continue;
    const double need = std::exp2(floor_units) - 1.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int b = 0; b < B; ++b) {
      if (eb(j, b) < 0.5) continue;
      const double g2 = k::cnormsq(inst.fh_channel[size_t(b)].a.data(),
                                   inst.fh_channel[size_t(b)].a.size());
      worst = std::min(worst, g2);
    }
    if (worst <= 1e-30) return out;  // dead fronthaul link in the cluster
    obj += inst.slope_cp * need / worst;
  }
  out.feasible = true;
  out.objective_w = obj;
  return out;
}

}  // namespace

OracleResult oracle_short_term(const ShortTermInstance& inst, int budget,
                               int restarts, std::uint64_t seed) {
  OracleResult res;
  const int B = inst.num_sbs, rows = inst.num_rows;
  if (rows == 0) {
    res.ok = true;
    res.certificate = OracleCertificate::ExactSocp;
    res.best_clustering = Mat(0, B);
    return res;
  }
  const double combos_log =
      double(rows) * std::log2(double((1 << B) - 1));
  if (combos_log > std::log2(double(budget)) + 1e-9) {
    res.message = "enumeration budget exceeded";
    return res;
  }
  bool exact = inst.sbs_antennas == 1 && inst.cp_antennas == 1;
  for (const auto& g : inst.group)
    if (g.size() != 1) exact = false;
  res.certificate =
      exact ? OracleCertificate::ExactSocp : OracleCertificate::MultiStartLocal;

  std::vector<int> mask(size_t(rows), 1);
  double best = std::numeric_limits<double>::infinity();
  Mat best_eb;
  bool done = false;
  while (!done) {
    Mat eb(rows, B, 0.0);
    for (int j = 0; j < rows; ++j)
      for (int b = 0; b < B; ++b)
        if (mask[size_t(j)] & (1 << b)) eb(j, b) = 1.0;
    ++res.enumerated;

    if (exact) {
      auto e = exact_socp_for_clustering(inst, eb);
      if (e.feasible && e.objective_w < best - 1e-12) {
        best = e.objective_w;
        best_eb = eb;
      }
    } else {
      for (int r = 0; r < restarts; ++r) {
        auto fx = solve_fixed_clustering(
            inst, eb, false, nullptr,
            r == 0 ? 0 : seed_mix(seed, std::uint64_t(res.enumerated),
                                  std::uint64_t(r)));
        if (fx.feasible && fx.objective_w < best - 1e-12) {
          best = fx.objective_w;
          best_eb = eb;
        }
      }
    }

    // next clustering combination
    int j = 0;
    for (; j < rows; ++j) {
      if (mask[size_t(j)] < (1 << B) - 1) {
        ++mask[size_t(j)];
        break;
      }
      mask[size_t(j)] = 1;
    }
    if (j == rows) done = true;
  }
  if (!std::isfinite(best)) {
    res.message = "no feasible clustering";
    return res;
  }
  res.ok = true;
  res.objective_w = best;
  res.best_clustering = best_eb;
  return res;
}

// ---------------------------------------------------------------------------
// two-block policy orchestration
// ---------------------------------------------------------------------------

PolicyRunResult run_policy(const Scenario& s, CachePolicy policy,
                           const BlockTrace& block1, const BlockTrace& block2,
                           std::uint64_t seed, const PolicyRunParams& params) {
  PolicyRunResult out;
  Mat uc = uc_allocation(s).l;
  PcudParams pp = params.pcud;
  pp.short_term = params.short_term;
  pp.threads = params.threads;

  auto history_only = [&](const BlockTrace& t) {
    BlockHistory h;
    for (size_t i = 0; i < t.demand.size(); ++i) {
      FrameRecord rec;
      rec.batch = t.demand[i];
      rec.channels = t.channels[i];
      h.frames.push_back(std::move(rec));
    }
    return h;
  };

  switch (policy) {
    case CachePolicy::UC: {
      auto run = run_block(s, block2, uc, false, params.short_term, nullptr,
                           params.threads);
      out.measured = run.metrics;
      out.final_l = uc;
      break;
    }
    case CachePolicy::LRU: {
      LruState state;
      state.init(s.num_sbs);
      auto warm = run_block(s, block1, uc, false, params.short_term, &state,
                            params.threads);
      out.history_infeasible = warm.metrics.infeasible_frames;
      auto run = run_block(s, block2, uc, false, params.short_term, &state,
                           params.threads);
      out.measured = run.metrics;
      out.final_l = lru_allocation(state, s).l;
      break;
    }
    case CachePolicy::PCUD: {
      auto hist = history_only(block1);
      auto pr = pcud(s, hist, uc, pp);
      out.history_infeasible = pr.dropped_frames;
      auto run = run_block(s, block2, pr.alloc.l, false, params.short_term,
                           nullptr, params.threads);
      out.measured = run.metrics;
      out.final_l = pr.alloc.l;
      break;
    }
    case CachePolicy::LCPCUD: {
      auto warm = run_block(s, block1, uc, false, params.short_term, nullptr,
                            params.threads);
      out.history_infeasible = warm.metrics.infeasible_frames;
      auto alloc = lc_pcud(s, warm.history, block1.block_index, seed);
      auto run = run_block(s, block2, alloc.l, false, params.short_term,
                           nullptr, params.threads);
      out.measured = run.metrics;
      out.final_l = alloc.l;
      break;
    }
    case CachePolicy::GAC: {
      // the genie bound re-optimizes the measured block itself; its final
      // per-frame policies are the measurement
      auto hist = history_only(block2);
      auto pr = pcud(s, hist, uc, pp);
      out.measured = metrics_from_policies(s, block2, pr.final_policies,
                                           pr.frame_feasible, pr.alloc.l);
      out.final_l = pr.alloc.l;
      break;
    }
    case CachePolicy::TSFUC: {
      pp.unicast = true;
      auto hist = history_only(block1);
      auto pr = pcud(s, hist, uc, pp);
      out.history_infeasible = pr.dropped_frames;
      auto run = run_block(s, block2, pr.alloc.l, true, params.short_term,
                           nullptr, params.threads);
      out.measured = run.metrics;
      out.final_l = pr.alloc.l;
      break;
    }
  }
  return out;
}

void write_metrics_header(std::ostream& os) {
  os << "# cscn-blockmetrics v1\n";
  os << "policy,seed,block,sweep_param,sweep_value,total_power_wf,"
        "edge_power_wf,fh_power_wf,infeasible_frames,solved_frames,"
        "mean_iterations,hit_fraction\n";
}

void write_metrics_row(std::ostream& os, const std::string& policy,
                       std::uint64_t seed, int block,
                       const std::string& sweep_param, double sweep_value,
                       const BlockMetrics& m) {
  os << policy << ',' << seed << ',' << block << ',' << sweep_param << ','
     << fmt_double(sweep_value) << ',' << fmt_double(m.total_power_wf) << ','
     << fmt_double(m.edge_power_wf) << ',' << fmt_double(m.fh_power_wf) << ','
     << m.infeasible_frames << ',' << m.solved_frames << ','
     << fmt_double(m.mean_iterations) << ',' << fmt_double(m.hit_fraction)
     << '\n';
}

}  // namespace cscn
