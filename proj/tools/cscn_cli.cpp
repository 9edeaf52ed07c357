#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cscn/chart.hpp"
#include "cscn/parallel.hpp"
#include "cscn/simkit.hpp"
#include "cscn/textio.hpp"

namespace fs = std::filesystem;
using namespace cscn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitPartial = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// replace or append `key = value` lines in a flat config text
std::string with_overrides(
    const std::string& base,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::istringstream in(base);
  std::ostringstream out;
  std::string line;
  std::vector<bool> used(overrides.size(), false);
  while (std::getline(in, line)) {
    std::string body = line.substr(0, line.find('#'));
    auto eq = body.find('=');
    bool replaced = false;
    if (eq != std::string::npos) {
      const std::string key = trim(body.substr(0, eq));
      for (size_t i = 0; i < overrides.size(); ++i)
        if (overrides[i].first == key) {
          out << key << " = " << overrides[i].second << '\n';
          used[i] = true;
          replaced = true;
          break;
        }
    }
    if (!replaced) out << line << '\n';
  }
  for (size_t i = 0; i < overrides.size(); ++i)
    if (!used[i]) out << overrides[i].first << " = " << overrides[i].second << '\n';
  return out.str();
}

struct CommonOpts {
  std::string config_path;
  bool paper_scale = false;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool oracle = false;
  bool dump_traces = false;
};

std::string base_config(const CommonOpts& c) {
  if (!c.config_path.empty()) return read_file(c.config_path);
  return c.paper_scale ? paper_preset_config() : desk_preset_config();
}

struct Workload {
  Scenario scenario;
  std::vector<PreferencePattern> patterns;
  std::vector<int> assignment;
};

Workload make_workload(const std::string& config_text) {
  Workload w;
  w.scenario = load_scenario(config_text);
  Rng rng(seed_mix(w.scenario.rng_seed, 0x70617474ULL));
  w.patterns = build_patterns(w.scenario.num_patterns, w.scenario.num_contents, rng);
  w.assignment = default_user_assignment(w.scenario);
  return w;
}

PolicyRunParams default_run_params() {
  PolicyRunParams p;
  p.threads = default_threads();
  p.pcud.threads = p.threads;
  return p;
}

int oracle_crosscheck(const Scenario& s, const BlockTrace& trace, const Mat& l,
                      std::ostream& log) {
  int checked = 0, flagged = 0;
  for (size_t i = 0; i < trace.demand.size(); ++i) {
    if (trace.demand[i].empty()) continue;
    auto inst = make_instance(s, trace.channels[i], trace.demand[i], l);
    const double combos =
        double(inst.num_rows) * std::log2(double((1 << s.num_sbs) - 1));
    if (combos > 12.0) continue;  // budget 4096
    auto orc = oracle_short_term(inst, 4096, 5, 7);
    if (!orc.ok) continue;
    ShortTermParams stp;
    stp.init_seed = seed_mix(1, 0xa17ULL, std::uint64_t(trace.demand[i].frame));
    auto res = solve_short_term(s, trace.channels[i], trace.demand[i], l, stp);
    if (res.status != ShortTermStatus::Ok) continue;
    ++checked;
    const double gap = (res.policy.power_w - orc.objective_w) /
                       std::max(orc.objective_w, 1e-12);
    if (gap > 0.05 || gap < -1e-6) {
      ++flagged;
      log << "# oracle gap frame " << trace.demand[i].frame << ": "
          << fmt_double(gap) << '\n';
    }
  }
  log << "# oracle checked " << checked << " frames, flagged " << flagged
      << '\n';
  return flagged;
}

int cmd_simulate(const CommonOpts& common, const std::string& policy_name_arg) {
  auto wl = make_workload(base_config(common));
  auto pol = parse_policy(policy_name_arg);
  if (!pol) {
    std::cerr << "unknown policy: " << policy_name_arg << '\n';
    return kExitValidation;
  }
  fs::create_directories(common.out_dir);
  auto params = default_run_params();
  BlockTrace b1 = make_block_trace(wl.scenario, wl.patterns, wl.assignment, 0,
                                   common.seed);
  BlockTrace b2 = make_block_trace(wl.scenario, wl.patterns, wl.assignment, 1,
                                   common.seed);
  auto run = run_policy(wl.scenario, *pol, b1, b2, common.seed, params);

  std::ofstream metrics(fs::path(common.out_dir) / "metrics.csv");
  write_metrics_header(metrics);
  write_metrics_row(metrics, policy_name(*pol), common.seed, 1, "none", 0.0,
                    run.measured);
  std::ofstream cache(fs::path(common.out_dir) / "cache.csv");
  CacheAllocation alloc;
  alloc.l = run.final_l;
  alloc.algorithm = policy_name(*pol);
  alloc.block_id = 1;
  alloc.seed = common.seed;
  write_cache_csv(cache, alloc);
  std::ofstream scen(fs::path(common.out_dir) / "scenario.txt");
  scen << dump_scenario(wl.scenario);

  if (common.dump_traces) {
    std::ofstream req(fs::path(common.out_dir) / "requests.csv");
    std::vector<RequestBatch> frames = b1.demand;
    frames.insert(frames.end(), b2.demand.begin(), b2.demand.end());
    write_request_trace_csv(req, frames);
    std::ofstream chan(fs::path(common.out_dir) / "channels.csv");
    std::vector<ChannelRealization> chans = b1.channels;
    chans.insert(chans.end(), b2.channels.begin(), b2.channels.end());
    write_channel_trace_csv(chan, wl.scenario, chans);
  }

  if (common.oracle) {
    std::ofstream olog(fs::path(common.out_dir) / "oracle.txt");
    oracle_crosscheck(wl.scenario, b2, run.final_l, olog);
  }
  std::cout << "policy " << policy_name(*pol) << " block power "
            << fmt_double(run.measured.total_power_wf) << " W-frames, "
            << run.measured.infeasible_frames << " infeasible frames\n";
  return kExitOk;
}

struct SummaryRow {
  std::string param;
  double value;
  std::string policy;
  double mean_power;
  int seeds;
  int failures;
};

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "sweep_param,sweep_value,policy,mean_power_wf,seeds,failures\n";
  for (const auto& r : rows)
    os << r.param << ',' << fmt_double(r.value) << ',' << r.policy << ','
       << fmt_double(r.mean_power) << ',' << r.seeds << ',' << r.failures
       << '\n';
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::vector<SummaryRow> rows;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto c = split(line, ',');
    rows.push_back({c[0], std::stod(c[1]), c[2], std::stod(c[3]),
                    std::stoi(c[4]), std::stoi(c[5])});
  }
  return rows;
}

void chart_from_summary(const std::vector<SummaryRow>& rows,
                        const std::string& param, std::ostream& os) {
  std::vector<chart::Series> series;
  for (const auto& r : rows) {
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const chart::Series& s) { return s.name == r.policy; });
    if (it == series.end()) {
      series.push_back({r.policy, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(r.value);
    it->y.push_back(r.mean_power);
  }
  chart::write_line_chart(os, "Mean block power vs " + param, param,
                          "power (W-frames)", series);
}

int cmd_sweep(const CommonOpts& common, const std::string& param,
              const std::string& values_arg, const std::string& policies_arg,
              const std::string& seeds_arg) {
  if (param != "b2" && param != "mu" && param != "patterns") {
    std::cerr << "unknown sweep parameter: " << param << '\n';
    return kExitValidation;
  }
  std::vector<double> values;
  for (const auto& v : split(values_arg, ',')) values.push_back(std::stod(v));
  std::vector<CachePolicy> policies;
  for (const auto& p : split(policies_arg, ',')) {
    auto pol = parse_policy(p);
    if (!pol) {
      std::cerr << "unknown policy: " << p << '\n';
      return kExitValidation;
    }
    policies.push_back(*pol);
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& v : split(seeds_arg, ',')) seeds.push_back(std::stoull(v));
  if (values.empty() || policies.empty() || seeds.empty()) {
    std::cerr << "sweep needs nonempty values, policies and seeds\n";
    return kExitValidation;
  }

  fs::create_directories(common.out_dir);
  const std::string base = base_config(common);
  auto params = default_run_params();

  std::ofstream metrics(fs::path(common.out_dir) / "metrics.csv");
  write_metrics_header(metrics);
  std::vector<SummaryRow> summary;
  int failures = 0;

  for (double value : values) {
    std::vector<std::pair<std::string, std::string>> ov;
    if (param == "b2") ov.emplace_back("fh_bandwidth_hz", fmt_double(value));
    if (param == "mu") ov.emplace_back("mu", fmt_double(value));
    if (param == "patterns") {
      const int np = int(value);
      auto probe = load_scenario(base);
      ov.emplace_back("num_patterns", std::to_string(np));
      ov.emplace_back("num_users", std::to_string(np * probe.users_per_pattern));
    }
    Workload wl;
    try {
      wl = make_workload(with_overrides(base, ov));
    } catch (const std::exception& e) {
      std::cerr << "sweep point " << value << ": " << e.what() << '\n';
      return kExitValidation;
    }
    for (CachePolicy pol : policies) {
      double acc = 0.0;
      int ok_seeds = 0, point_failures = 0;
      for (std::uint64_t seed : seeds) {
        try {
          BlockTrace b1 =
              make_block_trace(wl.scenario, wl.patterns, wl.assignment, 0, seed);
          BlockTrace b2 =
              make_block_trace(wl.scenario, wl.patterns, wl.assignment, 1, seed);
          auto run = run_policy(wl.scenario, pol, b1, b2, seed, params);
          write_metrics_row(metrics, policy_name(pol), seed, 1, param, value,
                            run.measured);
          acc += run.measured.total_power_wf;
          ++ok_seeds;
        } catch (const std::exception& e) {
          std::cerr << "point " << value << " policy " << policy_name(pol)
                    << " seed " << seed << " failed: " << e.what() << '\n';
          ++point_failures;
          ++failures;
        }
      }
      summary.push_back({param, value, policy_name(pol),
                         ok_seeds ? acc / ok_seeds : 0.0, ok_seeds,
                         point_failures});
    }
  }
  {
    std::ofstream sum(fs::path(common.out_dir) / "sweep_summary.csv");
    write_summary_csv(sum, summary);
  }
  {
    // chart regenerated from the CSV so the plotted values match it exactly
    std::ifstream sum(fs::path(common.out_dir) / "sweep_summary.csv");
    auto rows = read_summary_csv(sum);
    std::ofstream svg(fs::path(common.out_dir) / "sweep.svg");
    chart_from_summary(rows, param, svg);
  }
  std::cout << "sweep complete: " << summary.size() << " points, " << failures
            << " failures\n";
  return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_convergence(const CommonOpts& common, int trials) {
  fs::create_directories(common.out_dir);
  std::ofstream csv(fs::path(common.out_dir) / "convergence.csv");
  csv << "trial,iteration,objective\n";
  if (trials <= 0) {
    std::cerr << "warning: no trials requested; outputs are empty\n";
    std::ofstream svg(fs::path(common.out_dir) / "convergence.svg");
    chart::write_line_chart(svg, "Short-term convergence", "iteration",
                            "objective", {});
    return kExitOk;
  }
  auto wl = make_workload(base_config(common));
  // first frame with at least two groups makes a representative instance
  BlockTrace trace =
      make_block_trace(wl.scenario, wl.patterns, wl.assignment, 0, common.seed);
  size_t pick = 0;
  for (size_t i = 0; i < trace.demand.size(); ++i)
    if (trace.demand[i].groups.size() >= 2) {
      pick = i;
      break;
    }
  const auto& batch = trace.demand[pick];
  if (batch.empty()) {
    std::cerr << "no active frame in the trace\n";
    return kExitSolver;
  }
  Mat cache = uc_allocation(wl.scenario).l;

  // shared random clustering start, per-trial random feasible beams
  Mat e0(int(batch.groups.size()), wl.scenario.num_sbs);
  Rng rng(seed_mix(common.seed, 0xc0feULL));
  for (int j = 0; j < e0.rows; ++j)
    for (int b = 0; b < e0.cols; ++b) e0(j, b) = rng.uniform01();

  std::vector<chart::Series> series;
  std::vector<double> finals;
  for (int trial = 0; trial < trials; ++trial) {
    ShortTermParams stp;
    stp.fixed_clustering0 = e0;
    stp.beam_init_seed = seed_mix(common.seed, 0xbea3ULL, std::uint64_t(trial)) | 1;
    auto res = solve_short_term(wl.scenario, trace.channels[pick], batch, cache,
                                stp);
    if (res.status != ShortTermStatus::Ok) {
      std::cerr << "trial " << trial << ": solver failed\n";
      return kExitSolver;
    }
    chart::Series s;
    s.name = "trial " + std::to_string(trial);
    for (size_t i = 0; i < res.diag.objective_history.size(); ++i) {
      csv << trial << ',' << i << ','
          << fmt_double(res.diag.objective_history[i]) << '\n';
      s.x.push_back(double(i));
      s.y.push_back(res.diag.objective_history[i]);
    }
    finals.push_back(res.diag.objective_history.back());
    series.push_back(std::move(s));
  }
  std::ofstream svg(fs::path(common.out_dir) / "convergence.svg");
  chart::write_line_chart(svg, "Short-term convergence", "iteration",
                          "objective", series);
  double lo = finals[0], hi = finals[0];
  for (double f : finals) {
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  std::cout << "trials " << trials << ", final objectives within "
            << fmt_double(hi == 0 ? 0.0 : (hi - lo) / hi * 100.0) << "%\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cache-enabled small-cell network simulator"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--config", common.config_path, "scenario config file");
  app.add_flag("--paper-scale", common.paper_scale,
               "evaluation-scale preset instead of the desk preset");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "master seed");
  app.add_flag("--oracle", common.oracle,
               "cross-check eligible frames against the enumeration oracle");
  app.add_flag("--dump-traces", common.dump_traces,
               "write request and channel traces next to the metrics");

  auto* sim = app.add_subcommand("simulate", "run one policy over two blocks");
  sim->fallthrough();
  std::string policy = "PCUD";
  sim->add_option("--policy", policy, "UC|LRU|PCUD|LC-PCUD|GAC|TS-FUC");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep over policies");
  sweep->fallthrough();
  std::string param = "mu", values = "0.1,0.3,0.5,0.8";
  std::string policies = "UC,LRU,PCUD,LC-PCUD,GAC,TS-FUC";
  std::string seeds = "1,2,3,4,5";
  sweep->add_option("--param", param, "b2|patterns|mu");
  sweep->add_option("--values", values, "comma-separated sweep values");
  sweep->add_option("--policies", policies, "comma-separated policies");
  sweep->add_option("--seeds", seeds, "comma-separated seeds");

  auto* conv = app.add_subcommand("convergence",
                                  "short-term objective trajectories");
  conv->fallthrough();
  int trials = 5;
  conv->add_option("--trials", trials, "number of trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, policy);
    if (sweep->parsed()) return cmd_sweep(common, param, values, policies, seeds);
    if (conv->parsed()) return cmd_convergence(common, trials);
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitValidation;
}
