#include "cscn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cscn/textio.hpp"

namespace cscn {

namespace {

constexpr double kThermalNoiseWPerHz = 3.9810717055349565e-21;  // -174 dBm/Hz

double parse_number(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ScenarioError(key, "not a number: '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ','))
    out.push_back(parse_number(key, item));
  return out;
}

// scalar broadcast or full per-element list
std::vector<double> broadcast(const std::string& key, std::vector<double> v,
                              size_t n) {
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (v.size() != n)
    throw ScenarioError(key, "expected 1 or " + std::to_string(n) +
                                 " values, got " + std::to_string(v.size()));
  return v;
}

std::vector<std::array<double, 2>> parse_positions(const std::string& key,
                                                   const std::string& v) {
  auto flat = parse_list(key, v);
  if (flat.size() % 2 != 0)
    throw ScenarioError(key, "odd number of coordinates");
  std::vector<std::array<double, 2>> out(flat.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) out[i] = {flat[2 * i], flat[2 * i + 1]};
  return out;
}

std::string fmt_positions(const std::vector<std::array<double, 2>>& ps) {
  std::string out;
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(ps[i][0]) + "," + fmt_double(ps[i][1]);
  }
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

}  // namespace

double Scenario::total_library_bits() const {
  double s = 0.0;
  for (double b : content_size_bits) s += b;
  return s;
}

bool inside_hexagon(double x, double y, double edge) {
  // regular hexagon, circumradius = edge length, vertex on the +x axis
  const double r_in = edge * 0.8660254037844386;
  const double u0 = std::abs(0.8660254037844386 * x + 0.5 * y);
  const double u1 = std::abs(y);
  const double u2 = std::abs(-0.8660254037844386 * x + 0.5 * y);
  return u0 <= r_in && u1 <= r_in && u2 <= r_in;
}

void sample_topology(Scenario& s, Rng& rng) {
  const double a = s.cell_edge_m;
  const int max_attempts = 20000;
  auto draw_in_hex = [&](const char* key) {
    for (int it = 0; it < max_attempts; ++it) {
      double x = rng.uniform(-a, a);
      double y = rng.uniform(-a, a);
      if (inside_hexagon(x, y, a)) return std::array<double, 2>{x, y};
    }
    throw ScenarioError(key, "placement failed (degenerate geometry)");
  };
  s.cp_position = {0.0, 0.0};
  s.sbs_positions.clear();
  for (int b = 0; b < s.num_sbs; ++b)
    s.sbs_positions.push_back(draw_in_hex("sbs_positions"));
  s.user_positions.clear();
  const double excl2 = s.exclusion_radius_m * s.exclusion_radius_m;
  for (int k = 0; k < s.num_users; ++k) {
    bool placed = false;
    for (int it = 0; it < max_attempts && !placed; ++it) {
      auto p = draw_in_hex("user_positions");
      double dcp = (p[0] - s.cp_position[0]) * (p[0] - s.cp_position[0]) +
                   (p[1] - s.cp_position[1]) * (p[1] - s.cp_position[1]);
      if (dcp < excl2) continue;
      bool clear = true;
      for (const auto& q : s.sbs_positions) {
        double d2 = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
        if (d2 < excl2) {
          clear = false;
          break;
        }
      }
      if (clear) {
        s.user_positions.push_back(p);
        placed = true;
      }
    }
    if (!placed)
      throw ScenarioError("user_positions",
                          "placement failed (exclusion radius too large)");
  }
}

Scenario load_scenario(std::string_view config_text) {
  std::map<std::string, std::string> kv;
  std::string text(config_text);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(lineno),
                          "expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ScenarioError("line " + std::to_string(lineno), "empty key or value");
    if (kv.count(key)) throw ScenarioError(key, "duplicate key");
    kv[key] = val;
  }

  static const char* known[] = {
      "num_sbs", "num_users", "num_contents", "cp_antennas", "sbs_antennas",
      "cell_edge_m", "sbs_positions", "user_positions", "cp_position",
      "content_size_bits", "segment_size_bits", "mu", "cache_capacity_bits",
      "max_tx_power_w", "sinr_target_db", "edge_bandwidth_hz",
      "fh_bandwidth_hz", "power_slope_sbs", "power_slope_cp", "noise_edge_w",
      "noise_fh_w", "tau0_bps", "frames_per_block", "pathloss_fixed_db",
      "pathloss_slope_db", "shadowing_std_db", "antenna_gain_dbi",
      "exclusion_radius_m", "min_distance_m", "p_active", "users_per_pattern",
      "num_patterns", "rng_seed"};
  for (const auto& [key, _] : kv)
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return key == k;
        }) == std::end(known))
      throw ScenarioError(key, "unknown key");

  auto has = [&](const char* k) { return kv.count(k) != 0; };
  auto num = [&](const char* k) { return parse_number(k, kv.at(k)); };
  auto integer = [&](const char* k) {
    double d = num(k);
    if (d != std::floor(d)) throw ScenarioError(k, "expected an integer");
    return int(d);
  };

  Scenario s;
  for (const char* k : {"num_sbs", "num_users", "num_contents", "cp_antennas",
                        "sbs_antennas"})
    if (!has(k)) throw ScenarioError(k, "missing required key");
  s.num_sbs = integer("num_sbs");
  s.num_users = integer("num_users");
  s.num_contents = integer("num_contents");
  s.cp_antennas = integer("cp_antennas");
  s.sbs_antennas = integer("sbs_antennas");
  if (s.num_sbs < 1) throw ScenarioError("num_sbs", "must be >= 1");
  if (s.num_users < 1) throw ScenarioError("num_users", "must be >= 1");
  if (s.num_contents < 1) throw ScenarioError("num_contents", "must be >= 1");
  if (s.cp_antennas < 1) throw ScenarioError("cp_antennas", "must be >= 1");
  if (s.sbs_antennas < 1) throw ScenarioError("sbs_antennas", "must be >= 1");

  if (has("cell_edge_m")) s.cell_edge_m = num("cell_edge_m");
  if (s.cell_edge_m <= 0) throw ScenarioError("cell_edge_m", "must be > 0");
  if (has("segment_size_bits")) s.segment_size_bits = num("segment_size_bits");
  if (s.segment_size_bits <= 0)
    throw ScenarioError("segment_size_bits", "must be > 0");
  if (has("mu")) s.mu = num("mu");
  if (s.mu < 0.0 || s.mu > 1.0) throw ScenarioError("mu", "must be in [0,1]");
  if (has("edge_bandwidth_hz")) s.edge_bandwidth_hz = num("edge_bandwidth_hz");
  if (s.edge_bandwidth_hz <= 0)
    throw ScenarioError("edge_bandwidth_hz", "must be > 0");
  if (has("fh_bandwidth_hz")) s.fh_bandwidth_hz = num("fh_bandwidth_hz");
  if (s.fh_bandwidth_hz <= 0)
    throw ScenarioError("fh_bandwidth_hz", "must be > 0");
  if (has("power_slope_cp")) s.power_slope_cp = num("power_slope_cp");
  if (has("frames_per_block")) s.frames_per_block = integer("frames_per_block");
  if (s.frames_per_block < 1)
    throw ScenarioError("frames_per_block", "must be >= 1");
  if (has("pathloss_fixed_db")) s.pathloss_fixed_db = num("pathloss_fixed_db");
  if (has("pathloss_slope_db")) s.pathloss_slope_db = num("pathloss_slope_db");
  if (has("shadowing_std_db")) s.shadowing_std_db = num("shadowing_std_db");
  if (s.shadowing_std_db < 0)
    throw ScenarioError("shadowing_std_db", "must be >= 0");
  if (has("antenna_gain_dbi")) s.antenna_gain_dbi = num("antenna_gain_dbi");
  if (has("exclusion_radius_m"))
    s.exclusion_radius_m = num("exclusion_radius_m");
  if (has("min_distance_m")) s.min_distance_m = num("min_distance_m");
  if (s.min_distance_m <= 0) throw ScenarioError("min_distance_m", "must be > 0");
  if (has("p_active")) s.p_active = num("p_active");
  if (s.p_active < 0.0 || s.p_active > 1.0)
    throw ScenarioError("p_active", "must be in [0,1]");
  if (has("users_per_pattern")) s.users_per_pattern = integer("users_per_pattern");
  if (s.users_per_pattern < 1)
    throw ScenarioError("users_per_pattern", "must be >= 1");
  if (has("num_patterns")) s.num_patterns = integer("num_patterns");
  if (s.num_patterns < 1) throw ScenarioError("num_patterns", "must be >= 1");
  if (has("rng_seed")) {
    double d = num("rng_seed");
    if (d < 0 || d != std::floor(d))
      throw ScenarioError("rng_seed", "expected a nonnegative integer");
    s.rng_seed = std::uint64_t(d);
  }

  const size_t F = size_t(s.num_contents), B = size_t(s.num_sbs),
               K = size_t(s.num_users);
  s.content_size_bits =
      has("content_size_bits")
          ? broadcast("content_size_bits",
                      parse_list("content_size_bits", kv.at("content_size_bits")), F)
          : std::vector<double>(F, 1e8);
  for (double v : s.content_size_bits)
    if (v <= 0) throw ScenarioError("content_size_bits", "must be > 0");
  s.max_tx_power_w =
      has("max_tx_power_w")
          ? broadcast("max_tx_power_w",
                      parse_list("max_tx_power_w", kv.at("max_tx_power_w")), B)
          : std::vector<double>(B, 1.0);
  for (double v : s.max_tx_power_w)
    if (v <= 0) throw ScenarioError("max_tx_power_w", "must be > 0");
  s.sinr_target_db =
      has("sinr_target_db")
          ? broadcast("sinr_target_db",
                      parse_list("sinr_target_db", kv.at("sinr_target_db")), F)
          : std::vector<double>(F, 10.0);
  s.sinr_target.resize(F);
  for (size_t f = 0; f < F; ++f)
    s.sinr_target[f] = std::pow(10.0, s.sinr_target_db[f] / 10.0);
  s.power_slope_sbs =
      has("power_slope_sbs")
          ? broadcast("power_slope_sbs",
                      parse_list("power_slope_sbs", kv.at("power_slope_sbs")), B)
          : std::vector<double>(B, 2.7);
  s.noise_edge_w =
      has("noise_edge_w")
          ? broadcast("noise_edge_w", parse_list("noise_edge_w", kv.at("noise_edge_w")), K)
          : std::vector<double>(K, kThermalNoiseWPerHz * s.edge_bandwidth_hz);
  for (double v : s.noise_edge_w)
    if (v <= 0) throw ScenarioError("noise_edge_w", "must be > 0");
  s.noise_fh_w =
      has("noise_fh_w")
          ? broadcast("noise_fh_w", parse_list("noise_fh_w", kv.at("noise_fh_w")), B)
          : std::vector<double>(B, kThermalNoiseWPerHz * s.fh_bandwidth_hz);
  for (double v : s.noise_fh_w)
    if (v <= 0) throw ScenarioError("noise_fh_w", "must be > 0");

  // derived quantities
  if (has("cache_capacity_bits")) {
    s.cache_capacity_bits = num("cache_capacity_bits");
    if (s.cache_capacity_bits < 0)
      throw ScenarioError("cache_capacity_bits", "must be >= 0");
    if (!has("mu")) {
      s.mu = std::min(1.0, s.cache_capacity_bits / s.total_library_bits());
    }
  } else {
    s.cache_capacity_bits = s.mu * s.total_library_bits();
  }
  s.edge_rate_bps.resize(F);
  double max_rate = 0.0;
  for (size_t f = 0; f < F; ++f) {
    s.edge_rate_bps[f] =
        s.edge_bandwidth_hz * std::log2(1.0 + s.sinr_target[f]);
    max_rate = std::max(max_rate, s.edge_rate_bps[f]);
  }
  if (has("tau0_bps")) {
    s.tau0_bps = num("tau0_bps");
    if (s.tau0_bps < max_rate) {
      s.tau0_bps = 2.0 * max_rate;
      s.tau0_raised = true;
    }
  } else {
    s.tau0_bps = 2.0 * max_rate;
  }

  // positions: explicit lists win; anything missing is sampled
  if (has("cp_position")) {
    auto p = parse_positions("cp_position", kv.at("cp_position"));
    if (p.size() != 1) throw ScenarioError("cp_position", "expected one point");
    s.cp_position = p[0];
  }
  const bool have_sbs = has("sbs_positions"), have_users = has("user_positions");
  if (have_sbs) s.sbs_positions = parse_positions("sbs_positions", kv.at("sbs_positions"));
  if (have_users)
    s.user_positions = parse_positions("user_positions", kv.at("user_positions"));
  if (!have_sbs || !have_users) {
    Scenario tmp = s;
    Rng rng(seed_mix(s.rng_seed, 0x70706f73ULL));
    sample_topology(tmp, rng);
    if (!have_sbs) s.sbs_positions = tmp.sbs_positions;
    if (!have_users) s.user_positions = tmp.user_positions;
  }
  if (s.sbs_positions.size() != B)
    throw ScenarioError("sbs_positions", "expected " + std::to_string(B) + " points");
  if (s.user_positions.size() != K)
    throw ScenarioError("user_positions", "expected " + std::to_string(K) + " points");
  for (const auto& p : s.sbs_positions)
    if (!inside_hexagon(p[0], p[1], s.cell_edge_m))
      throw ScenarioError("sbs_positions", "point outside the hexagon");
  for (const auto& p : s.user_positions)
    if (!inside_hexagon(p[0], p[1], s.cell_edge_m))
      throw ScenarioError("user_positions", "point outside the hexagon");

  return s;
}

std::string dump_scenario(const Scenario& s) {
  std::map<std::string, std::string> kv;
  kv["num_sbs"] = std::to_string(s.num_sbs);
  kv["num_users"] = std::to_string(s.num_users);
  kv["num_contents"] = std::to_string(s.num_contents);
  kv["cp_antennas"] = std::to_string(s.cp_antennas);
  kv["sbs_antennas"] = std::to_string(s.sbs_antennas);
  kv["cell_edge_m"] = fmt_double(s.cell_edge_m);
  kv["sbs_positions"] = fmt_positions(s.sbs_positions);
  kv["user_positions"] = fmt_positions(s.user_positions);
  kv["cp_position"] = fmt_double(s.cp_position[0]) + "," + fmt_double(s.cp_position[1]);
  kv["content_size_bits"] = fmt_list(s.content_size_bits);
  kv["segment_size_bits"] = fmt_double(s.segment_size_bits);
  kv["mu"] = fmt_double(s.mu);
  kv["cache_capacity_bits"] = fmt_double(s.cache_capacity_bits);
  kv["max_tx_power_w"] = fmt_list(s.max_tx_power_w);
  kv["sinr_target_db"] = fmt_list(s.sinr_target_db);
  kv["edge_bandwidth_hz"] = fmt_double(s.edge_bandwidth_hz);
  kv["fh_bandwidth_hz"] = fmt_double(s.fh_bandwidth_hz);
  kv["power_slope_sbs"] = fmt_list(s.power_slope_sbs);
  kv["power_slope_cp"] = fmt_double(s.power_slope_cp);
  kv["noise_edge_w"] = fmt_list(s.noise_edge_w);
  kv["noise_fh_w"] = fmt_list(s.noise_fh_w);
  kv["tau0_bps"] = fmt_double(s.tau0_bps);
  kv["frames_per_block"] = std::to_string(s.frames_per_block);
  kv["pathloss_fixed_db"] = fmt_double(s.pathloss_fixed_db);
  kv["pathloss_slope_db"] = fmt_double(s.pathloss_slope_db);
  kv["shadowing_std_db"] = fmt_double(s.shadowing_std_db);
  kv["antenna_gain_dbi"] = fmt_double(s.antenna_gain_dbi);
  kv["exclusion_radius_m"] = fmt_double(s.exclusion_radius_m);
  kv["min_distance_m"] = fmt_double(s.min_distance_m);
  kv["p_active"] = fmt_double(s.p_active);
  kv["users_per_pattern"] = std::to_string(s.users_per_pattern);
  kv["num_patterns"] = std::to_string(s.num_patterns);
  kv["rng_seed"] = std::to_string(s.rng_seed);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string desk_preset_config() {
  // Small counts plus a fronthaul-limited geometry: the CP serves the cell
  // from outside over a weak wireless link, so cache quality shows up
  // directly in the delivery power. The QoS target is desk-scaled as well;
  // the evaluation-scale preset keeps the reference values.
  return "# desk-scale preset\n"
         "num_sbs = 3\n"
         "num_users = 6\n"
         "num_contents = 20\n"
         "cp_antennas = 4\n"
         "sbs_antennas = 2\n"
         "frames_per_block = 30\n"
         "num_patterns = 3\n"
         "users_per_pattern = 2\n"
         "cell_edge_m = 300\n"
         "cp_position = -450,0\n"
         "sinr_target_db = 5\n"
         "mu = 0.3\n"
         "p_active = 0.4\n"
         "rng_seed = 1\n";
}

std::string paper_preset_config() {
  return "# evaluation-scale preset\n"
         "num_sbs = 5\n"
         "num_users = 12\n"
         "num_contents = 100\n"
         "cp_antennas = 8\n"
         "sbs_antennas = 4\n"
         "frames_per_block = 50\n"
         "num_patterns = 3\n"
         "users_per_pattern = 4\n"
         "p_active = 0.16666666666666666\n"
         "rng_seed = 1\n";
}

}  // namespace cscn
