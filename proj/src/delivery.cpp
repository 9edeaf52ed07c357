#include "cscn/delivery.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cscn/rng.hpp"
#include "cscn/textio.hpp"

namespace cscn {

namespace k = cscn::kernels;
using conic::Affine;


namespace {

constexpr double kLn2 = 0.6931471805599453094;

// an exhausted Newton budget is still usable when it left a feasible point
bool usable_solution(const conic::Solution& s) {
  if (s.status == conic::Status::Optimal) return true;
  return s.status == conic::Status::IterationLimit && !s.x.empty() &&
         std::isfinite(s.objective) && s.max_violation <= 1e-6;
}

// Re and Im of sum_i conj(c_i) x_i for interleaved coordinates placed by idx_of
template <typename IdxOf>
void add_cdot_re(Affine& a, const CVec& c, IdxOf idx_of, double scale = 1.0) {
  for (size_t i = 0; i < c.size(); ++i) {
    a.add(idx_of(int(i), 0), scale * c[i].real());
    a.add(idx_of(int(i), 1), scale * c[i].imag());
  }
}
template <typename IdxOf>
void add_cdot_im(Affine& a, const CVec& c, IdxOf idx_of, double scale = 1.0) {
  for (size_t i = 0; i < c.size(); ++i) {
    a.add(idx_of(int(i), 0), -scale * c[i].imag());
    a.add(idx_of(int(i), 1), scale * c[i].real());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// instance
// ---------------------------------------------------------------------------

ShortTermInstance make_instance(const Scenario& s, const ChannelRealization& ch,
                                const RequestBatch& batch, const Mat& cache_l) {
  ShortTermInstance inst;
  inst.num_sbs = s.num_sbs;
  inst.sbs_antennas = s.sbs_antennas;
  inst.cp_antennas = s.cp_antennas;
  inst.frame = batch.frame;
  inst.fh_bandwidth_hz = s.fh_bandwidth_hz;
  inst.max_power = s.max_tx_power_w;
  inst.slope_sbs = s.power_slope_sbs;
  inst.slope_cp = s.power_slope_cp;
  inst.tau_units = s.tau0_bps / s.fh_bandwidth_hz;

  inst.num_rows = int(batch.groups.size());
  inst.cached = Mat(inst.num_rows, s.num_sbs);
  std::vector<int> local_of(size_t(s.num_users), -1);
  for (int j = 0; j < inst.num_rows; ++j) {
    const auto& g = batch.groups[size_t(j)];
    inst.contents.push_back(g.content);
    inst.gamma.push_back(s.sinr_target[size_t(g.content)]);
    inst.rate_units.push_back(s.edge_rate_bps[size_t(g.content)] /
                              s.fh_bandwidth_hz);
    for (int b = 0; b < s.num_sbs; ++b)
      inst.cached(j, b) = cache_l(g.content, b);
    std::vector<int> lg;
    for (int u : g.users) {
      if (local_of[size_t(u)] < 0) {
        local_of[size_t(u)] = int(inst.user_channel.size());
        const double amp = std::sqrt(s.noise_edge_w[size_t(u)]);
        CVec agg(size_t(s.num_sbs) * size_t(s.sbs_antennas));
        for (int b = 0; b < s.num_sbs; ++b) {
          const CVec& h = ch.h(u, b, s.num_sbs);
          for (int m = 0; m < s.sbs_antennas; ++m)
            agg[size_t(b * s.sbs_antennas + m)] = h[size_t(m)] / amp;
        }
        inst.user_channel.push_back(std::move(agg));
      }
      lg.push_back(local_of[size_t(u)]);
    }
    inst.group.push_back(std::move(lg));
  }
  for (int b = 0; b < s.num_sbs; ++b) {
    const double amp = std::sqrt(s.noise_fh_w[size_t(b)]);
    CMat H = ch.fronthaul[size_t(b)];
    for (auto& e : H.a) e /= amp;
    CVec u1 = dominant_left_singular_vector(H);
    CVec g = cmat_hermitian_apply(H, u1);
    inst.fh_sigma1_sq.push_back(k::cnormsq(g.data(), g.size()));
    inst.fh_u1.push_back(std::move(u1));
    inst.fh_channel.push_back(std::move(H));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// layout
// ---------------------------------------------------------------------------

namespace {
int row_stride(const SubproblemLayout& l) {
  const int vw = 2 * l.num_sbs * l.sbs_antennas +
                 (l.unicast ? l.num_sbs : 2 * l.cp_antennas);
  const int tail = l.unicast ? 3 * l.num_sbs : 2 * l.num_sbs + 1;
  return vw + tail;
}
}  // namespace

int SubproblemLayout::v_idx(int j, int b, int m, int im) const {
  return j * row_stride(*this) + 2 * (b * sbs_antennas + m) + im;
}
int SubproblemLayout::w_idx(int j, int n, int im) const {
  return j * row_stride(*this) + 2 * num_sbs * sbs_antennas + 2 * n + im;
}
int SubproblemLayout::link_power_idx(int j, int b) const {
  return j * row_stride(*this) + 2 * num_sbs * sbs_antennas + b;
}
int SubproblemLayout::e_idx(int j, int b) const {
  const int wlen = unicast ? num_sbs : 2 * cp_antennas;
  return j * row_stride(*this) + 2 * num_sbs * sbs_antennas + wlen + b;
}
int SubproblemLayout::slack_idx(int j, int b) const {
  return e_idx(j, b) + num_sbs;
}
int SubproblemLayout::rate_idx(int j) const { return slack_idx(j, 0) + num_sbs; }
int SubproblemLayout::rate_link_idx(int j, int b) const {
  return slack_idx(j, 0) + num_sbs + b;
}
int SubproblemLayout::epi_idx() const { return rows * row_stride(*this); }

SubproblemLayout make_layout(const ShortTermInstance& inst, bool unicast) {
  SubproblemLayout l;
  l.num_sbs = inst.num_sbs;
  l.sbs_antennas = inst.sbs_antennas;
  l.cp_antennas = inst.cp_antennas;
  l.rows = inst.num_rows;
  l.unicast = unicast;
  l.num_vars = inst.num_rows * row_stride(l) + 1;
  return l;
}

std::vector<double> pack_point(const SubproblemLayout& lay,
                               const ShortTermPoint& p) {
  std::vector<double> x(size_t(lay.num_vars), 0.0);
  const int B = lay.num_sbs, M = lay.sbs_antennas, N = lay.cp_antennas;
  for (int j = 0; j < lay.rows; ++j) {
    for (int b = 0; b < B; ++b)
      for (int m = 0; m < M; ++m) {
        const cd v = p.edge_beam[size_t(j)][size_t(b * M + m)];
        x[size_t(lay.v_idx(j, b, m, 0))] = v.real();
        x[size_t(lay.v_idx(j, b, m, 1))] = v.imag();
      }
    if (lay.unicast) {
      for (int b = 0; b < B; ++b)
        x[size_t(lay.link_power_idx(j, b))] =
            kernels::cnormsq(p.fh_link[size_t(j)][size_t(b)].data(),
                             p.fh_link[size_t(j)][size_t(b)].size());
      for (int b = 0; b < B; ++b)
        x[size_t(lay.rate_link_idx(j, b))] = p.rate_link(j, b);
    } else {
      for (int n = 0; n < N; ++n) {
        const cd w = p.fh_beam[size_t(j)][size_t(n)];
        x[size_t(lay.w_idx(j, n, 0))] = w.real();
        x[size_t(lay.w_idx(j, n, 1))] = w.imag();
      }
      x[size_t(lay.rate_idx(j))] = p.rate[size_t(j)];
    }
    for (int b = 0; b < B; ++b) {
      x[size_t(lay.e_idx(j, b))] = p.clustering(j, b);
      x[size_t(lay.slack_idx(j, b))] = p.slack(j, b);
    }
  }
  x[size_t(lay.epi_idx())] = p.slack_norm_epi;
  return x;
}

ShortTermPoint unpack_point(const ShortTermInstance& inst,
                            const SubproblemLayout& lay,
                            std::span<const double> x) {
  ShortTermPoint p;
  const int B = lay.num_sbs, M = lay.sbs_antennas, N = lay.cp_antennas;
  p.clustering = Mat(lay.rows, B);
  p.slack = Mat(lay.rows, B);
  if (lay.unicast) p.rate_link = Mat(lay.rows, B);
  for (int j = 0; j < lay.rows; ++j) {
    CVec v(size_t(B) * size_t(M), cd{0, 0});
    for (int b = 0; b < B; ++b)
      for (int m = 0; m < M; ++m)
        v[size_t(b * M + m)] = cd(x[size_t(lay.v_idx(j, b, m, 0))],
                                  x[size_t(lay.v_idx(j, b, m, 1))]);
    p.edge_beam.push_back(std::move(v));
    if (lay.unicast) {
      std::vector<CVec> links;
      for (int b = 0; b < B; ++b) {
        CVec w(size_t(N), cd{0, 0});
        const double pw = std::max(0.0, x[size_t(lay.link_power_idx(j, b))]);
        const double amp = std::sqrt(pw);
        for (int n = 0; n < N; ++n) w[size_t(n)] = amp * inst.fh_u1[size_t(b)][size_t(n)];
        links.push_back(std::move(w));
      }
      p.fh_link.push_back(std::move(links));
      for (int b = 0; b < B; ++b)
        p.rate_link(j, b) = x[size_t(lay.rate_link_idx(j, b))];
    } else {
      CVec w(size_t(N), cd{0, 0});
      for (int n = 0; n < N; ++n)
        w[size_t(n)] = cd(x[size_t(lay.w_idx(j, n, 0))],
                          x[size_t(lay.w_idx(j, n, 1))]);
      p.fh_beam.push_back(std::move(w));
      p.rate.push_back(x[size_t(lay.rate_idx(j))]);
    }
    for (int b = 0; b < B; ++b) {
      p.clustering(j, b) = x[size_t(lay.e_idx(j, b))];
      p.slack(j, b) = x[size_t(lay.slack_idx(j, b))];
    }
  }
  p.slack_norm_epi = x[size_t(lay.epi_idx())];
  return p;
}

// ---------------------------------------------------------------------------
// penalized subproblem
// ---------------------------------------------------------------------------

conic::Problem build_ccp_subproblem(const ShortTermInstance& inst,
                                    const SubproblemLayout& lay,
                                    const ShortTermPoint& expansion,
                                    double lambda) {
  const int B = inst.num_sbs, M = inst.sbs_antennas, N = inst.cp_antennas;
  const int rows = inst.num_rows;
  conic::Problem p;
  p.num_vars = lay.num_vars;
  p.lower.assign(size_t(lay.num_vars), -std::numeric_limits<double>::infinity());
  p.upper.assign(size_t(lay.num_vars), std::numeric_limits<double>::infinity());
  for (int j = 0; j < rows; ++j) {
    for (int b = 0; b < B; ++b) {
      p.lower[size_t(lay.e_idx(j, b))] = 0.0;
      p.upper[size_t(lay.e_idx(j, b))] = 1.0;  // the box form of e^2 - e <= 0
      p.lower[size_t(lay.slack_idx(j, b))] = 0.0;
    }
    if (lay.unicast) {
      for (int b = 0; b < B; ++b) {
        p.lower[size_t(lay.rate_link_idx(j, b))] = 0.0;
        p.upper[size_t(lay.rate_link_idx(j, b))] = inst.tau_units;
        p.lower[size_t(lay.link_power_idx(j, b))] = 0.0;
      }
    } else {
      p.lower[size_t(lay.rate_idx(j))] = 0.0;
      p.upper[size_t(lay.rate_idx(j))] = inst.tau_units;
    }
  }
  p.lower[size_t(lay.epi_idx())] = 0.0;

  // objective: load-dependent transmit power plus the slack-norm penalty
  for (int j = 0; j < rows; ++j) {
    for (int b = 0; b < B; ++b) {
      const double w = std::sqrt(inst.slope_sbs[size_t(b)]);
      for (int m = 0; m < M; ++m)
        for (int im = 0; im < 2; ++im) {
          Affine a;
          a.add(lay.v_idx(j, b, m, im), w);
          p.obj_squares.push_back(std::move(a));
        }
    }
    const double wc = std::sqrt(inst.slope_cp);
    if (lay.unicast) {
      for (int b = 0; b < B; ++b)
        p.obj_linear.add(lay.link_power_idx(j, b), inst.slope_cp);
    } else {
      for (int n = 0; n < N; ++n)
        for (int im = 0; im < 2; ++im) {
          Affine a;
          a.add(lay.w_idx(j, n, im), wc);
          p.obj_squares.push_back(std::move(a));
        }
    }
  }
  p.obj_linear.add(lay.epi_idx(), lambda);

  // per-SBS transmit power budgets
  for (int b = 0; b < B; ++b) {
    conic::QuadConstraint qc;
    for (int j = 0; j < rows; ++j)
      for (int m = 0; m < M; ++m)
        for (int im = 0; im < 2; ++im) {
          Affine a;
          a.add(lay.v_idx(j, b, m, im), 1.0);
          qc.squares.push_back(std::move(a));
        }
    qc.lin.offset = -inst.max_power[size_t(b)];
    p.quad.push_back(std::move(qc));
  }

  // ||v_{f,b}|| <= e_{f,b} sqrt(P_b)
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b) {
      conic::SocConstraint sc;
      for (int m = 0; m < M; ++m)
        for (int im = 0; im < 2; ++im) {
          Affine a;
          a.add(lay.v_idx(j, b, m, im), 1.0);
          sc.rows.push_back(std::move(a));
        }
      sc.rhs.add(lay.e_idx(j, b), std::sqrt(inst.max_power[size_t(b)]));
      p.soc.push_back(std::move(sc));
    }

  // linearized SINR per group member
  for (int j = 0; j < rows; ++j) {
    const double gam = inst.gamma[size_t(j)];
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      conic::QuadConstraint qc;
      const double sg = std::sqrt(gam);
      for (int j2 = 0; j2 < rows; ++j2) {
        if (j2 == j) continue;
        Affine re, im;
        auto vi = [&](int i, int c) {
          return lay.v_idx(j2, i / M, i % M, c);
        };
        add_cdot_re(re, h, vi, sg);
        add_cdot_im(im, h, vi, sg);
        qc.squares.push_back(std::move(re));
        qc.squares.push_back(std::move(im));
      }
      // desired-signal lower bound at the expansion point
      const CVec& v0 = expansion.edge_beam[size_t(j)];
      const cd c0 = k::cdot(h.data(), v0.data(), h.size());
      CVec hc(h.size());
      for (size_t i = 0; i < h.size(); ++i) hc[i] = h[i] * c0;
      Affine lin;
      lin.offset = gam + std::norm(c0);
      auto vj = [&](int i, int c) { return lay.v_idx(j, i / M, i % M, c); };
      add_cdot_re(lin, hc, vj, -2.0);
      qc.lin = std::move(lin);
      p.quad.push_back(std::move(qc));
    }
  }

  // fronthaul capacity with the big-M rate shift, exp form per (row, SBS).
  // Unicast links are exact: the optimal beam lies along the dominant
  // singular direction, so capacity is sigma1^2 times the link power.
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b) {
      conic::ExpConstraint ec;
      ec.arg.add(lay.unicast ? lay.rate_link_idx(j, b) : lay.rate_idx(j), kLn2);
      ec.arg.add(lay.e_idx(j, b), kLn2 * inst.tau_units);
      ec.arg.offset = -kLn2 * inst.tau_units;
      if (lay.unicast) {
        ec.bound.offset = 1.0;
        ec.bound.add(lay.link_power_idx(j, b), inst.fh_sigma1_sq[size_t(b)]);
      } else {
        const CMat& H = inst.fh_channel[size_t(b)];
        const CVec& w0 = expansion.fh_beam[size_t(j)];
        CVec g = cmat_hermitian_apply(H, w0);  // H^H w0, length M
        // q = H g so that rhat2 = 2 Re(q^H w) - ||g||^2
        CVec q(size_t(N), cd{0, 0});
        for (int n = 0; n < N; ++n) {
          cd acc{0, 0};
          for (int m = 0; m < M; ++m) acc += H(n, m) * g[size_t(m)];
          q[size_t(n)] = acc;
        }
        ec.bound.offset = 1.0 - k::cnormsq(g.data(), g.size());
        auto wi = [&](int n, int c) { return lay.w_idx(j, n, c); };
        add_cdot_re(ec.bound, q, wi, 2.0);
      }
      p.expc.push_back(std::move(ec));
    }

  // linearized push toward binary clustering
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b) {
      const double e0 = expansion.clustering(j, b);
      conic::LinearConstraint lc;
      lc.expr.offset = e0 * e0;
      lc.expr.add(lay.e_idx(j, b), -(2.0 * e0 - 1.0));
      lc.expr.add(lay.slack_idx(j, b), -1.0);
      p.lin.push_back(std::move(lc));
    }

  // rate floors against every SBS
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b) {
      conic::LinearConstraint lc;
      lc.expr.add(lay.e_idx(j, b),
                  (1.0 - inst.cached(j, b)) * inst.rate_units[size_t(j)]);
      lc.expr.add(lay.unicast ? lay.rate_link_idx(j, b) : lay.rate_idx(j), -1.0);
      p.lin.push_back(std::move(lc));
    }

  // every requested content keeps a nonempty cluster
  for (int j = 0; j < rows; ++j) {
    conic::LinearConstraint lc;
    lc.expr.offset = 1.0;
    for (int b = 0; b < B; ++b) lc.expr.add(lay.e_idx(j, b), -1.0);
    p.lin.push_back(std::move(lc));
  }

  // epigraph of the Frobenius norm of the slack matrix
  {
    conic::SocConstraint sc;
    for (int j = 0; j < rows; ++j)
      for (int b = 0; b < B; ++b) {
        Affine a;
        a.add(lay.slack_idx(j, b), 1.0);
        sc.rows.push_back(std::move(a));
      }
    sc.rhs.add(lay.epi_idx(), 1.0);
    p.soc.push_back(std::move(sc));
  }
  return p;
}

// ---------------------------------------------------------------------------
// formulas
// ---------------------------------------------------------------------------

double min_required_fh_rate(std::span<const double> cached_row,
                            std::span<const double> clustering_row,
                            double edge_rate_bps) {
  double need = 0.0;
  for (size_t b = 0; b < cached_row.size(); ++b)
    need = std::max(need,
                    (1.0 - cached_row[b]) * clustering_row[b] * edge_rate_bps);
  return need;
}

double buffering_time(std::span<const double> cached_row,
                      std::span<const double> clustering_row, double fh_rate_bps,
                      double edge_rate_bps, double segment_bits) {
  double traffic = 0.0;
  for (size_t b = 0; b < cached_row.size(); ++b)
    if (clustering_row[b] >= 0.5)
      traffic = std::max(traffic, (1.0 - cached_row[b]) * segment_bits);
  if (traffic <= 0.0) return 0.0;
  if (fh_rate_bps <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, traffic / fh_rate_bps - segment_bits / edge_rate_bps);
}

// ---------------------------------------------------------------------------
// policy checks
// ---------------------------------------------------------------------------

namespace {

CVec aggregate_beam(const TransmissionPolicy& p, int row, int B, int M) {
  CVec v(size_t(B) * size_t(M), cd{0, 0});
  for (int b = 0; b < B; ++b)
    for (int m = 0; m < M; ++m)
      v[size_t(b * M + m)] = p.edge_beams[size_t(row)][size_t(b)][size_t(m)];
  return v;
}

}  // namespace

double achieved_sinr(const ShortTermInstance& inst, const TransmissionPolicy& p,
                     int row, int local_user) {
  const CVec& h = inst.user_channel[size_t(local_user)];
  double interference = 1.0;  // unit noise in solver scaling
  double signal = 0.0;
  for (int j = 0; j < inst.num_rows; ++j) {
    CVec v = aggregate_beam(p, j, inst.num_sbs, inst.sbs_antennas);
    const double pw = std::norm(k::cdot(h.data(), v.data(), h.size()));
    if (j == row)
      signal = pw;
    else
      interference += pw;
  }
  return signal / interference;
}

double PolicyCheck::worst() const {
  return std::max({power, coupling, sinr, fh_capacity, fh_floor});
}

PolicyCheck check_policy(const ShortTermInstance& inst,
                         const TransmissionPolicy& p) {
  PolicyCheck c;
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  for (int b = 0; b < B; ++b) {
    double pw = 0.0;
    for (int j = 0; j < inst.num_rows; ++j)
      pw += k::cnormsq(p.edge_beams[size_t(j)][size_t(b)].data(), size_t(M));
    c.power = std::max(c.power, (pw - inst.max_power[size_t(b)]) /
                                    inst.max_power[size_t(b)]);
  }
  for (int j = 0; j < inst.num_rows; ++j)
    for (int b = 0; b < B; ++b)
      if (p.clustering(j, b) < 0.5)
        c.coupling = std::max(
            c.coupling,
            std::sqrt(k::cnormsq(p.edge_beams[size_t(j)][size_t(b)].data(),
                                 size_t(M))));
  for (int j = 0; j < inst.num_rows; ++j)
    for (int u : inst.group[size_t(j)])
      c.sinr = std::max(c.sinr, (inst.gamma[size_t(j)] -
                                 achieved_sinr(inst, p, j, u)) /
                                    inst.gamma[size_t(j)]);
  for (int j = 0; j < inst.num_rows; ++j) {
    std::vector<double> cached(size_t(B), 0.0), clus(size_t(B), 0.0);
    for (int b = 0; b < B; ++b) {
      cached[size_t(b)] = inst.cached(j, b);
      clus[size_t(b)] = p.clustering(j, b);
    }
    const double edge_rate = inst.rate_units[size_t(j)];  // B2 units
    const double floor_units =
        min_required_fh_rate(cached, clus, edge_rate);
    const double rate_units = p.fh_rate_bps[size_t(j)] / inst.fh_bandwidth_hz;
    c.fh_floor = std::max(c.fh_floor, floor_units - rate_units);
    // capacity at every serving SBS
    for (int b = 0; b < B; ++b) {
      if (p.clustering(j, b) < 0.5) continue;
      double need_units =
          p.unicast ? (1.0 - inst.cached(j, b)) * edge_rate : rate_units;
      if (need_units <= 0.0) continue;
      const CVec& w = p.unicast ? p.fh_beams_link[size_t(j)][size_t(b)]
                                : p.fh_beams[size_t(j)];
      CVec g = cmat_hermitian_apply(inst.fh_channel[size_t(b)], w);
      const double cap_units = std::log2(1.0 + k::cnormsq(g.data(), g.size()));
      c.fh_capacity = std::max(c.fh_capacity, need_units - cap_units);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// fixed-clustering solver
// ---------------------------------------------------------------------------

namespace {

struct FixedVars {
  // variable base index per (row, b) edge block; -1 when not serving
  Mat v_base;
  // multicast: per row; unicast: per (row, b); -1 when no fronthaul needed
  std::vector<int> w_base;
  Mat w_link_base;
  std::vector<double> rate_units;  // multicast floors per row
  Mat rate_link_units;              // unicast floors
  int num_vars = 0;
  int slack_var = -1;  // >= 0 in restoration mode
};

// The fixed-clustering program separates: the edge beams face SINR and
// power constraints, the fronthaul beams only their own capacity floors.
// Only the edge part needs joint variables; fronthaul is solved per row.
FixedVars fixed_layout(const ShortTermInstance& inst, const Mat& eb, bool unicast,
                       bool with_slack) {
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  FixedVars fv;
  fv.v_base = Mat(inst.num_rows, B, -1.0);
  fv.w_link_base = Mat(inst.num_rows, B, -1.0);
  fv.rate_link_units = Mat(inst.num_rows, B, 0.0);
  int next = 0;
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int b = 0; b < B; ++b)
      if (eb(j, b) >= 0.5) {
        fv.v_base(j, b) = next;
        next += 2 * M;
      }
    if (unicast) {
      fv.w_base.push_back(-1);
      for (int b = 0; b < B; ++b)
        fv.rate_link_units(j, b) =
            eb(j, b) >= 0.5 ? (1.0 - inst.cached(j, b)) * inst.rate_units[size_t(j)]
                            : 0.0;
      fv.rate_units.push_back(0.0);
    } else {
      std::vector<double> cached(size_t(B), 0.0), clus(size_t(B), 0.0);
      for (int b = 0; b < B; ++b) {
        cached[size_t(b)] = inst.cached(j, b);
        clus[size_t(b)] = eb(j, b) >= 0.5 ? 1.0 : 0.0;
      }
      fv.rate_units.push_back(
          min_required_fh_rate(cached, clus, inst.rate_units[size_t(j)]));
      fv.w_base.push_back(-1);
    }
  }
  if (with_slack) {
    fv.slack_var = next;
    ++next;
  }
  fv.num_vars = next;
  return fv;
}

// min ||w||^2 with every member link at capacity `need`: exact through the
// dominant singular pair for one member, successive convexification for
// multi-member multicast clusters
CVec fronthaul_beam(const ShortTermInstance& inst, const std::vector<int>& members,
                    double need, bool thorough = true) {
  const int N = inst.cp_antennas;
  CVec w(size_t(N), cd{0, 0});
  if (members.empty() || need <= 1e-12) return w;
  if (members.size() == 1) {
    const CMat& H = inst.fh_channel[size_t(members[0])];
    CVec u = dominant_left_singular_vector(H);
    CVec g = cmat_hermitian_apply(H, u);
    const double s1sq = k::cnormsq(g.data(), g.size());
    if (s1sq <= 1e-30) return w;
    const double amp = std::sqrt(need / s1sq);
    for (int n = 0; n < N; ++n) w[size_t(n)] = amp * u[size_t(n)];
    return w;
  }
  // multicast: start from a sized beam over the stacked channels
  CMat stack(N, int(members.size()) * inst.sbs_antennas);
  for (size_t si = 0; si < members.size(); ++si) {
    const CMat& H = inst.fh_channel[size_t(members[si])];
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < inst.sbs_antennas; ++m)
        stack(n, int(si) * inst.sbs_antennas + m) = H(n, m);
  }
  auto sized_start = [&](int which) {
    CVec dir;
    if (which == 0) {
      dir = dominant_left_singular_vector(stack);
    } else {
      // start aligned with one member's own best direction
      dir = dominant_left_singular_vector(
          inst.fh_channel[size_t(members[size_t(which - 1) % members.size()])]);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int b : members) {
      CVec g = cmat_hermitian_apply(inst.fh_channel[size_t(b)], dir);
      worst = std::min(worst, k::cnormsq(g.data(), g.size()));
    }
    if (worst <= 1e-30) return CVec();
    const double amp = std::sqrt(1.2 * need / worst);
    for (auto& e : dir) e *= amp;
    return dir;
  };
  w = sized_start(0);
  if (w.empty()) return CVec(size_t(N), cd{0, 0});
  conic::Settings st;
  st.feas_tol = 1e-9;
  st.opt_tol = 1e-9;
  st.max_newton = 200;
  CVec best_w;
  double best_power = std::numeric_limits<double>::infinity();
  const int starts = thorough ? 1 + int(members.size()) : 1;
  const int rounds = thorough ? 25 : 3;
  for (int start = 0; start < starts; ++start) {
  if (start > 0) {
    CVec w2 = sized_start(start);
    if (w2.empty()) continue;
    w = std::move(w2);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < rounds; ++it) {
    conic::Problem p;
    for (int c = 0; c < 2 * N; ++c) p.add_var();
    for (int c = 0; c < 2 * N; ++c) {
      Affine a;
      a.add(c, 1.0);
      p.obj_squares.push_back(std::move(a));
    }
    for (int b : members) {
      const CMat& H = inst.fh_channel[size_t(b)];
      CVec g = cmat_hermitian_apply(H, w);
      CVec q(size_t(N), cd{0, 0});
      for (int n = 0; n < N; ++n) {
        cd acc{0, 0};
        for (int m = 0; m < inst.sbs_antennas; ++m) acc += H(n, m) * g[size_t(m)];
        q[size_t(n)] = acc;
      }
      conic::LinearConstraint lc;
      lc.expr.offset = need + k::cnormsq(g.data(), g.size());
      for (int n = 0; n < N; ++n) {
        lc.expr.add(2 * n, -2.0 * q[size_t(n)].real());
        lc.expr.add(2 * n + 1, -2.0 * q[size_t(n)].imag());
      }
      p.lin.push_back(std::move(lc));
    }
    std::vector<double> hint(size_t(2 * N));
    for (int n = 0; n < N; ++n) {
      hint[size_t(2 * n)] = w[size_t(n)].real();
      hint[size_t(2 * n + 1)] = w[size_t(n)].imag();
    }
    auto sol = conic::solve(p, st, hint);
    if (!sol.ok() && sol.status != conic::Status::IterationLimit) break;
    if (sol.x.empty() || sol.objective > p.objective_value(hint)) break;
    for (int n = 0; n < N; ++n)
      w[size_t(n)] = cd(sol.x[size_t(2 * n)], sol.x[size_t(2 * n + 1)]);
    if (std::isfinite(prev) &&
        std::abs(prev - sol.objective) <= 1e-8 * std::max(1.0, prev))
      break;
    prev = sol.objective;
  }
  const double pw = k::cnormsq(w.data(), w.size());
  if (pw < best_power) {
    best_power = pw;
    best_w = w;
  }
  }
  return best_w;
}

struct FixedPoint {
  std::vector<CVec> v;                  // aggregate per row
  std::vector<CVec> w;                  // per row (multicast)
  std::vector<std::vector<CVec>> wl;    // per row x B (unicast)
};

std::vector<double> fixed_pack(const ShortTermInstance& inst, const FixedVars& fv,
                               const Mat& eb, bool unicast, const FixedPoint& pt,
                               double slack_value) {
  const int B = inst.num_sbs, M = inst.sbs_antennas, N = inst.cp_antennas;
  std::vector<double> x(size_t(fv.num_vars), 0.0);
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int b = 0; b < B; ++b) {
      if (eb(j, b) < 0.5) continue;
      const int base = int(fv.v_base(j, b));
      for (int m = 0; m < M; ++m) {
        x[size_t(base + 2 * m)] = pt.v[size_t(j)][size_t(b * M + m)].real();
        x[size_t(base + 2 * m + 1)] = pt.v[size_t(j)][size_t(b * M + m)].imag();
      }
    }
    if (unicast) {
      for (int b = 0; b < B; ++b) {
        const int base = int(fv.w_link_base(j, b));
        if (base < 0) continue;
        for (int n = 0; n < N; ++n) {
          x[size_t(base + 2 * n)] = pt.wl[size_t(j)][size_t(b)][size_t(n)].real();
          x[size_t(base + 2 * n + 1)] =
              pt.wl[size_t(j)][size_t(b)][size_t(n)].imag();
        }
      }
    } else if (fv.w_base[size_t(j)] >= 0) {
      const int base = fv.w_base[size_t(j)];
      for (int n = 0; n < N; ++n) {
        x[size_t(base + 2 * n)] = pt.w[size_t(j)][size_t(n)].real();
        x[size_t(base + 2 * n + 1)] = pt.w[size_t(j)][size_t(n)].imag();
      }
    }
  }
  if (fv.slack_var >= 0) x[size_t(fv.slack_var)] = slack_value;
  return x;
}

FixedPoint fixed_unpack(const ShortTermInstance& inst, const FixedVars& fv,
                        const Mat& eb, bool unicast,
                        std::span<const double> x) {
  const int B = inst.num_sbs, M = inst.sbs_antennas, N = inst.cp_antennas;
  FixedPoint pt;
  for (int j = 0; j < inst.num_rows; ++j) {
    CVec v(size_t(B) * size_t(M), cd{0, 0});
    for (int b = 0; b < B; ++b) {
      if (eb(j, b) < 0.5) continue;
      const int base = int(fv.v_base(j, b));
      for (int m = 0; m < M; ++m)
        v[size_t(b * M + m)] =
            cd(x[size_t(base + 2 * m)], x[size_t(base + 2 * m + 1)]);
    }
    pt.v.push_back(std::move(v));
    if (unicast) {
      std::vector<CVec> links;
      for (int b = 0; b < B; ++b) {
        CVec w(size_t(N), cd{0, 0});
        const int base = int(fv.w_link_base(j, b));
        if (base >= 0)
          for (int n = 0; n < N; ++n)
            w[size_t(n)] =
                cd(x[size_t(base + 2 * n)], x[size_t(base + 2 * n + 1)]);
        links.push_back(std::move(w));
      }
      pt.wl.push_back(std::move(links));
      pt.w.push_back(CVec(size_t(N), cd{0, 0}));
    } else {
      CVec w(size_t(N), cd{0, 0});
      const int base = fv.w_base[size_t(j)];
      if (base >= 0)
        for (int n = 0; n < N; ++n)
          w[size_t(n)] = cd(x[size_t(base + 2 * n)], x[size_t(base + 2 * n + 1)]);
      pt.w.push_back(std::move(w));
      pt.wl.push_back({});
    }
  }
  return pt;
}

// convex subproblem of the fixed-clustering program at a linearization point;
// in restoration mode the QoS constraints are relaxed by the slack variable
// and the objective is the slack alone
conic::Problem build_fixed_subproblem(const ShortTermInstance& inst,
                                      const FixedVars& fv, const Mat& eb,
                                      bool unicast, const FixedPoint& at) {
  (void)unicast;
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  const bool restore = fv.slack_var >= 0;
  conic::Problem p;
  p.num_vars = fv.num_vars;
  p.lower.assign(size_t(fv.num_vars), -std::numeric_limits<double>::infinity());
  p.upper.assign(size_t(fv.num_vars), std::numeric_limits<double>::infinity());
  if (restore) {
    p.lower[size_t(fv.slack_var)] = -10.0;
    p.obj_linear.add(fv.slack_var, 1.0);
    // small beam regularization keeps the barrier merit coercive
    for (int c = 0; c < fv.num_vars; ++c) {
      if (c == fv.slack_var) continue;
      Affine a;
      a.add(c, 1e-3);
      p.obj_squares.push_back(std::move(a));
    }
  } else {
    for (int j = 0; j < inst.num_rows; ++j) {
      for (int b = 0; b < B; ++b) {
        if (eb(j, b) < 0.5) continue;
        const double w = std::sqrt(inst.slope_sbs[size_t(b)]);
        const int base = int(fv.v_base(j, b));
        for (int c = 0; c < 2 * M; ++c) {
          Affine a;
          a.add(base + c, w);
          p.obj_squares.push_back(std::move(a));
        }
      }
    }
  }

  // per-SBS power stays hard in both modes
  for (int b = 0; b < B; ++b) {
    conic::QuadConstraint qc;
    bool any = false;
    for (int j = 0; j < inst.num_rows; ++j) {
      if (eb(j, b) < 0.5) continue;
      const int base = int(fv.v_base(j, b));
      for (int c = 0; c < 2 * M; ++c) {
        Affine a;
        a.add(base + c, 1.0);
        qc.squares.push_back(std::move(a));
      }
      any = true;
    }
    if (!any) continue;
    qc.lin.offset = -inst.max_power[size_t(b)];
    p.quad.push_back(std::move(qc));
  }

  // SINR, linearized at the expansion point
  for (int j = 0; j < inst.num_rows; ++j) {
    const double gam = inst.gamma[size_t(j)];
    const double sg = std::sqrt(gam);
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      conic::QuadConstraint qc;
      for (int j2 = 0; j2 < inst.num_rows; ++j2) {
        if (j2 == j) continue;
        Affine re, im;
        for (int b = 0; b < B; ++b) {
          if (eb(j2, b) < 0.5) continue;
          const int base = int(fv.v_base(j2, b));
          for (int m = 0; m < M; ++m) {
            const cd hv = h[size_t(b * M + m)];
            re.add(base + 2 * m, sg * hv.real());
            re.add(base + 2 * m + 1, sg * hv.imag());
            im.add(base + 2 * m, -sg * hv.imag());
            im.add(base + 2 * m + 1, sg * hv.real());
          }
        }
        if (!re.idx.empty()) {
          qc.squares.push_back(std::move(re));
          qc.squares.push_back(std::move(im));
        }
      }
      const CVec& v0 = at.v[size_t(j)];
      const cd c0 = k::cdot(h.data(), v0.data(), h.size());
      Affine lin;
      lin.offset = gam + std::norm(c0);
      for (int b = 0; b < B; ++b) {
        if (eb(j, b) < 0.5) continue;
        const int base = int(fv.v_base(j, b));
        for (int m = 0; m < M; ++m) {
          const cd hc = h[size_t(b * M + m)] * c0;
          lin.add(base + 2 * m, -2.0 * hc.real());
          lin.add(base + 2 * m + 1, -2.0 * hc.imag());
        }
      }
      if (restore) lin.add(fv.slack_var, -1.0);
      qc.lin = std::move(lin);
      p.quad.push_back(std::move(qc));
    }
  }

  return p;
}

FixedPoint fixed_init(const ShortTermInstance& inst, const FixedVars& fv,
                      const Mat& eb, bool unicast, std::uint64_t seed) {
  (void)fv;
  (void)unicast;
  const int B = inst.num_sbs, M = inst.sbs_antennas, N = inst.cp_antennas;
  FixedPoint pt;
  Rng rng(seed_mix(seed ? seed : 1, 0x696e6974ULL));
  // per-SBS row counts for the power split
  std::vector<int> rows_at(size_t(B), 0);
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < inst.num_rows; ++j)
      if (eb(j, b) >= 0.5) ++rows_at[size_t(b)];
  for (int j = 0; j < inst.num_rows; ++j) {
    CVec v(size_t(B) * size_t(M), cd{0, 0});
    for (int b = 0; b < B; ++b) {
      if (eb(j, b) < 0.5) continue;
      CVec dir(size_t(M), cd{0, 0});
      if (seed == 0) {
        // matched filter toward the group
        for (int user : inst.group[size_t(j)]) {
          const CVec& h = inst.user_channel[size_t(user)];
          for (int m = 0; m < M; ++m) dir[size_t(m)] += h[size_t(b * M + m)];
        }
      } else {
        for (int m = 0; m < M; ++m) dir[size_t(m)] = cd(rng.normal(), rng.normal());
      }
      double nrm = std::sqrt(k::cnormsq(dir.data(), dir.size()));
      if (nrm <= 1e-30) {
        dir[0] = cd(1, 0);
        nrm = 1.0;
      }
      const double amp = std::sqrt(0.5 * inst.max_power[size_t(b)] /
                                   std::max(1, rows_at[size_t(b)]));
      for (int m = 0; m < M; ++m) v[size_t(b * M + m)] = dir[size_t(m)] / nrm * amp;
    }
    pt.v.push_back(std::move(v));
    pt.w.push_back(CVec(size_t(N), cd{0, 0}));
    pt.wl.push_back(std::vector<CVec>(size_t(B), CVec(size_t(N), cd{0, 0})));
  }
  return pt;
}

double fixed_objective(const ShortTermInstance& inst, const FixedPoint& pt,
                       bool unicast) {
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  double obj = 0.0;
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int b = 0; b < B; ++b)
      obj += inst.slope_sbs[size_t(b)] *
             k::cnormsq(pt.v[size_t(j)].data() + b * M, size_t(M));
    if (unicast) {
      for (int b = 0; b < B; ++b)
        obj += inst.slope_cp * k::cnormsq(pt.wl[size_t(j)][size_t(b)].data(),
                                          pt.wl[size_t(j)][size_t(b)].size());
    } else {
      obj += inst.slope_cp *
             k::cnormsq(pt.w[size_t(j)].data(), pt.w[size_t(j)].size());
    }
  }
  return obj;
}


// strict feasibility of a point against the original fixed-clustering
// constraints (power, SINR, capacity), used to skip restoration
bool fixed_point_strictly_feasible(const ShortTermInstance& inst,
                                   const FixedVars& fv, const Mat& eb,
                                   bool unicast, const FixedPoint& pt,
                                   double margin) {
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  for (int b = 0; b < B; ++b) {
    double pw = 0.0;
    for (int j = 0; j < inst.num_rows; ++j)
      pw += k::cnormsq(pt.v[size_t(j)].data() + b * M, size_t(M));
    if (pw >= inst.max_power[size_t(b)] - margin) return false;
  }
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      double interference = 1.0;
      double signal = 0.0;
      for (int j2 = 0; j2 < inst.num_rows; ++j2) {
        const double pw =
            std::norm(k::cdot(h.data(), pt.v[size_t(j2)].data(), h.size()));
        if (j2 == j)
          signal = pw;
        else
          interference += pw;
      }
      if (inst.gamma[size_t(j)] * interference - signal >= -margin) return false;
    }
  }
  (void)fv;
  (void)eb;
  (void)unicast;
  return true;
}
}  // namespace

// optimistic per-row signal bound: even with every serving SBS at full
// power and zero interference the target must be reachable
bool cluster_possibly_feasible(const ShortTermInstance& inst, const Mat& eb) {
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      double amp = 0.0;
      for (int b = 0; b < B; ++b) {
        if (eb(j, b) < 0.5) continue;
        amp += std::sqrt(k::cnormsq(h.data() + b * M, size_t(M)) *
                         inst.max_power[size_t(b)]);
      }
      if (amp * amp < inst.gamma[size_t(j)]) return false;
    }
  }
  return true;
}

FixedClusteringResult solve_fixed_clustering(const ShortTermInstance& inst,
                                             const Mat& clustering_bin,
                                             bool unicast,
                                             const ShortTermPoint* hint,
                                             std::uint64_t init_seed,
                                             const FixedSolveOptions& opts) {
  FixedClusteringResult out;
  if (!cluster_possibly_feasible(inst, clustering_bin)) return out;
  conic::Settings st;
  st.feas_tol = 1e-7;
  st.opt_tol = opts.opt_tol;
  st.max_newton = 400;
  st.t0 = opts.warm_t0;


  FixedVars fv = fixed_layout(inst, clustering_bin, unicast, false);
  // a needed fronthaul link with a dead channel cannot carry any rate
  for (int j = 0; j < inst.num_rows; ++j)
    for (int b = 0; b < inst.num_sbs; ++b) {
      const double need = unicast ? fv.rate_link_units(j, b)
                                  : (clustering_bin(j, b) >= 0.5
                                         ? fv.rate_units[size_t(j)]
                                         : 0.0);
      if (need <= 1e-12) continue;
      const auto& H = inst.fh_channel[size_t(b)];
      if (k::cnormsq(H.a.data(), H.a.size()) <= 1e-30) return out;
    }
  FixedPoint pt;
  if (hint) {
    pt.v = hint->edge_beam;
    pt.w = hint->fh_beam;
    pt.wl = hint->fh_link;
    // zero out blocks outside the cluster
    for (int j = 0; j < inst.num_rows; ++j)
      for (int b = 0; b < inst.num_sbs; ++b)
        if (clustering_bin(j, b) < 0.5)
          for (int m = 0; m < inst.sbs_antennas; ++m)
            pt.v[size_t(j)][size_t(b * inst.sbs_antennas + m)] = cd{0, 0};
    if (pt.w.empty())
      pt.w.assign(size_t(inst.num_rows),
                  CVec(size_t(inst.cp_antennas), cd{0, 0}));
    if (pt.wl.empty())
      pt.wl.assign(size_t(inst.num_rows),
                   std::vector<CVec>(size_t(inst.num_sbs),
                                     CVec(size_t(inst.cp_antennas), cd{0, 0})));
  } else {
    pt = fixed_init(inst, fv, clustering_bin, unicast, init_seed);
  }

  // restoration: drive the relaxed SINR slack negative; capacity stays hard
  // against fronthaul beams pre-sized to clear their floors
  bool feasible_point =
      fixed_point_strictly_feasible(inst, fv, clustering_bin, unicast, pt, 1e-9);
  if (!feasible_point) {
    FixedVars fvr = fixed_layout(inst, clustering_bin, unicast, true);
    FixedPoint cur = pt;
    double prev_slack = std::numeric_limits<double>::infinity();
    std::vector<double> slack_history;
    conic::Settings str = st;
    str.opt_tol = 1e-6;

    str.hint_is_interior = true;
    for (int it = 0; it < opts.max_restore_iters; ++it) {
      conic::Problem sp = build_fixed_subproblem(inst, fvr, clustering_bin,
                                                 unicast, cur);
      // the current point with a padded slack is strictly interior
      double pad = 1.0;
      {
        auto probe_x = fixed_pack(inst, fvr, clustering_bin, unicast, cur, 0.0);
        pad = std::max(1e-3, 1.1 * sp.max_violation(probe_x) + 1e-3);
      }
      auto x0 = fixed_pack(inst, fvr, clustering_bin, unicast, cur, pad);
      auto sol = conic::solve(sp, str, x0);
      ++out.iterations;
      if (!usable_solution(sol)) break;
      const double slack = sol.x[size_t(fvr.slack_var)];
      cur = fixed_unpack(inst, fvr, clustering_bin, unicast, sol.x);
      if (slack < -1e-6) {
        feasible_point = true;
        pt = cur;
        break;
      }
      if (slack > prev_slack - 1e-7) break;  // stalled above zero
      // geometric tail: extrapolate the limit and bail out early when it
      // cannot reach zero
      slack_history.push_back(slack);
      if (slack_history.size() >= 3) {
        const size_t m = slack_history.size();
        const double d1 = slack_history[m - 2] - slack_history[m - 1];
        const double d0 = slack_history[m - 3] - slack_history[m - 2];
        if (d0 > 0.0 && d1 > 0.0 && d1 < 0.7 * d0) {
          const double ratio = d1 / d0;
          const double limit = slack - d1 * ratio / (1.0 - ratio);
          if (limit > 1e-3) break;
        }
      }
      prev_slack = slack;
    }
  }
  if (!feasible_point) return out;  // infeasible clustering

  const bool feasibility_only = opts.feasibility_only;

  // power minimization by successive convexification; rough rounds first,
  // the final round at the requested precision
  double prev_obj = std::numeric_limits<double>::infinity();
  bool tight = opts.opt_tol >= 1e-6;
  for (int it = 0; !feasibility_only && it < opts.max_power_iters; ++it) {
    conic::Settings stp = st;
    stp.opt_tol = tight ? opts.opt_tol : 1e-6;
    conic::Problem sp =
        build_fixed_subproblem(inst, fv, clustering_bin, unicast, pt);
    auto x0 = fixed_pack(inst, fv, clustering_bin, unicast, pt, 0.0);
    auto sol = conic::solve(sp, stp, x0);
    ++out.iterations;
    if (std::getenv("CSCN_DEBUG"))
      std::fprintf(stderr, "[fixed it=%d] status=%s obj=%g viol=%g iters=%d msg=%s\n",
                   it, conic::status_name(sol.status), sol.objective,
                   sol.max_violation, sol.newton_iters, sol.message.c_str());
    if (!usable_solution(sol)) break;
    {
      const double hint_obj = sp.objective_value(x0);
      if (sol.objective > hint_obj) break;  // inexact solve moved backward
    }
    pt = fixed_unpack(inst, fv, clustering_bin, unicast, sol.x);
    const double obj = sol.objective;
    const double rel_stop = tight ? 1e-7 : 1e-5;
    if (std::isfinite(prev_obj) &&
        std::abs(prev_obj - obj) <= rel_stop * std::max(1.0, std::abs(prev_obj))) {
      if (tight) break;
      tight = true;  // one more pass at full precision
    }
    prev_obj = obj;
  }

  // fronthaul beams per row, independent of the edge part
  const int N = inst.cp_antennas;
  pt.w.assign(size_t(inst.num_rows), CVec(size_t(N), cd{0, 0}));
  pt.wl.assign(size_t(inst.num_rows),
               std::vector<CVec>(size_t(inst.num_sbs), CVec(size_t(N), cd{0, 0})));
  for (int j = 0; j < inst.num_rows; ++j) {
    if (unicast) {
      for (int b = 0; b < inst.num_sbs; ++b) {
        const double rho = fv.rate_link_units(j, b);
        if (rho <= 1e-12) continue;
        pt.wl[size_t(j)][size_t(b)] =
            fronthaul_beam(inst, {b}, std::exp2(rho) - 1.0);
      }
    } else if (fv.rate_units[size_t(j)] > 1e-12) {
      std::vector<int> members;
      for (int b = 0; b < inst.num_sbs; ++b)
        if (clustering_bin(j, b) >= 0.5) members.push_back(b);
      pt.w[size_t(j)] = fronthaul_beam(inst, members,
                                       std::exp2(fv.rate_units[size_t(j)]) - 1.0);
    }
  }

  out.feasible = true;
  out.objective_w = fixed_objective(inst, pt, unicast);
  out.edge_beam = pt.v;
  out.fh_beam = pt.w;
  out.fh_link = pt.wl;
  out.rate_units = fv.rate_units;
  if (unicast)
    for (int j = 0; j < inst.num_rows; ++j) {
      double worst = 0.0;
      for (int b = 0; b < inst.num_sbs; ++b)
        worst = std::max(worst, fv.rate_link_units(j, b));
      out.rate_units[size_t(j)] = worst;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Algorithm-1 pipeline (penalty CCCP + quantization + polish)
// ---------------------------------------------------------------------------

namespace {

TransmissionPolicy policy_from_fixed(const ShortTermInstance& inst,
                                     const Mat& eb, bool unicast,
                                     const FixedClusteringResult& fx) {
  const int B = inst.num_sbs, M = inst.sbs_antennas;
  TransmissionPolicy p;
  p.frame = inst.frame;
  p.unicast = unicast;
  p.contents = inst.contents;
  p.clustering = eb;
  for (int j = 0; j < inst.num_rows; ++j) {
    std::vector<CVec> beams;
    for (int b = 0; b < B; ++b) {
      CVec vb(size_t(M), cd{0, 0});
      for (int m = 0; m < M; ++m)
        vb[size_t(m)] = fx.edge_beam[size_t(j)][size_t(b * M + m)];
      beams.push_back(std::move(vb));
    }
    p.edge_beams.push_back(std::move(beams));
    p.fh_rate_bps.push_back(fx.rate_units[size_t(j)] * inst.fh_bandwidth_hz);
  }
  p.fh_beams = fx.fh_beam;
  p.fh_beams_link = fx.fh_link;
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int b = 0; b < B; ++b)
      p.edge_power_w +=
          inst.slope_sbs[size_t(b)] *
          k::cnormsq(p.edge_beams[size_t(j)][size_t(b)].data(), size_t(M));
    if (unicast)
      for (int b = 0; b < B; ++b)
        p.fh_power_w += inst.slope_cp *
                        k::cnormsq(p.fh_beams_link[size_t(j)][size_t(b)].data(),
                                   p.fh_beams_link[size_t(j)][size_t(b)].size());
    else
      p.fh_power_w += inst.slope_cp * k::cnormsq(p.fh_beams[size_t(j)].data(),
                                                 p.fh_beams[size_t(j)].size());
  }
  p.power_w = p.edge_power_w + p.fh_power_w;
  return p;
}

ShortTermResult run_short_term(const Scenario& s, const ChannelRealization& ch,
                               const RequestBatch& batch, const Mat& cache_l,
                               const ShortTermParams& params, bool unicast) {
  ShortTermResult res;
  ShortTermInstance inst = make_instance(s, ch, batch, cache_l);
  const int B = inst.num_sbs, rows = inst.num_rows;
  if (rows == 0) {
    res.status = ShortTermStatus::Ok;
    res.policy.frame = inst.frame;
    res.policy.unicast = unicast;
    res.policy.clustering = Mat(0, B);
    return res;
  }
  SubproblemLayout lay = make_layout(inst, unicast);

  // feasibility probe on the all-ones clustering; a warm start from a known
  // feasible policy stands in for it on re-solves
  Mat ones(rows, B, 1.0);
  FixedClusteringResult probe;
  if (params.warm_start) {
    probe.feasible = true;
    probe.edge_beam = params.warm_start->edge_beam;
    probe.fh_beam = params.warm_start->fh_beam;
    probe.fh_link = params.warm_start->fh_link;
    probe.rate_units = params.warm_start->rate;
    if (unicast) {
      probe.rate_units.assign(size_t(rows), 0.0);
      for (int j = 0; j < rows; ++j)
        for (int b = 0; b < B; ++b)
          probe.rate_units[size_t(j)] = std::max(
              probe.rate_units[size_t(j)], params.warm_start->rate_link(j, b));
    }
  } else {
    FixedSolveOptions probe_opts;
    probe_opts.feasibility_only = true;
    probe = solve_fixed_clustering(inst, ones, unicast, nullptr,
                                   params.beam_init_seed, probe_opts);
  }
  if (!probe.feasible) {
    res.status = ShortTermStatus::Infeasible;
    res.diag.message = "all-ones clustering probe infeasible";
    return res;
  }

  // expansion point: probe beams, random clustering in [0,1]
  ShortTermPoint psi;
  psi.edge_beam = probe.edge_beam;
  psi.fh_beam = probe.fh_beam;
  psi.fh_link = probe.fh_link;
  psi.clustering = Mat(rows, B);
  if (params.fixed_clustering0) {
    psi.clustering = *params.fixed_clustering0;
  } else {
    Rng rng(seed_mix(params.init_seed, 0xe0e0ULL, std::uint64_t(inst.frame)));
    for (int j = 0; j < rows; ++j)
      for (int b = 0; b < B; ++b) psi.clustering(j, b) = rng.uniform01();
  }
  psi.slack = Mat(rows, B);
  double sn = 0.0;
  for (int j = 0; j < rows; ++j)
    for (int b = 0; b < B; ++b) {
      const double e = psi.clustering(j, b);
      psi.slack(j, b) = std::max(0.0, e - e * e) + 1e-6;
      sn += psi.slack(j, b) * psi.slack(j, b);
    }
  psi.slack_norm_epi = std::sqrt(sn) + 1e-6;
  psi.rate = probe.rate_units;
  if (params.warm_start && !unicast)
    for (int j = 0; j < rows; ++j) {
      // the recorded policy rate floor may sit below the all-ones floor
      psi.rate[size_t(j)] = std::max(psi.rate[size_t(j)], 0.0);
    }
  psi.rate_link = Mat(rows, B);
  if (unicast)
    for (int j = 0; j < rows; ++j)
      for (int b = 0; b < B; ++b)
        psi.rate_link(j, b) = (1.0 - inst.cached(j, b)) * inst.rate_units[size_t(j)];

  conic::Settings st;
  st.feas_tol = 1e-7;
  st.max_newton = 400;


  // The penalty schedule is calibrated for reference-scale powers; a
  // fractional clustering entry is worth up to ~ln2 * tau * (row fronthaul
  // power) through the rate-floor discount, so the whole ladder is scaled
  // until its cap dominates that marginal value.
  double penalty_scale = 1.0;
  {
    double worst_fh = 0.0;
    for (int j = 0; j < rows; ++j) {
      double row_fh = 0.0;
      if (unicast)
        for (int b = 0; b < B; ++b)
          row_fh += inst.slope_cp * k::cnormsq(probe.fh_link[size_t(j)][size_t(b)].data(),
                                               probe.fh_link[size_t(j)][size_t(b)].size());
      else
        row_fh = inst.slope_cp * k::cnormsq(probe.fh_beam[size_t(j)].data(),
                                            probe.fh_beam[size_t(j)].size());
      worst_fh = std::max(worst_fh, row_fh);
    }
    penalty_scale = std::max(
        1.0, 3.0 * kLn2 * inst.tau_units * worst_fh / params.lambda_max);
  }

  double lambda = params.penalty_start_max ? params.lambda_max : params.lambda0;
  double prev_obj = std::numeric_limits<double>::infinity();
  double prev_lambda = params.penalty_start_max ? params.lambda_max : -1.0;
  int kept_hint = 0;
  for (int it = 0; it < params.max_iterations; ++it) {
    st.opt_tol = lambda >= params.lambda_max ? 1e-6 : 1e-4;
    st.t0 = it == 0 ? 1.0 : 1e4;
    conic::Problem sp =
        build_ccp_subproblem(inst, lay, psi, lambda * penalty_scale);
    auto hint = pack_point(lay, psi);
    // the expansion point is feasible with the same objective it scored in
    // the previous round, so an inexact solve never has to move backward
    const double hint_obj = sp.objective_value(hint);
    auto sol = conic::solve(sp, st, hint);
    double obj = hint_obj;
    if (usable_solution(sol) && sol.objective <= hint_obj) {
      psi = unpack_point(inst, lay, sol.x);
      obj = sol.objective;
      kept_hint = 0;
    } else {
      ++kept_hint;  // keep the tangent point; constraints allow it exactly
      if (!usable_solution(sol))
        res.diag.message = std::string("subproblem: ") + sol.message;
    }
    res.diag.objective_history.push_back(obj);
    res.diag.lambda_history.push_back(lambda);
    ++res.diag.iterations;
    const bool saturated =
        lambda >= params.lambda_max && prev_lambda >= params.lambda_max;
    const bool small_change = std::abs(prev_obj - obj) <
                              params.stop_tol * std::max(1.0, std::abs(prev_obj));
    prev_obj = obj;
    prev_lambda = lambda;
    lambda = std::min(params.lambda_max, lambda * params.lambda_growth);
    if (saturated && (small_change || kept_hint >= 2)) break;
  }

  // Quantization. Entries that converged next to a bound snap by the
  // threshold (ties at eps round up). Entries stranded mid-range flag the
  // instance; they round to the nearest bound so the largest values stay in
  // the cluster, and the all-in rounding is kept as a fallback candidate.
  Mat eb(rows, B);
  Mat eb_allin(rows, B);
  bool nonbinary = false;
  for (int j = 0; j < rows; ++j) {
    double best = -1.0;
    int best_b = 0;
    bool any = false, any_allin = false;
    for (int b = 0; b < B; ++b) {
      const double e = psi.clustering(j, b);
      if (e > best) {
        best = e;
        best_b = b;
      }
      const bool mid = e > params.epsilon && e < 1.0 - params.epsilon;
      if (mid) nonbinary = true;
      eb(j, b) = mid ? (e >= 0.5 ? 1.0 : 0.0) : (e < params.epsilon ? 0.0 : 1.0);
      eb_allin(j, b) = e < params.epsilon ? 0.0 : 1.0;
      any = any || eb(j, b) > 0.5;
      any_allin = any_allin || eb_allin(j, b) > 0.5;
    }
    if (!any) eb(j, best_b) = 1.0;  // keep the cluster nonempty
    if (!any_allin) eb_allin(j, best_b) = 1.0;
  }
  res.diag.non_binary_residual = nonbinary;

  // polish the fixed clustering; on infeasibility flip the largest
  // excluded entries back in, at most B per content
  FixedSolveOptions warm_opts;
  warm_opts.warm_t0 = 200.0;
  auto polish = [&](Mat cand) {
    std::pair<FixedClusteringResult, Mat> out;
    std::vector<int> flips_left(size_t(rows), B);
    while (true) {
      auto fx = solve_fixed_clustering(inst, cand, unicast, &psi, 0, warm_opts);
      if (fx.feasible) {
        out = {std::move(fx), cand};
        return out;
      }
      int bj = -1, bb = -1;
      double best = -1.0;
      for (int j = 0; j < rows; ++j) {
        if (flips_left[size_t(j)] <= 0) continue;
        for (int b = 0; b < B; ++b)
          if (cand(j, b) < 0.5 && psi.clustering(j, b) > best) {
            best = psi.clustering(j, b);
            bj = j;
            bb = b;
          }
      }
      if (bj < 0) {
        auto fx2 = solve_fixed_clustering(inst, ones, unicast, &psi, 0, warm_opts);
        out = {fx2.feasible ? std::move(fx2) : probe, ones};
        return out;
      }
      cand(bj, bb) = 1.0;
      --flips_left[size_t(bj)];
      ++res.diag.repair_flips;
    }
  };

  // under concentrated caches the natural cluster is the set of SBSs that
  // hold the content in full: zero fronthaul, best beam gain
  Mat eb_cached = eb;
  bool have_cached_rows = false;
  for (int j = 0; j < rows; ++j) {
    std::vector<int> members;
    for (int b = 0; b < B; ++b)
      if (inst.cached(j, b) >= 1.0 - 1e-9) members.push_back(b);
    if (members.empty()) continue;
    // optimistic signal check for every group member before adopting
    bool viable = true;
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      double amp = 0.0;
      for (int b : members)
        amp += std::sqrt(k::cnormsq(h.data() + b * inst.sbs_antennas,
                                    size_t(inst.sbs_antennas)) *
                         inst.max_power[size_t(b)]);
      if (amp * amp < 4.0 * inst.gamma[size_t(j)]) {
        viable = false;
        break;
      }
    }
    if (!viable) continue;
    for (int b = 0; b < B; ++b)
      eb_cached(j, b) = std::find(members.begin(), members.end(), b) !=
                                members.end()
                            ? 1.0
                            : 0.0;
    have_cached_rows = true;
  }

  // floor-minimal variant: each row served by its best-cached SBS only
  Mat eb_maxl = eb;
  bool have_maxl = false;
  for (int j = 0; j < rows; ++j) {
    int best_b = 0;
    for (int b = 1; b < B; ++b)
      if (inst.cached(j, b) > inst.cached(j, best_b)) best_b = b;
    bool viable = true;
    for (int user : inst.group[size_t(j)]) {
      const CVec& h = inst.user_channel[size_t(user)];
      const double amp =
          std::sqrt(k::cnormsq(h.data() + best_b * inst.sbs_antennas,
                               size_t(inst.sbs_antennas)) *
                    inst.max_power[size_t(best_b)]);
      if (amp * amp < 4.0 * inst.gamma[size_t(j)]) {
        viable = false;
        break;
      }
    }
    if (!viable) continue;
    for (int b = 0; b < B; ++b) eb_maxl(j, b) = b == best_b ? 1.0 : 0.0;
    have_maxl = true;
  }

  // per-row fronthaul-minimal composition: member sets are few (2^B - 1)
  // and their fronthaul cost has a closed form, so search them outright
  Mat eb_fhmin = eb;
  std::vector<std::vector<double>> mask_cost(
      size_t(rows), std::vector<double>(size_t(1 << B),
                                        std::numeric_limits<double>::quiet_NaN()));
  auto row_mask_cost = [&](int j, int mask) {
    double& memo = mask_cost[size_t(j)][size_t(mask)];
    if (!std::isnan(memo)) return memo;
    std::vector<int> members;
    double floor_units = 0.0;
    for (int b = 0; b < B; ++b)
      if (mask & (1 << b)) {
        members.push_back(b);
        floor_units = std::max(floor_units, (1.0 - inst.cached(j, b)) *
                                                inst.rate_units[size_t(j)]);
      }
    double cost = 0.0;
    if (floor_units > 1e-12) {
      if (unicast) {
        for (int b : members)
          cost += inst.slope_cp *
                  (std::exp2((1.0 - inst.cached(j, b)) *
                             inst.rate_units[size_t(j)]) -
                   1.0) /
                  std::max(inst.fh_sigma1_sq[size_t(b)], 1e-30);
      } else {
        CVec w =
            fronthaul_beam(inst, members, std::exp2(floor_units) - 1.0, false);
        cost = inst.slope_cp * k::cnormsq(w.data(), w.size());
      }
    }
    memo = cost;
    return cost;
  };
  if (B <= 5) {
    for (int j = 0; j < rows; ++j) {
      double best_cost = std::numeric_limits<double>::infinity();
      int best_mask = 0;
      for (int mask = 1; mask < (1 << B); ++mask) {
        std::vector<int> members;
        for (int b = 0; b < B; ++b)
          if (mask & (1 << b)) members.push_back(b);
        bool viable = true;
        for (int user : inst.group[size_t(j)]) {
          const CVec& h = inst.user_channel[size_t(user)];
          double amp = 0.0;
          for (int b : members)
            amp += std::sqrt(k::cnormsq(h.data() + b * inst.sbs_antennas,
                                        size_t(inst.sbs_antennas)) *
                             inst.max_power[size_t(b)]);
          if (amp * amp < 4.0 * inst.gamma[size_t(j)]) {
            viable = false;
            break;
          }
        }
        if (!viable) continue;
        const double cost =
            row_mask_cost(j, mask) - 1e-9 * double(members.size());
        if (cost < best_cost) {
          best_cost = cost;
          best_mask = mask;
        }
      }
      if (best_mask)
        for (int b = 0; b < B; ++b)
          eb_fhmin(j, b) = (best_mask & (1 << b)) ? 1.0 : 0.0;
    }
  }

  FixedSolveOptions rank_opts;
  rank_opts.max_power_iters = 4;
  rank_opts.max_restore_iters = 8;
  rank_opts.warm_t0 = 200.0;
  rank_opts.opt_tol = 1e-5;
  std::vector<Mat> cands = {eb};
  if (eb_fhmin.a != eb.a) cands.push_back(eb_fhmin);
  if (nonbinary && eb_allin.a != eb.a) cands.push_back(eb_allin);
  if (have_cached_rows && eb_cached.a != eb.a) cands.push_back(eb_cached);
  if (have_maxl && eb_maxl.a != eb.a &&
      (!have_cached_rows || eb_maxl.a != eb_cached.a))
    cands.push_back(eb_maxl);
  // pre-rank alternatives by their closed-form fronthaul cost and keep two
  auto fh_cost_of = [&](const Mat& cand) {
    double total = 0.0;
    for (int j = 0; j < rows; ++j) {
      int mask = 0;
      for (int b = 0; b < B; ++b)
        if (cand(j, b) >= 0.5) mask |= 1 << b;
      if (mask) total += row_mask_cost(j, mask);
    }
    return total;
  };
  if (cands.size() > 3) {
    std::vector<std::pair<double, size_t>> order;
    for (size_t c = 1; c < cands.size(); ++c)
      order.push_back({fh_cost_of(cands[c]), c});
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Mat> keep = {cands[0]};
    for (size_t i = 0; i < order.size() && keep.size() < 3; ++i)
      keep.push_back(cands[order[i].second]);
    cands = std::move(keep);
  }
  Mat best_cand = eb;
  double best_rank = std::numeric_limits<double>::infinity();
  for (const auto& cand : cands) {
    auto r = solve_fixed_clustering(inst, cand, unicast, &psi, 0, rank_opts);
    if (r.feasible && r.objective_w < best_rank) {
      best_rank = r.objective_w;
      best_cand = cand;
    }
  }
  auto [fx, eb_final] = polish(best_cand);
  if (!fx.feasible && best_cand.a != eb.a) {
    auto [fx2, eb2] = polish(eb);
    fx = std::move(fx2);
    eb_final = eb2;
  }
  eb = eb_final;

  // Bounded single-entry descent on the clustering, first improvement wins.
  // Flip order follows how unsure the quantization was about each entry, so
  // the budget goes to the entries the relaxation left ambiguous.
  {
    int flip_budget = rows * B <= 8 ? 4 * B : B;
    bool improved = true;
    while (improved && flip_budget > 0) {
      improved = false;
      // single-entry toggles plus SBS transfers between rows
      std::vector<std::pair<double, Mat>> cands;
      std::vector<int> members(size_t(rows), 0);
      for (int j = 0; j < rows; ++j)
        for (int b = 0; b < B; ++b) members[size_t(j)] += eb(j, b) > 0.5 ? 1 : 0;
      auto unsureness = [&](int j, int b) {
        return eb(j, b) > 0.5 ? 1.0 - psi.clustering(j, b)
                              : psi.clustering(j, b);
      };
      auto row_mask = [&](const Mat& m, int j) {
        int mask = 0;
        for (int b = 0; b < B; ++b)
          if (m(j, b) >= 0.5) mask |= 1 << b;
        return mask;
      };
      // score: fronthaul power saved by the move, quantization unsureness
      // breaking ties
      auto move_score = [&](const Mat& cand, int j, double unsure) {
        const double before = row_mask_cost(j, row_mask(eb, j));
        const double after = row_mask_cost(j, row_mask(cand, j));
        return (before - after) + 1e-3 * unsure;
      };
      for (int j = 0; j < rows; ++j)
        for (int b = 0; b < B; ++b) {
          if (eb(j, b) > 0.5 && members[size_t(j)] <= 1) continue;
          Mat cand = eb;
          cand(j, b) = cand(j, b) > 0.5 ? 0.0 : 1.0;
          const double score = move_score(cand, j, unsureness(j, b));
          cands.push_back({score, std::move(cand)});
        }
      for (int b = 0; b < B; ++b)
        for (int j = 0; j < rows; ++j) {
          if (eb(j, b) < 0.5 || members[size_t(j)] <= 1) continue;
          for (int j2 = 0; j2 < rows; ++j2) {
            if (j2 == j || eb(j2, b) > 0.5) continue;
            Mat cand = eb;
            cand(j, b) = 0.0;
            cand(j2, b) = 1.0;
            const double score = move_score(cand, j, unsureness(j, b)) +
                                 move_score(cand, j2, unsureness(j2, b));
            cands.push_back({score, std::move(cand)});
          }
        }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      ShortTermPoint best_pt;
      best_pt.edge_beam = fx.edge_beam;
      best_pt.fh_beam = fx.fh_beam;
      best_pt.fh_link = fx.fh_link;
      FixedSolveOptions eval_opts;
      eval_opts.max_power_iters = 6;
      eval_opts.max_restore_iters = 8;
      eval_opts.warm_t0 = 200.0;
      eval_opts.opt_tol = 1e-5;
      for (const auto& [score, cand] : cands) {
        if (flip_budget <= 0) break;
        auto fx2 =
            solve_fixed_clustering(inst, cand, unicast, &best_pt, 0, eval_opts);
        --flip_budget;
        if (fx2.feasible && fx2.objective_w < fx.objective_w * (1.0 - 1e-9)) {
          fx = std::move(fx2);
          eb = cand;
          improved = true;
          break;
        }
      }
    }
    // the winner was ranked with a truncated solve; finish it properly
    ShortTermPoint final_pt;
    final_pt.edge_beam = fx.edge_beam;
    final_pt.fh_beam = fx.fh_beam;
    final_pt.fh_link = fx.fh_link;
    auto fx_final =
        solve_fixed_clustering(inst, eb, unicast, &final_pt, 0, warm_opts);
    if (fx_final.feasible && fx_final.objective_w <= fx.objective_w)
      fx = std::move(fx_final);
  }

  res.status = ShortTermStatus::Ok;
  res.policy = policy_from_fixed(inst, eb, unicast, fx);
  res.policy.ccp_iterations = res.diag.iterations;
  res.policy.non_binary_residual = nonbinary;
  return res;
}

}  // namespace

ShortTermResult solve_short_term(const Scenario& s, const ChannelRealization& ch,
                                 const RequestBatch& batch, const Mat& cache_l,
                                 const ShortTermParams& params) {
  return run_short_term(s, ch, batch, cache_l, params, false);
}

ShortTermResult solve_short_term_unicast(const Scenario& s,
                                         const ChannelRealization& ch,
                                         const RequestBatch& batch,
                                         const Mat& cache_l,
                                         const ShortTermParams& params) {
  return run_short_term(s, ch, batch, cache_l, params, true);
}

void write_policy_csv(std::ostream& os, const ShortTermInstance& inst,
                      const TransmissionPolicy& p) {
  os << "record,f,b_or_k,e,edge_beam_power_w,fh_beam_power_w,fh_rate_bps,sinr\n";
  const int B = inst.num_sbs;
  for (int j = 0; j < inst.num_rows; ++j) {
    for (int b = 0; b < B; ++b) {
      const double vp = k::cnormsq(p.edge_beams[size_t(j)][size_t(b)].data(),
                                   p.edge_beams[size_t(j)][size_t(b)].size());
      const double wp =
          p.unicast ? k::cnormsq(p.fh_beams_link[size_t(j)][size_t(b)].data(),
                                 p.fh_beams_link[size_t(j)][size_t(b)].size())
                    : 0.0;
      os << "cluster," << p.contents[size_t(j)] << ',' << b << ','
         << fmt_double(p.clustering(j, b)) << ',' << fmt_double(vp) << ','
         << fmt_double(wp) << ",,\n";
    }
    const double wp = p.unicast
                          ? 0.0
                          : k::cnormsq(p.fh_beams[size_t(j)].data(),
                                       p.fh_beams[size_t(j)].size());
    os << "fronthaul," << p.contents[size_t(j)] << ",,," << ','
       << fmt_double(wp) << ',' << fmt_double(p.fh_rate_bps[size_t(j)]) << ",\n";
    for (int u : inst.group[size_t(j)])
      os << "sinr," << p.contents[size_t(j)] << ',' << u << ",,,,,"
         << fmt_double(achieved_sinr(inst, p, j, u)) << '\n';
  }
}

}  // namespace cscn
