#include "cscn/channel.hpp"

#include <cmath>
#include <ostream>

#include "cscn/rng.hpp"
#include "cscn/textio.hpp"

namespace cscn {

namespace {

constexpr std::uint64_t kShadowStream = 0x73686164ULL;
constexpr std::uint64_t kFadeStream = 0x66616465ULL;
constexpr double kInvSqrt2 = 0.7071067811865475244;

double dist_m(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double path_loss_db(double d_km, double fixed_db, double slope_db) {
  return fixed_db + slope_db * std::log10(d_km);
}

double large_scale_gain(const Scenario& s, double distance_m, double shadow_db) {
  const double d = std::max(distance_m, s.min_distance_m);
  const double pl = path_loss_db(d / 1000.0, s.pathloss_fixed_db, s.pathloss_slope_db);
  return std::pow(10.0, (-pl + s.antenna_gain_dbi + shadow_db) / 10.0);
}

ChannelRealization sample_channels(const Scenario& s, int frame,
                                   std::uint64_t seed) {
  const int B = s.num_sbs, K = s.num_users, M = s.sbs_antennas, N = s.cp_antennas;
  const int block = frame / s.frames_per_block;
  ChannelRealization ch;
  ch.frame = frame;
  ch.edge.resize(size_t(K) * size_t(B));
  ch.fronthaul.assign(size_t(B), CMat(N, M));

  // link ids: edge links are k*B+b, the fronthaul link of SBS b is K*B+b
  auto shadow = [&](int link) {
    if (s.shadowing_std_db <= 0.0) return 0.0;
    Rng r(seed_mix(seed, kShadowStream, std::uint64_t(block), std::uint64_t(link)));
    return s.shadowing_std_db * r.normal();
  };

  for (int k = 0; k < K; ++k) {
    for (int b = 0; b < B; ++b) {
      const int link = k * B + b;
      const double g = large_scale_gain(
          s, dist_m(s.user_positions[size_t(k)], s.sbs_positions[size_t(b)]),
          shadow(link));
      const double amp = std::sqrt(g);
      Rng r(seed_mix(seed, kFadeStream, std::uint64_t(frame), std::uint64_t(link)));
      CVec& h = ch.edge[size_t(link)];
      h.resize(size_t(M));
      for (int m = 0; m < M; ++m)
        h[size_t(m)] = amp * cd(kInvSqrt2 * r.normal(), kInvSqrt2 * r.normal());
    }
  }
  for (int b = 0; b < B; ++b) {
    const int link = K * B + b;
    const double g = large_scale_gain(
        s, dist_m(s.cp_position, s.sbs_positions[size_t(b)]), shadow(link));
    const double amp = std::sqrt(g);
    Rng r(seed_mix(seed, kFadeStream, std::uint64_t(frame), std::uint64_t(link)));
    CMat& H = ch.fronthaul[size_t(b)];
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m)
        H(n, m) = amp * cd(kInvSqrt2 * r.normal(), kInvSqrt2 * r.normal());
  }
  return ch;
}

void write_channel_trace_csv(std::ostream& os, const Scenario& s,
                             const std::vector<ChannelRealization>& frames) {
  os << "t,link,k_or_cp,b,row,col,re,im\n";
  for (const auto& ch : frames) {
    for (int k = 0; k < s.num_users; ++k)
      for (int b = 0; b < s.num_sbs; ++b) {
        const CVec& h = ch.h(k, b, s.num_sbs);
        for (int m = 0; m < s.sbs_antennas; ++m)
          os << ch.frame << ",edge," << k << ',' << b << ",0," << m << ','
             << fmt_double(h[size_t(m)].real()) << ','
             << fmt_double(h[size_t(m)].imag()) << '\n';
      }
    for (int b = 0; b < s.num_sbs; ++b) {
      const CMat& H = ch.fronthaul[size_t(b)];
      for (int n = 0; n < s.cp_antennas; ++n)
        for (int m = 0; m < s.sbs_antennas; ++m)
          os << ch.frame << ",fh,cp," << b << ',' << n << ',' << m << ','
             << fmt_double(H(n, m).real()) << ',' << fmt_double(H(n, m).imag())
             << '\n';
    }
  }
}

}  // namespace cscn
