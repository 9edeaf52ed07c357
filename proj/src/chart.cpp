#include "cscn/chart.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cscn/textio.hpp"

namespace cscn::chart {

namespace {

constexpr int kWidth = 720, kHeight = 480;
constexpr int kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range span(const std::vector<Series>& series, bool y_axis) {
  Range r;
  bool first = true;
  for (const auto& s : series) {
    const auto& v = y_axis ? s.y : s.x;
    for (double val : v) {
      if (!std::isfinite(val)) continue;
      if (first) {
        r.lo = r.hi = val;
        first = false;
      } else {
        r.lo = std::min(r.lo, val);
        r.hi = std::max(r.hi, val);
      }
    }
  }
  if (first) return {0.0, 1.0};
  if (r.hi - r.lo < 1e-12) {
    const double pad = std::max(1e-12, std::abs(r.hi) * 0.1 + 1e-3);
    r.lo -= pad;
    r.hi += pad;
  }
  return r;
}

}  // namespace

void write_line_chart(std::ostream& os, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  const Range rx = span(series, false), ry = span(series, true);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) {
    return kLeft + plot_w * (x - rx.lo) / (rx.hi - rx.lo);
  };
  auto py = [&](double y) {
    return kTop + plot_h * (1.0 - (y - ry.lo) / (ry.hi - ry.lo));
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\""
     << " font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  // axes
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
     << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
     << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  // ticks
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / nticks;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / nticks;
    os << "<line x1=\"" << px(fx) << "\" y1=\"" << kTop + plot_h << "\" x2=\""
       << px(fx) << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_double(fx) << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\""
       << kLeft << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_double(fy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
     << " transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">" << y_label
     << "</text>\n";
  // series
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (i) os << ' ';
      os << fmt_double(px(s.x[i])) << ',' << fmt_double(py(s.y[i]));
    }
    os << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << fmt_double(px(s.x[i])) << "\" cy=\""
         << fmt_double(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
         << "\"/>\n";
    const double ly = kTop + 16.0 * double(si);
    os << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly + 8
       << "\" x2=\"" << kLeft + plot_w + 34 << "\" y2=\"" << ly + 8
       << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n";
    os << "<text x=\"" << kLeft + plot_w + 40 << "\" y=\"" << ly + 12
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace cscn::chart
