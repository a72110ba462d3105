#include "oscbath/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

namespace oscbath {
namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 260.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kGap = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Panel {
  double y0;  // top edge in pixels
  double t_lo, t_hi, v_lo, v_hi;

  double px(double t) const { return kLeft + (t - t_lo) / (t_hi - t_lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return y0 + (v_hi - v) / (v_hi - v_lo) * kPanelHeight; }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void draw_axes(std::ostream& out, const Panel& p, const std::string& label) {
  const double x1 = kWidth - kRight;
  const double y1 = p.y0 + kPanelHeight;
  out << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#333"/>)",
                     kLeft, p.y0, x1 - kLeft, kPanelHeight)
      << '\n';
  for (int k = 0; k <= 5; ++k) {
    const double t = p.t_lo + (p.t_hi - p.t_lo) * k / 5.0;
    const double v = p.v_lo + (p.v_hi - p.v_lo) * k / 5.0;
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="middle">{:.3g}</text>)", p.px(t),
                       y1 + 15.0, t)
        << '\n';
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="end">{:.3g}</text>)", kLeft - 5.0,
                       p.py(v) + 4.0, v)
        << '\n';
  }
  out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="13">{}</text>)", kLeft, p.y0 - 8.0, label) << '\n';
}

void draw_series(std::ostream& out, const Panel& p, const std::vector<EntanglementReport>& reports, auto&& value,
                 const char* color) {
  out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.2" points=")", color);
  for (const auto& r : reports) out << fmt::format("{:.2f},{:.2f} ", p.px(r.time), p.py(value(r)));
  out << "\"/>\n";
}

void draw_hline(std::ostream& out, const Panel& p, double v) {
  if (v < p.v_lo || v > p.v_hi) return;
  out << fmt::format(R"(<line x1="{:.1f}" y1="{:.2f}" x2="{:.1f}" y2="{:.2f}" stroke="#999" stroke-dasharray="4 3"/>)",
                     kLeft, p.py(v), kWidth - kRight, p.py(v))
      << '\n';
}

}  // namespace

void write_svg_plot(std::ostream& out, const std::vector<EntanglementReport>& reports, const std::string& title) {
  const double height = kTop + 2.0 * kPanelHeight + kGap + 40.0;
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" font-family="sans-serif">)",
                     kWidth, height)
      << '\n';
  out << fmt::format(R"(<text x="{:.1f}" y="20" font-size="14" text-anchor="middle">{}</text>)", kWidth / 2.0, title)
      << '\n';
  if (reports.empty()) {
    out << "</svg>\n";
    return;
  }
  const double t_lo = reports.front().time;
  double t_hi = reports.back().time;
  if (!(t_hi > t_lo)) t_hi = t_lo + 1.0;

  double e_lo = 0.0, e_hi = 0.0;
  double v_lo = 1.0, v_hi = 1.0;
  for (const auto& r : reports) {
    for (double e : r.eta) {
      e_lo = std::min(e_lo, e);
      e_hi = std::max(e_hi, e);
    }
    v_lo = std::min(v_lo, r.best_variance);
    v_hi = std::max(v_hi, r.best_variance);
  }
  pad_range(e_lo, e_hi);
  pad_range(v_lo, v_hi);

  const Panel eta_panel{kTop + 10.0, t_lo, t_hi, e_lo, e_hi};
  const Panel var_panel{kTop + 10.0 + kPanelHeight + kGap, t_lo, t_hi, v_lo, v_hi};

  draw_axes(out, eta_panel, "negativity eta_j (min eigenvalue; < 0 entangled)");
  draw_hline(out, eta_panel, 0.0);
  const std::size_t modes = reports.front().eta.size();
  for (std::size_t j = 0; j < modes; ++j) {
    draw_series(out, eta_panel, reports, [j](const EntanglementReport& r) { return r.eta[j]; },
                kColors[j % std::size(kColors)]);
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" fill="{}">eta_{}</text>)",
                       kWidth - kRight - 60.0, eta_panel.y0 + 15.0 + 13.0 * static_cast<double>(j),
                       kColors[j % std::size(kColors)], j + 1)
        << '\n';
  }

  draw_axes(out, var_panel, "best combined variance (< 1 squeezed)");
  draw_hline(out, var_panel, 1.0);
  draw_series(out, var_panel, reports, [](const EntanglementReport& r) { return r.best_variance; }, kColors[0]);
  out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="12" text-anchor="middle">t</text>)", kWidth / 2.0,
                     height - 8.0)
      << '\n';
  out << "</svg>\n";
}

}  // namespace oscbath
