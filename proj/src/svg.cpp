#include "qft/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qft {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 640.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

struct Frame {
  double gain_lo;
  double gain_hi;

  double x(double phase) const { return kLeft + (phase + 360.0) / 360.0 * (kWidth - kLeft - kRight); }
  double y(double gain) const { return kTop + (gain_hi - gain) / (gain_hi - gain_lo) * (kHeight - kTop - kBottom); }
};

Frame make_frame(const NicholsChart& chart) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto take = [&](const NicholsPoint& p) {
    if (!std::isfinite(p.gain_db)) return;
    lo = std::min(lo, p.gain_db);
    hi = std::max(hi, p.gain_db);
  };
  for (const auto& s : chart.series)
    for (const auto& p : s.points) take(p);
  for (const auto& m : chart.markers) take(m.at);
  if (!std::isfinite(lo)) lo = -40.0, hi = 40.0;
  lo = std::max(lo, -120.0);
  hi = std::min(hi, 120.0);
  lo = std::floor(lo / 10.0) * 10.0 - 10.0;
  hi = std::ceil(hi / 10.0) * 10.0 + 10.0;
  return {lo, hi};
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::vector<std::vector<NicholsPoint>> segments(const NicholsSeries& s) {
  std::vector<std::vector<NicholsPoint>> out(1);
  for (const auto& p : s.points) {
    if (!std::isfinite(p.gain_db)) {
      if (!out.back().empty()) out.emplace_back();
      continue;
    }
    if (!out.back().empty() && std::abs(p.phase_deg - out.back().back().phase_deg) > 180.0) out.emplace_back();
    out.back().push_back(p);
  }
  std::erase_if(out, [](const auto& seg) { return seg.empty(); });
  return out;
}

} // namespace

std::string emit_nichols_svg(const NicholsChart& chart) {
  const Frame f = make_frame(chart);
  std::string svg;
  svg += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
                     "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                     kWidth, kHeight, kWidth, kHeight);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  svg += fmt::format("<defs><clipPath id=\"plot\"><rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" "
                     "height=\"{:.2f}\"/></clipPath></defs>\n",
                     f.x(-360.0), f.y(f.gain_hi), f.x(0.0) - f.x(-360.0), f.y(f.gain_lo) - f.y(f.gain_hi));
  if (!chart.title.empty())
    svg += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       0.5 * (f.x(-360.0) + f.x(0.0)), escape(chart.title));

  svg += "<g class=\"axes\" stroke=\"#cccccc\" stroke-width=\"0.5\">\n";
  for (int phase = -360; phase <= 0; phase += 45)
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>\n", f.x(phase),
                       f.y(f.gain_hi), f.y(f.gain_lo));
  const double step = (f.gain_hi - f.gain_lo) > 120.0 ? 20.0 : 10.0;
  for (double g = std::ceil(f.gain_lo / step) * step; g <= f.gain_hi; g += step)
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{2:.2f}\" x2=\"{1:.2f}\" y2=\"{2:.2f}\"/>\n", f.x(-360.0), f.x(0.0),
                       f.y(g));
  svg += "</g>\n<g class=\"labels\" fill=\"#333333\">\n";
  for (int phase = -360; phase <= 0; phase += 45)
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.x(phase),
                       f.y(f.gain_lo) + 18.0, phase);
  for (double g = std::ceil(f.gain_lo / step) * step; g <= f.gain_hi; g += step)
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.0f}</text>\n", f.x(-360.0) - 6.0,
                       f.y(g) + 4.0, g);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">open-loop phase (deg)</text>\n",
                     0.5 * (f.x(-360.0) + f.x(0.0)), kHeight - 10.0);
  svg += fmt::format("<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">"
                     "open-loop gain (dB)</text>\n",
                     0.5 * (f.y(f.gain_lo) + f.y(f.gain_hi)));
  svg += "</g>\n";

  svg += "<g class=\"series\" clip-path=\"url(#plot)\" fill=\"none\">\n";
  for (const auto& s : chart.series) {
    for (const auto& seg : segments(s)) {
      std::string pts;
      for (const auto& p : seg) {
        if (!pts.empty()) pts += ' ';
        pts += fmt::format("{:.2f},{:.2f}", f.x(p.phase_deg), f.y(p.gain_db));
      }
      svg += fmt::format("<{} points=\"{}\" stroke=\"{}\" stroke-width=\"1.2\"{}/>\n",
                         s.closed ? "polygon" : "polyline", pts, s.color,
                         s.dashed ? " stroke-dasharray=\"5,3\"" : "");
    }
  }
  svg += "</g>\n<g class=\"markers\" clip-path=\"url(#plot)\">\n";
  for (const auto& m : chart.markers) {
    if (!std::isfinite(m.at.gain_db)) continue;
    svg += fmt::format("<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"none\" stroke=\"{}\" "
                       "stroke-width=\"1.5\"><title>{}</title></circle>\n",
                       escape(m.css_class), f.x(m.at.phase_deg), f.y(m.at.gain_db), m.color, escape(m.label));
  }
  svg += "</g>\n<g class=\"legend\">\n";
  double y = kTop + 10.0;
  std::vector<std::string> seen;
  for (const auto& s : chart.series) {
    if (s.label.empty() || std::find(seen.begin(), seen.end(), s.label) != seen.end()) continue;
    seen.push_back(s.label);
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
                       "stroke-width=\"2\"/><text x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
                       kWidth - kRight + 15.0, y, kWidth - kRight + 35.0, s.color, kWidth - kRight + 40.0, y + 4.0,
                       escape(s.label));
    y += 18.0;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

} // namespace qft
