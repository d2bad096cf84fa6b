#include "turbohse/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace turbohse::svg {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr double kLeft = 70, kRight = 160, kTop = 36, kGap = 34, kBottom = 36;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render(const Chart& chart) {
  Eigen::Index length = 0;
  for (const auto& p : chart.panels)
    for (const auto& s : p.series) length = std::max(length, s.values.size());
  const double plot_w = chart.width - kLeft - kRight;
  const double ph = chart.panel_height;
  const double height = kTop + static_cast<double>(chart.panels.size()) * (ph + kGap) - kGap + kBottom;
  const double span = std::max<double>(1.0, static_cast<double>(length - 1));
  auto x_of = [&](double t) { return kLeft + plot_w * t / span; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) + "\" height=\"" +
         num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<text x=\"" + num(kLeft) + "\" y=\"20\" font-size=\"14\">" + escape(chart.title) + "</text>\n";

  // bands first so the lines stay on top
  const double band_w = std::max(2.0, plot_w / span);
  const double panels_bottom = height - kBottom;
  for (int t : chart.bands) {
    out += "<rect class=\"band\" x=\"" + num(x_of(t) - band_w / 2) + "\" y=\"" + num(kTop) + "\" width=\"" + num(band_w) +
           "\" height=\"" + num(panels_bottom - kTop) + "\" fill=\"#888\" fill-opacity=\"0.25\"/>\n";
  }

  for (std::size_t p = 0; p < chart.panels.size(); ++p) {
    const Panel& panel = chart.panels[p];
    const double top = kTop + static_cast<double>(p) * (ph + kGap);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : panel.series)
      for (Eigen::Index i = 0; i < s.values.size(); ++i)
        if (std::isfinite(s.values[i])) {
          lo = std::min(lo, s.values[i]);
          hi = std::max(hi, s.values[i]);
        }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    if (hi - lo < 1e-12) {
      lo -= 0.5e-3;
      hi += 0.5e-3;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto y_of = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

    out += "<g class=\"panel\">\n";
    out += "<text x=\"" + num(kLeft) + "\" y=\"" + num(top - 6) + "\">" + escape(panel.title) + "</text>\n";
    out += "<path d=\"M" + num(kLeft) + " " + num(top) + " V" + num(top + ph) + " H" + num(kLeft + plot_w) +
           "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (double v : {lo + pad, hi - pad}) {
      out += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(y_of(v) + 4) + "\" text-anchor=\"end\">" + tick_label(v) +
             "</text>\n";
    }

    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const Series& s = panel.series[k];
      const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
      std::string d;
      bool pen_down = false;
      for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        if (!std::isfinite(s.values[i])) {
          pen_down = false;
          continue;
        }
        d += pen_down ? " L" : (d.empty() ? "M" : " M");
        d += num(x_of(static_cast<double>(i))) + " " + num(y_of(s.values[i]));
        pen_down = true;
      }
      out += "<path class=\"series\" d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\"";
      if (s.dashed) out += " stroke-dasharray=\"5 3\"";
      out += "/>\n";
      // legend
      const double ly = top + 12 + 14 * static_cast<double>(k);
      const double lx = kLeft + plot_w + 10;
      out += "<path d=\"M" + num(lx) + " " + num(ly) + " h20\" stroke=\"" + color + "\" stroke-width=\"2\"" +
             (s.dashed ? " stroke-dasharray=\"5 3\"" : "") + "/>\n";
      out += "<text x=\"" + num(lx + 26) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) + "</text>\n";
    }
    out += "</g>\n";
  }

  out += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(height - 8) +
         "\" text-anchor=\"middle\">timestep</text>\n";
  out += "<text x=\"" + num(kLeft) + "\" y=\"" + num(height - 20) + "\" text-anchor=\"middle\">0</text>\n";
  out += "<text x=\"" + num(kLeft + plot_w) + "\" y=\"" + num(height - 20) + "\" text-anchor=\"middle\">" +
         std::to_string(std::max<Eigen::Index>(0, length - 1)) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace turbohse::svg
