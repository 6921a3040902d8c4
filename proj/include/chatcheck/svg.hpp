#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "chatcheck/common.hpp"

namespace chatcheck::svg {

// Golden-angle hue walk; readable neighbouring colors for up to ~80 intents.
inline std::string intent_color(std::size_t index) {
  const double hue = std::fmod(static_cast<double>(index) * 0.61803398875, 1.0) * 360.0;
  const double s = 0.65, l = 0.45;
  const double c = (1.0 - std::fabs(2.0 * l - 1.0)) * s;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = l - c / 2.0;
  auto to255 = [&](double v) { return static_cast<int>(std::lround((v + m) * 255.0)); };
  return "rgb(" + std::to_string(to255(r)) + "," + std::to_string(to255(g)) + "," +
         std::to_string(to255(b)) + ")";
}

inline std::string escape(const std::string& s) {
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

// Confusion heatmap grid, darker cells for higher confusion values.
inline std::string heatmap_svg(const std::vector<std::string>& intents,
                               const std::vector<std::vector<double>>& matrix) {
  const std::size_t k = intents.size();
  const double cell = 22.0;
  const double label_w = 150.0, label_h = 110.0;
  const double width = label_w + cell * static_cast<double>(k) + 10.0;
  const double height = label_h + cell * static_cast<double>(k) + 10.0;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(width) +
                    "\" height=\"" + fmt_double(height) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double v = matrix[a][b];
      const int shade = static_cast<int>(std::lround(255.0 - v * 205.0));
      const double x = label_w + cell * static_cast<double>(b);
      const double y = label_h + cell * static_cast<double>(a);
      out += "<rect x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) + "\" width=\"" +
             fmt_double(cell - 1.0) + "\" height=\"" + fmt_double(cell - 1.0) + "\" fill=\"rgb(" +
             std::to_string(shade) + "," + std::to_string(shade) + ",255)\"><title>" +
             escape(intents[a]) + " vs " + escape(intents[b]) + ": " + fmt_double(v) +
             "</title></rect>\n";
    }
    out += "<text x=\"" + fmt_double(label_w - 5.0) + "\" y=\"" +
           fmt_double(label_h + cell * static_cast<double>(a) + cell * 0.7) +
           "\" text-anchor=\"end\">" + escape(intents[a]) + "</text>\n";
  }
  for (std::size_t b = 0; b < k; ++b) {
    const double x = label_w + cell * static_cast<double>(b) + cell * 0.7;
    out += "<text x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(label_h - 5.0) +
           "\" text-anchor=\"start\" transform=\"rotate(-60 " + fmt_double(x) + " " +
           fmt_double(label_h - 5.0) + ")\">" + escape(intents[b]) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t intent_index = 0;
  bool correct = true;
  std::string tooltip;
};

// 2-D semantic scatter: one color per intent, misclassified points outlined.
inline std::string scatter_svg(const std::vector<ScatterPoint>& points,
                               const std::vector<std::string>& intents) {
  const double size = 560.0, margin = 20.0;
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!points.empty()) {
    min_x = max_x = points[0].x;
    min_y = max_y = points[0].y;
    for (const auto& p : points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  const double span_x = max_x - min_x > 0 ? max_x - min_x : 1.0;
  const double span_y = max_y - min_y > 0 ? max_y - min_y : 1.0;
  const double legend_w = 170.0;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt_double(size + legend_w) + "\" height=\"" + fmt_double(size) +
                    "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt_double(size) + "\" height=\"" + fmt_double(size) +
         "\" fill=\"#fafafa\" stroke=\"#ccc\"/>\n";
  for (const auto& p : points) {
    const double px = margin + (p.x - min_x) / span_x * (size - 2 * margin);
    const double py = size - margin - (p.y - min_y) / span_y * (size - 2 * margin);
    out += "<circle cx=\"" + fmt_double(px) + "\" cy=\"" + fmt_double(py) + "\" r=\"3\" fill=\"" +
           intent_color(p.intent_index) + "\"";
    if (!p.correct) out += " stroke=\"black\" stroke-width=\"1.5\"";
    out += "><title>" + escape(p.tooltip) + "</title></circle>\n";
  }
  const std::size_t legend_cap = 24;
  for (std::size_t i = 0; i < intents.size() && i < legend_cap; ++i) {
    const double y = 16.0 + 14.0 * static_cast<double>(i);
    out += "<circle cx=\"" + fmt_double(size + 12.0) + "\" cy=\"" + fmt_double(y) +
           "\" r=\"4\" fill=\"" + intent_color(i) + "\"/>\n";
    out += "<text x=\"" + fmt_double(size + 22.0) + "\" y=\"" + fmt_double(y + 3.0) + "\">" +
           escape(intents[i]) + "</text>\n";
  }
  if (intents.size() > legend_cap)
    out += "<text x=\"" + fmt_double(size + 22.0) + "\" y=\"" +
           fmt_double(16.0 + 14.0 * static_cast<double>(legend_cap) + 3.0) + "\">+" +
           std::to_string(intents.size() - legend_cap) + " more</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace chatcheck::svg
