#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

// Minimal SVG line charts. Charts are a viewing convenience; the CSV/JSON
// outputs are the actual contract.
namespace svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> xs;
  std::vector<double> ys;
};

inline std::string line_chart(const std::string& title, const std::vector<Series>& series,
                              int width = 720, int height = 440) {
  const double ml = 60, mr = 20, mt = 36, mb = 44;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (first) {
        xmin = xmax = s.xs[i];
        ymin = ymax = s.ys[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.xs[i]);
        xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]);
        ymax = std::max(ymax, s.ys[i]);
      }
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return mt + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  auto tick_label = [&](double v) {
    std::ostringstream t;
    t.precision(4);
    t << v;
    return t.str();
  };
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << px(fx) << "\" y=\"" << height - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << tick_label(fx) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << tick_label(fy) << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << py(fy) << "\" x2=\"" << ml + plot_w
        << "\" y2=\"" << py(fy) << "\" stroke=\"#ddd\"/>\n";
  }

  int legend_y = static_cast<int>(mt) + 14;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      out << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<text x=\"" << ml + 8 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << s.color << "\">"
          << s.label << "</text>\n";
      legend_y += 14;
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace svg
