#include "bmrmm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bmrmm::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void open(std::ostringstream& out, int w, int h, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
}

}  // namespace

std::string bar_groups(const std::string& title, const std::vector<std::string>& groups,
                       const std::vector<std::vector<double>>& values) {
  std::size_t bars = 0;
  for (const auto& v : values) bars = std::max(bars, v.size());
  const int bar_w = 18, gap = 24, left = 40, top = 30, plot_h = 200;
  const int width = left + static_cast<int>(groups.size() * (bars * bar_w + gap)) + 20;
  const int height = top + plot_h + 50;
  std::ostringstream out;
  open(out, std::max(width, 200), height, title);
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 10 << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.5, 1.0}) {
    const double y = top + plot_h * (1.0 - tick);
    out << "<text x=\"" << left - 4 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed(tick, 1) << "</text>\n";
  }
  int x = left + gap / 2;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const int group_x = x;
    for (std::size_t k = 0; k < values[g].size(); ++k) {
      const double h = plot_h * std::clamp(values[g][k], 0.0, 1.0);
      out << "<rect x=\"" << x << "\" y=\"" << fixed(top + plot_h - h) << "\" width=\"" << bar_w - 2 << "\" height=\""
          << fixed(h) << "\" fill=\"#4477aa\"/>\n";
      out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + plot_h + 13 << "\" text-anchor=\"middle\">" << k + 1
          << "</text>\n";
      x += bar_w;
    }
    out << "<text x=\"" << (group_x + x) / 2 << "\" y=\"" << top + plot_h + 30 << "\" text-anchor=\"middle\">"
        << escape(groups[g]) << "</text>\n";
    x += gap;
  }
  out << "</svg>\n";
  return out.str();
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values) {
  const int cell = 40, left = 70, top = 50;
  const int width = left + cell * static_cast<int>(col_labels.size()) + 20;
  const int height = top + cell * static_cast<int>(row_labels.size()) + 20;
  std::ostringstream out;
  open(out, std::max(width, 220), height, title);
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    out << "<text x=\"" << left + cell * static_cast<int>(c) + cell / 2 << "\" y=\"" << top - 6
        << "\" text-anchor=\"middle\">" << escape(col_labels[c]) << "</text>\n";
  }
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    const int y = top + cell * static_cast<int>(r);
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"end\">" << escape(row_labels[r])
        << "</text>\n";
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const double v = std::clamp(values[r][c], 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      out << "<rect x=\"" << left + cell * static_cast<int>(c) << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade << ",255)\" stroke=\"white\"/>\n";
      out << "<text x=\"" << left + cell * static_cast<int>(c) + cell / 2 << "\" y=\"" << y + cell / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << (v > 0.6 ? "white" : "black") << "\">" << fixed(values[r][c])
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string line_plot(const std::string& title, const std::vector<double>& values) {
  const int left = 60, top = 30, plot_w = 500, plot_h = 200;
  std::ostringstream out;
  open(out, left + plot_w + 20, top + plot_h + 40, title);
  if (values.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  out << "<text x=\"" << left - 4 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">" << fixed(hi, 3) << "</text>\n";
  out << "<text x=\"" << left - 4 << "\" y=\"" << top + plot_h + 4 << "\" text-anchor=\"end\">" << fixed(lo, 3)
      << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"1\" points=\"";
  const double n = std::max<double>(1.0, static_cast<double>(values.size() - 1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = left + plot_w * static_cast<double>(i) / n;
    const double y = top + plot_h * (1.0 - (values[i] - lo) / (hi - lo));
    out << fixed(x) << "," << fixed(y) << " ";
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace bmrmm::svg
