#include "apneakit/cli/plots.hpp"

#include <algorithm>
#include <sstream>

#include "apneakit/text.hpp"

namespace apneakit::cli {

namespace {

const char* kSeriesColors[] = {"#1f66ad", "#d1495b", "#3a9960", "#8d6cab"};

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::string svg_line_chart(const std::string& title,
                           const std::vector<PlotSeries>& series,
                           const std::string& x_label,
                           const std::string& y_label) {
  constexpr int kWidth = 720, kHeight = 420;
  constexpr int kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;

  size_t n = 0;
  double y_min = 0.0, y_max = 1.0;
  bool any = false;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (!any) {
        y_min = y_max = v;
        any = true;
      }
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!any) y_min = 0.0, y_max = 1.0;
  y_min = std::min(y_min, 0.0);
  if (y_max - y_min < 1e-9) y_max = y_min + 1.0;

  const auto x_of = [&](size_t i) {
    return n > 1 ? kLeft + double(i) * plot_w / double(n - 1)
                 : kLeft + plot_w / 2.0;
  };
  const auto y_of = [&](double v) {
    return kTop + (y_max - v) / (y_max - y_min) * plot_h;
  };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "  <text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";

  // axes
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_min + (y_max - y_min) * tick / 4.0;
    const double y = y_of(v);
    out << "  <line x1=\"" << kLeft - 4 << "\" y1=\"" << fmt_fixed(y, 1)
        << "\" x2=\"" << kLeft << "\" y2=\"" << fmt_fixed(y, 1)
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << fmt_fixed(y + 4, 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_fixed(v, 1) << "</text>\n";
  }
  out << "  <text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << xml_escape(x_label) << "</text>\n";
  out << "  <text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const auto& values = series[s].values;
    if (values.empty()) continue;
    out << "  <polyline fill=\"none\" stroke=\""
        << kSeriesColors[s % 4] << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out << ' ';
      out << fmt_fixed(x_of(i), 2) << ',' << fmt_fixed(y_of(values[i]), 2);
    }
    out << "\"/>\n";
    const int ly = kTop + 6 + int(s) * 16;
    out << "  <rect x=\"" << kLeft + plot_w - 150 << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << kSeriesColors[s % 4]
        << "\"/>\n";
    out << "  <text x=\"" << kLeft + plot_w - 134 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace apneakit::cli
