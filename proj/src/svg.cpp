#include "ldm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ldm/csv.hpp"

namespace ldm {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kMargin = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Frame {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void finish() {
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  }
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::ofstream open_svg(const std::string& path, const std::string& title, const Frame& f, const std::string& xlabel,
                       const std::string& ylabel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
      << "</text>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
      << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor << "\" font-size=\"11\">"
        << escape(text) << "</text>\n";
  };
  label(kMargin, kHeight - kMargin + 16, format_double(f.x0), "middle");
  label(kWidth - kMargin, kHeight - kMargin + 16, format_double(f.x1), "middle");
  label(kMargin - 4, kHeight - kMargin, format_double(f.y0), "end");
  label(kMargin - 4, kMargin + 4, format_double(f.y1), "end");
  label(kWidth / 2, kHeight - 16, xlabel, "middle");
  out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\">" << escape(ylabel) << "</text>\n";
  return out;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series) {
  Frame f;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) f.add(s.x[i], s.y[i]);
  }
  f.finish();
  auto out = open_svg(path, title, f, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << format_double(f.px(s.x[i])) << ',' << format_double(f.py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 16 + 14 * k
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_scatter(const std::string& path, const std::string& title, const std::vector<std::array<double, 2>>& points,
                   const std::vector<std::array<double, 2>>& marks) {
  Frame f;
  for (const auto& p : points) f.add(p[0], p[1]);
  for (const auto& p : marks) f.add(p[0], p[1]);
  f.finish();
  auto out = open_svg(path, title, f, "x0", "x1");
  for (const auto& p : points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
    out << "<circle cx=\"" << format_double(f.px(p[0])) << "\" cy=\"" << format_double(f.py(p[1]))
        << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n";
  }
  for (const auto& p : marks) {
    out << "<circle cx=\"" << format_double(f.px(p[0])) << "\" cy=\"" << format_double(f.py(p[1]))
        << "\" r=\"5\" fill=\"#d62728\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace ldm
