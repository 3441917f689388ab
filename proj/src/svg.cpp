#include "cpsro/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpsro/error.hpp"
#include "cpsro/psro.hpp"

namespace cpsro {

namespace {

constexpr int kWidth = 720, kHeight = 440;
constexpr int kMarginLeft = 70, kMarginRight = 160, kMarginTop = 30, kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const std::vector<PlotSeries>& series, const std::string& x_label,
                              const std::string& y_label) {
  if (series.empty()) throw ConfigError("render_line_chart: no series");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw ConfigError("render_line_chart: series '" + s.label + "' is empty or ragged");
    }
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double v) { return kMarginLeft + (v - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double v) { return kMarginTop + plot_h - (v - y_min) / (y_max - y_min) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  // Axes.
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  // Ticks: five per axis.
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    out << "<text x=\"" << num(sx(xv)) << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(sy(yv) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << num(sy(yv)) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << num(sy(yv))
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t p = 0; p < series[i].x.size(); ++p) {
      if (p) out << " ";
      out << num(sx(series[i].x[p])) << "," << num(sy(series[i].y[p]));
    }
    out << "\"/>\n";
    const double ly = kMarginTop + 14.0 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << kMarginLeft + plot_w + 10 << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << kMarginLeft + plot_w + 30 << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w + 36 << "\" y=\"" << num(ly)
        << "\" font-size=\"12\">" << series[i].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void plot_metrics_csvs(const std::vector<std::filesystem::path>& csv_paths,
                       const std::filesystem::path& out_svg) {
  if (csv_paths.empty()) throw ConfigError("plot: need at least one metrics CSV");
  std::vector<PlotSeries> series;
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw ConfigError("plot: cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kMetricsHeader) {
      throw ConfigError("plot: " + path.string() + " does not have the metrics columns '" +
                        kMetricsHeader + "'");
    }
    PlotSeries s;
    s.label = path.stem().string();
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 3) throw ConfigError("plot: malformed row in " + path.string());
      s.x.push_back(std::stod(cells[0]));
      s.y.push_back(std::stod(cells[2]));
    }
    if (s.x.empty()) throw ConfigError("plot: " + path.string() + " has no data rows");
    series.push_back(std::move(s));
  }
  const std::string svg = render_line_chart(series, "iteration", "exploitability");
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw ConfigError("plot: cannot write " + out_svg.string());
  out << svg;
}

}  // namespace cpsro
