#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cpsro {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// Deterministic line chart: fixed layout, fixed palette, fixed number
// formatting, so identical inputs give identical bytes.
std::string render_line_chart(const std::vector<PlotSeries>& series, const std::string& x_label,
                              const std::string& y_label);

// Reads metrics CSVs (the psro schema), plots exploitability against
// iteration with one series per file (legend = file stem), and writes the
// chart. Raises ConfigError on schema mismatch or an empty CSV body.
void plot_metrics_csvs(const std::vector<std::filesystem::path>& csv_paths,
                       const std::filesystem::path& out_svg);

}  // namespace cpsro
