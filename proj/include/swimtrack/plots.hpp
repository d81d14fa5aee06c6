#pragma once

#include <string>
#include <vector>

namespace swimtrack::harness {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal SVG line chart; enough for reward-vs-trial and error-vs-time
// figures without an external plotting dependency.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

// Axonometric projection of robot/target world tracks from a trajectory log.
void write_trajectory_plot(const std::string& path, const std::string& trajectory_csv);

// Renders the standard figures for whatever CSVs are present in a results
// directory. Returns the files written. Plot failures raise; callers decide
// whether that is fatal (the CSVs themselves are never touched).
std::vector<std::string> emit_plots(const std::string& results_dir);

}  // namespace swimtrack::harness
