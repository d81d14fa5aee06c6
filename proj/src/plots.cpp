#include "swimtrack/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "swimtrack/trial.hpp"

namespace swimtrack::harness {

namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 520;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  if (series.empty() || !std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
    throw std::runtime_error("write_line_plot: no data for " + path);
  }
  xr.pad();
  yr.pad();

  const double pw = kWidth - kMarginLeft - kMarginRight;
  const double ph = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' font-family='sans-serif'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='28' text-anchor='middle' font-size='17'>" << esc(title)
      << "</text>\n";

  // grid + ticks
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    out << "<line x1='" << px(fx) << "' y1='" << kMarginTop << "' x2='" << px(fx) << "' y2='"
        << kMarginTop + ph << "' stroke='#e0e0e0'/>\n";
    out << "<line x1='" << kMarginLeft << "' y1='" << py(fy) << "' x2='" << kMarginLeft + pw
        << "' y2='" << py(fy) << "' stroke='#e0e0e0'/>\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", fx);
    out << "<text x='" << px(fx) << "' y='" << kMarginTop + ph + 18
        << "' text-anchor='middle' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", fy);
    out << "<text x='" << kMarginLeft - 8 << "' y='" << py(fy) + 4
        << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
  }
  out << "<rect x='" << kMarginLeft << "' y='" << kMarginTop << "' width='" << pw << "' height='"
      << ph << "' fill='none' stroke='black'/>\n";
  out << "<text x='" << kMarginLeft + pw / 2 << "' y='" << kHeight - 12
      << "' text-anchor='middle' font-size='13'>" << esc(x_label) << "</text>\n";
  out << "<text x='18' y='" << kMarginTop + ph / 2 << "' text-anchor='middle' font-size='13' "
      << "transform='rotate(-90 18 " << kMarginTop + ph / 2 << ")'>" << esc(y_label)
      << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % 6];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
    }
    out << "'/>\n";
    const double ly = kMarginTop + 16 + 18 * double(i);
    out << "<line x1='" << kMarginLeft + pw + 10 << "' y1='" << ly << "' x2='"
        << kMarginLeft + pw + 34 << "' y2='" << ly << "' stroke='" << color
        << "' stroke-width='2'/>\n";
    out << "<text x='" << kMarginLeft + pw + 40 << "' y='" << ly + 4 << "' font-size='12'>"
        << esc(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_trajectory_plot(const std::string& path, const std::string& trajectory_csv) {
  std::ifstream in(trajectory_csv);
  if (!in) throw std::runtime_error("cannot read trajectory log: " + trajectory_csv);
  std::string line;
  std::getline(in, line);  // header
  PlotSeries robot{"robot", {}, {}};
  PlotSeries target{"target", {}, {}};
  // Axonometric projection: u = x - 0.5 y, v = z + 0.25 y.
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
    if (v.size() != 7) continue;
    robot.x.push_back(v[1] - 0.5 * v[2]);
    robot.y.push_back(v[3] + 0.25 * v[2]);
    target.x.push_back(v[4] - 0.5 * v[5]);
    target.y.push_back(v[6] + 0.25 * v[5]);
  }
  write_line_plot(path, "3D trajectory (axonometric)", "x - y/2", "z + y/4", {robot, target});
}

std::vector<std::string> emit_plots(const std::string& results_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;

  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string stem = entry.path().stem().string();
    if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;

    const std::string svg = (fs::path(results_dir) / (stem + ".svg")).string();
    if (name.find("trajectory") != std::string::npos) {
      write_trajectory_plot(svg, entry.path().string());
      written.push_back(svg);
    } else if (name.find("steps") != std::string::npos) {
      const auto rows = read_step_log(entry.path().string());
      PlotSeries sx{"x_c", {}, {}}, sy{"y_c", {}, {}};
      for (const auto& r : rows) {
        sx.x.push_back(double(r.step));
        sx.y.push_back(r.x_c);
        sy.x.push_back(double(r.step));
        sy.y.push_back(r.y_c);
      }
      write_line_plot(svg, "Tracking error vs time: " + stem, "step", "normalized offset",
                      {sx, sy});
      written.push_back(svg);
    } else if (name.find("reward_vs_trial") != std::string::npos) {
      // generic numeric CSV: first column x, remaining columns series
      std::ifstream in(entry.path());
      std::string header;
      if (!std::getline(in, header)) continue;
      std::vector<std::string> cols;
      {
        std::stringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
      }
      if (cols.size() < 2) continue;
      std::vector<PlotSeries> series(cols.size() - 1);
      for (std::size_t i = 1; i < cols.size(); ++i) series[i - 1].label = cols[i];
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<double> v;
        while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
        if (v.size() != cols.size()) continue;
        for (std::size_t i = 1; i < v.size(); ++i) {
          series[i - 1].x.push_back(v[0]);
          series[i - 1].y.push_back(v[i]);
        }
      }
      write_line_plot(svg, "Mean immediate reward per sequential trial: " + stem, "trial",
                      "mean immediate reward", series);
      written.push_back(svg);
    }
  }
  return written;
}

}  // namespace swimtrack::harness
