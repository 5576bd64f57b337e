// Copyright 2026 The trajopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include <trajopt/arm.hpp>
#include <trajopt/io.hpp>

#include "app/commands.hpp"

namespace trajopt::app {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingArtifact("column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(cell);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

Table read_table(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact("missing artifact " + path.string());
  std::istringstream in(read_file(path));
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw MissingArtifact("empty artifact " + path.string());
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_cell(cell));
    row.resize(table.header.size(), std::numeric_limits<double>::quiet_NaN());
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct Series {
  std::string label;
  std::string colour;
  std::vector<double> y;
  bool dashed = false;
};

std::pair<double, double> finite_range(const std::vector<Series>& series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : s.y) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string line_chart(const std::string& title, const std::vector<double>& x,
                       const std::vector<Series>& series) {
  constexpr double width = 720, height = 420, left = 80, right = 150, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double x_lo = x.empty() ? 0.0 : x.front();
  double x_hi = x.empty() ? 1.0 : x.back();
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  const auto [y_lo, y_hi] = finite_range(series);
  auto px = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double v) { return top + (y_hi - v) / (y_hi - y_lo) * plot_h; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-size=\"15\">{3}</text>\n"
      "<rect x=\"{2}\" y=\"{4}\" width=\"{5}\" height=\"{6}\" fill=\"none\" stroke=\"black\"/>\n",
      width, height, left, title, top, plot_w, plot_h);
  for (int i = 0; i <= 4; ++i) {
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    svg += fmt::format(
        "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n"
        "<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n",
        left - 6, py(yv) + 4, yv, px(xv), height - bottom + 18, xv);
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">generation</text>\n",
                     left + plot_w / 2, height - 10);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& ser = series[s];
    const std::string style = fmt::format("fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}",
                                          ser.colour, ser.dashed ? " stroke-dasharray=\"4 3\"" : "");
    std::string points;
    auto flush = [&] {
      if (points.empty()) return;
      svg += fmt::format("<polyline {} points=\"{}\"/>\n", style, points);
      points.clear();
    };
    for (std::size_t i = 0; i < x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.y[i])) {
        flush();
        continue;
      }
      points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", px(x[i]), py(ser.y[i]));
      if (x.size() == 1) {
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(x[i]),
                           py(ser.y[i]), ser.colour);
      }
    }
    flush();
    const double ly = top + 16.0 * static_cast<double>(s) + 10;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" {3}/>\n"
        "<text x=\"{4}\" y=\"{5:.2f}\">{6}</text>\n",
        width - right + 10, ly, width - right + 34, style, width - right + 40, ly + 4, ser.label);
  }
  svg += "</svg>\n";
  return svg;
}

std::string heatmap(const Table& entropy) {
  const std::size_t generations = entropy.rows.size();
  const std::size_t steps = entropy.header.size() - 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : entropy.rows) {
    for (std::size_t n = 1; n < row.size(); ++n) {
      if (std::isfinite(row[n])) {
        lo = std::min(lo, row[n]);
        hi = std::max(hi, row[n]);
      }
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  constexpr double cell_w = 3.0, cell_h = 16.0, left = 40, top = 30;
  const double width = left + cell_w * static_cast<double>(std::max<std::size_t>(generations, 1)) + 20;
  const double height = top + cell_h * static_cast<double>(steps) + 30;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"18\">log det covariance per step (rows n, columns generation)</text>\n",
      width, height, left);
  for (std::size_t g = 0; g < generations; ++g) {
    for (std::size_t n = 0; n < steps; ++n) {
      const double v = entropy.rows[g][n + 1];
      const double t = std::isfinite(v) ? (v - lo) / (hi - lo) : 0.0;
      const int red = static_cast<int>(std::lround(255 * t));
      const int blue = 255 - red;
      svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{}\" height=\"{}\" fill=\"rgb({},60,{})\"/>\n",
                         left + cell_w * static_cast<double>(g), top + cell_h * static_cast<double>(n),
                         cell_w, cell_h, red, blue);
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string endeffector_svg(const ExperimentConfig& config, const Table& batch,
                            const std::optional<Table>& deterministic) {
  const ArmParams& arm = config.env.arm;
  const int links = arm.links();
  double reach = 0.0;
  for (double l : arm.link_lengths) reach += l;
  const double extent = reach + 0.5;

  std::map<int, std::vector<Eigen::Vector2d>> paths;
  const std::size_t jc = batch.column("j");
  const std::size_t q0 = batch.column("s0");
  for (const auto& row : batch.rows) {
    Vector q(links);
    for (int i = 0; i < links; ++i) q(i) = row[q0 + static_cast<std::size_t>(i)];
    if (!q.allFinite()) continue;
    paths[static_cast<int>(row[jc])].push_back(arm_kinematics(arm, q).end_effector());
  }
  auto polyline = [](const std::vector<Eigen::Vector2d>& pts, const std::string& style) {
    std::string points;
    for (const auto& p : pts) points += fmt::format("{}{:.6f},{:.6f}", points.empty() ? "" : " ", p.x(), p.y());
    return fmt::format("<polyline {} points=\"{}\"/>\n", style, points);
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
      "viewBox=\"{0:.3f} {0:.3f} {1:.3f} {1:.3f}\">\n"
      "<rect x=\"{0:.3f}\" y=\"{0:.3f}\" width=\"{1:.3f}\" height=\"{1:.3f}\" fill=\"white\"/>\n"
      "<g transform=\"scale(1,-1)\">\n"
      "<circle cx=\"0\" cy=\"0\" r=\"{2:.3f}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.01\"/>\n",
      -extent, 2 * extent, reach);
  if (arm.obstacle) {
    svg += fmt::format("<circle class=\"obstacle\" cx=\"{:.6f}\" cy=\"{:.6f}\" r=\"{:.6f}\" fill=\"#888888\"/>\n",
                       arm.obstacle->center.x(), arm.obstacle->center.y(), arm.obstacle->radius);
  }
  for (const auto& [j, pts] : paths) {
    svg += polyline(pts, "class=\"sample\" fill=\"none\" stroke=\"#1f77b4\" stroke-opacity=\"0.3\" stroke-width=\"0.015\"");
  }
  if (deterministic) {
    std::vector<Eigen::Vector2d> pts;
    const std::size_t d0 = deterministic->column("s0");
    for (const auto& row : deterministic->rows) {
      Vector q(links);
      for (int i = 0; i < links; ++i) q(i) = row[d0 + static_cast<std::size_t>(i)];
      if (q.allFinite()) pts.push_back(arm_kinematics(arm, q).end_effector());
    }
    svg += polyline(pts, "class=\"deterministic\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.04\"");
  }
  svg += fmt::format(
      "<circle class=\"goal\" cx=\"{:.6f}\" cy=\"{:.6f}\" r=\"0.08\" fill=\"#2ca02c\"/>\n"
      "<circle class=\"base\" cx=\"0\" cy=\"0\" r=\"0.06\" fill=\"black\"/>\n"
      "</g>\n</svg>\n",
      arm.costs.goal.x(), arm.costs.goal.y());
  return svg;
}

}  // namespace

void execute_plot(const fs::path& run_dir) {
  const fs::path config_path = run_dir / "config.resolved.json";
  if (!fs::exists(config_path)) throw MissingArtifact("missing artifact " + config_path.string());
  const ExperimentConfig config = load_config(config_path);
  const Table metrics = read_table(run_dir / "metrics.csv");
  const Table entropy = read_table(run_dir / "entropy.csv");

  const std::vector<double> gens = metrics.values("gen");
  write_file_atomic(run_dir / "cost_convergence.svg",
                    line_chart("Sampled trajectory cost", gens,
                               {{"min", "#555555", metrics.values("min_cost")},
                                {"mean", "#000000", metrics.values("mean_cost")},
                                {"soft mean", "#d62728", metrics.values("soft_mean"), true},
                                {"deterministic", "#2ca02c", metrics.values("det_cost")}}));
  write_file_atomic(run_dir / "entropy.svg",
                    line_chart("Policy entropy (sum of log det)", gens,
                               {{"entropy sum", "#1f77b4", metrics.values("entropy_sum")}}));

  std::string heat = "gen";
  for (std::size_t n = 1; n < entropy.header.size(); ++n) heat += fmt::format(",n{}", n - 1);
  heat += "\n";
  for (const auto& row : entropy.rows) {
    heat += fmt::format("{}", static_cast<long long>(row[0]));
    for (std::size_t n = 1; n < row.size(); ++n) heat += fmt::format(",{:.12g}", row[n]);
    heat += "\n";
  }
  write_file_atomic(run_dir / "entropy_heatmap.csv", heat);
  write_file_atomic(run_dir / "entropy_heatmap.svg", heatmap(entropy));

  if (config.env.name == "arm") {
    const Table batch = read_table(run_dir / "final_batch.csv");
    std::optional<Table> deterministic;
    if (fs::exists(run_dir / "deterministic.csv")) deterministic = read_table(run_dir / "deterministic.csv");
    write_file_atomic(run_dir / "endeffector_paths.svg", endeffector_svg(config, batch, deterministic));
  }
}

}  // namespace trajopt::app
