#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ftform/analysis.hpp"
#include "ftform/simulator.hpp"

// Trajectory CSV, metrics JSON and the two SVG figures.

namespace ftform {

/// Header `t,agent,x,y[,z]`, one row per (sample, agent), time-major,
/// agents 1-based, values at 9 significant digits.
inline void write_csv(const Trajectory& tr, std::ostream& out) {
  out << "t,agent,x,y" << (tr.d == 3 ? ",z" : "") << '\n';
  char buf[32];
  for (std::size_t s = 0; s < tr.size(); ++s) {
    for (int i = 0; i < tr.n; ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", tr.times[s]);
      out << buf << ',' << (i + 1);
      for (int k = 0; k < tr.d; ++k) {
        std::snprintf(buf, sizeof buf, "%.9g", tr.positions[s][i * tr.d + k]);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

inline void write_csv(const Trajectory& tr, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(tr, out);
}

/// Positions-only view of a trajectory CSV.
struct CsvTrajectory {
  int n = 0;
  int d = 2;
  std::vector<double> times;
  std::vector<Stacked> positions;
};

inline CsvTrajectory read_csv(std::istream& in) {
  CsvTrajectory out;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == "t,agent,x,y")
    out.d = 2;
  else if (line == "t,agent,x,y,z")
    out.d = 3;
  else
    throw std::runtime_error("csv: unexpected header '" + line + "'");

  std::vector<std::vector<double>> rows;  // per sample, agent-major coordinates
  int lineno = 1;
  int max_agent = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cols.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(cols.size()) != 2 + out.d)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " + std::to_string(2 + out.d) + " columns");
    const int agent = static_cast<int>(cols[1]);
    if (agent < 1 || agent != cols[1]) throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad agent id");
    if (out.times.empty() || cols[0] != out.times.back()) {
      out.times.push_back(cols[0]);
      rows.emplace_back();
    }
    auto& row = rows.back();
    if (static_cast<int>(row.size()) != (agent - 1) * out.d)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": agents must appear in order 1..n per time");
    row.insert(row.end(), cols.begin() + 2, cols.end());
    max_agent = std::max(max_agent, agent);
  }
  out.n = max_agent;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != out.n * out.d) throw std::runtime_error("csv: every time must list all agents");
    out.positions.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
  }
  return out;
}

inline CsvTrajectory read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_csv(in);
}

/// Rebuilds a plottable trajectory from CSV data. With a configuration the
/// distance errors are recomputed; without one only positions are available.
inline Trajectory trajectory_from_csv(const CsvTrajectory& csv, const SimConfig* cfg = nullptr) {
  Trajectory tr;
  if (cfg) {
    if (cfg->graph.n != csv.n || cfg->graph.d != csv.d)
      throw ValidationError("csv has " + std::to_string(csv.n) + " agents in R^" + std::to_string(csv.d) +
                            ", scenario expects " + std::to_string(cfg->graph.n) + " in R^" + std::to_string(cfg->graph.d));
    tr = make_trajectory_shell(*cfg);
  } else {
    tr.n = csv.n;
    tr.d = csv.d;
  }
  tr.times = csv.times;
  tr.positions = csv.positions;
  for (const auto& p : csv.positions) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(tr.constraints.size()));
    for (std::size_t c = 0; c < tr.constraints.size(); ++c) {
      const auto& k = tr.constraints[c];
      e[static_cast<Eigen::Index>(c)] =
          (block(p, k.a, tr.d) - block(p, k.b, tr.d)).squaredNorm() - tr.desired[c] * tr.desired[c];
    }
    tr.errors.push_back(std::move(e));
  }
  return tr;
}

inline nlohmann::json metrics_json(const ConvergenceReport& rep, const Trajectory& tr) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json followers = json::array();
  for (const auto& f : rep.followers) {
    followers.push_back({{"id", f.id + 1},
                         {"V0", f.V0},
                         {"tau", opt(f.tau)},
                         {"max_residual_after", f.max_residual_after},
                         {"max_velocity_mismatch_after", f.max_velocity_mismatch_after},
                         {"monotonicity_violations", f.monotonicity_violations},
                         {"vdot_violations", f.vdot_violations},
                         {"max_control", f.max_control},
                         {"control_ceiling", f.control_ceiling}});
  }
  json final_errors = json::array();
  if (tr.size()) {
    for (std::size_t c = 0; c < tr.constraints.size(); ++c)
      final_errors.push_back({{"i", tr.constraints[c].a + 1}, {"j", tr.constraints[c].b + 1}, {"e", tr.errors.back()[static_cast<Eigen::Index>(c)]}});
  }
  return json{{"delta", rep.delta},
              {"window", rep.window},
              {"exact_signum", rep.exact_signum},
              {"all_converged", rep.all_converged()},
              {"formation_time", opt(rep.formation_time())},
              {"samples", tr.size()},
              {"t_end", tr.size() ? tr.times.back() : 0.0},
              {"followers", followers},
              {"final_errors", final_errors}};
}

inline void export_metrics(const ConvergenceReport& rep, const Trajectory& tr, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << metrics_json(rep, tr).dump(2) << '\n';
}

namespace detail {

inline const char* palette(int i) {
  static constexpr std::array<const char*, 10> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[static_cast<std::size_t>(i) % colors.size()];
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// One plot panel; maps data coordinates into a pixel box.
struct Panel {
  double x0, y0, w, h;  // pixel box
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  void fit(double lo_x, double hi_x, double lo_y, double hi_y) {
    if (!(hi_x > lo_x)) {
      lo_x -= 0.5;
      hi_x += 0.5;
    }
    if (!(hi_y > lo_y)) {
      lo_y -= 0.5;
      hi_y += 0.5;
    }
    const double px = 0.05 * (hi_x - lo_x), py = 0.05 * (hi_y - lo_y);
    xmin = lo_x - px;
    xmax = hi_x + px;
    ymin = lo_y - py;
    ymax = hi_y + py;
  }
  double sx(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double sy(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }

  std::string frame(const std::string& title, const std::string& xl, const std::string& yl) const {
    std::ostringstream o;
    o << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(y0 - 8) << "\" text-anchor=\"middle\">" << title << "</text>\n";
    o << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(y0 + h + 32) << "\" text-anchor=\"middle\">" << xl << "</text>\n";
    o << "<text x=\"" << fmt(x0 - 40) << "\" y=\"" << fmt(y0 + h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << fmt(x0 - 40) << ' ' << fmt(y0 + h / 2) << ")\">" << yl << "</text>\n";
    for (double f : {0.0, 0.5, 1.0}) {
      const double xv = xmin + f * (xmax - xmin), yv = ymin + f * (ymax - ymin);
      o << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(y0 + h + 14) << "\" text-anchor=\"middle\" font-size=\"10\">"
        << tick(xv) << "</text>\n";
      o << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(sy(yv) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
        << tick(yv) << "</text>\n";
    }
    return o.str();
  }

  std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color) const {
    if (pts.empty()) return {};
    std::ostringstream o;
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& [x, y] : pts) o << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
    o << "\"/>\n";
    return o.str();
  }
};

inline std::string svg_open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) +
         "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + ' ' + fmt(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

/// Thin a series to at most `cap` points, always keeping the last one.
inline std::vector<std::size_t> thin(std::size_t n, std::size_t cap = 2000) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  for (std::size_t s = 0; s < n; s += stride) idx.push_back(s);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace detail

/// Agent paths. d = 3 gives the xy, xz and yz projections side by side.
/// Final positions are marked, with the augmented-graph edges drawn between them
/// when `constraints` is non-empty.
inline std::string trajectories_svg(int n, int d, const std::vector<double>& times, const std::vector<Stacked>& positions,
                                    const std::vector<Constraint>& constraints = {}) {
  using detail::fmt;
  const std::vector<std::array<int, 2>> axes =
      d == 3 ? std::vector<std::array<int, 2>>{{0, 1}, {0, 2}, {1, 2}} : std::vector<std::array<int, 2>>{{0, 1}};
  const char* names = "xyz";
  const double pw = 360, ph = 360, margin = 60;
  std::string svg = detail::svg_open(margin + axes.size() * (pw + margin), ph + 2 * margin);
  const auto idx = detail::thin(times.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const auto [ax, ay] = axes[a];
    detail::Panel panel{margin + a * (pw + margin), margin, pw, ph};
    double lx = std::numeric_limits<double>::infinity(), hx = -lx, ly = lx, hy = -lx;
    for (const auto& p : positions)
      for (int i = 0; i < n; ++i) {
        lx = std::min(lx, p[i * d + ax]);
        hx = std::max(hx, p[i * d + ax]);
        ly = std::min(ly, p[i * d + ay]);
        hy = std::max(hy, p[i * d + ay]);
      }
    if (positions.empty()) lx = hx = ly = hy = 0.0;
    panel.fit(lx, hx, ly, hy);
    svg += panel.frame(d == 3 ? std::string(1, names[ax]) + std::string(1, names[ay]) + " projection" : "trajectories",
                       std::string(1, names[ax]), std::string(1, names[ay]));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t s : idx) pts.emplace_back(positions[s][i * d + ax], positions[s][i * d + ay]);
      svg += panel.polyline(pts, detail::palette(i));
    }
    if (!positions.empty()) {
      const auto& last = positions.back();
      for (const auto& c : constraints)
        svg += "<line x1=\"" + fmt(panel.sx(last[c.a * d + ax])) + "\" y1=\"" + fmt(panel.sy(last[c.a * d + ay])) +
               "\" x2=\"" + fmt(panel.sx(last[c.b * d + ax])) + "\" y2=\"" + fmt(panel.sy(last[c.b * d + ay])) +
               "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
      for (int i = 0; i < n; ++i) {
        const double cx = panel.sx(last[i * d + ax]), cy = panel.sy(last[i * d + ay]);
        svg += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"4\" fill=\"" + detail::palette(i) + "\"/>\n";
        svg += "<text x=\"" + fmt(cx + 6) + "\" y=\"" + fmt(cy - 6) + "\" font-size=\"10\">" + std::to_string(i + 1) + "</text>\n";
      }
    }
  }
  return svg + "</svg>\n";
}

/// Squared-distance errors |e_ij(t)| over time, one line per constraint.
inline std::string errors_svg(const Trajectory& tr) {
  const double pw = 640, ph = 360, margin = 60;
  std::string svg = detail::svg_open(pw + 2 * margin + 120, ph + 2 * margin);
  detail::Panel panel{margin, margin, pw, ph};
  double hi = 0.0;
  for (const auto& e : tr.errors) hi = std::max(hi, e.cwiseAbs().maxCoeff());
  panel.fit(tr.size() ? tr.times.front() : 0.0, tr.size() ? tr.times.back() : 1.0, 0.0, hi);
  svg += panel.frame("distance errors", "t", "|e_ij|");
  const auto idx = detail::thin(tr.size());
  for (std::size_t c = 0; c < tr.constraints.size(); ++c) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t s : idx) pts.emplace_back(tr.times[s], std::abs(tr.errors[s][static_cast<Eigen::Index>(c)]));
    const int ci = static_cast<int>(c);
    svg += panel.polyline(pts, detail::palette(ci));
    svg += "<text x=\"" + detail::fmt(margin + pw + 12) + "\" y=\"" + detail::fmt(margin + 12 + 14 * ci) + "\" fill=\"" +
           detail::palette(ci) + "\" font-size=\"10\">e" + std::to_string(tr.constraints[c].a + 1) + "," +
           std::to_string(tr.constraints[c].b + 1) + "</text>\n";
  }
  return svg + "</svg>\n";
}

/// Writes <prefix>_trajectories.svg and <prefix>_errors.svg.
inline std::vector<std::filesystem::path> emit_plots(const Trajectory& tr, const std::filesystem::path& prefix) {
  const std::filesystem::path traj = prefix.string() + "_trajectories.svg";
  const std::filesystem::path err = prefix.string() + "_errors.svg";
  for (const auto& [path, body] : {std::pair{traj, trajectories_svg(tr.n, tr.d, tr.times, tr.positions, tr.constraints)},
                                   std::pair{err, errors_svg(tr)}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
  }
  return {traj, err};
}

}  // namespace ftform
