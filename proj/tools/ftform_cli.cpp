// ftform: command-line front end for scenario runs.
//
//   ftform simulate <scenario> [--out DIR] [--seed N]
//   ftform check <scenario>
//   ftform theta --a A --b B --c C
//   ftform sweep <scenario> --param k=0.5:2:0.5 [--param ...] [--out DIR] [--jobs N]
//   ftform plot <csv> [--out DIR] [--scenario S]
//
// <scenario> is a JSON file or one of the bundled names sim1, sim2a, sim2b.
// Output defaults to $FTFORM_OUT_DIR, then ./out.
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "ftform/ftform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FTFORM_OUT_DIR"); env && *env) return env;
  return "out";
}

void print_warnings(const ftform::ValidationReport& rep) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
}

std::string stem_of(const std::string& scenario) {
  if (ftform::bundled_scenario(scenario)) return scenario;
  return fs::path(scenario).stem().string();
}

void print_summary(const ftform::ConvergenceReport& rep) {
  std::printf("%-8s %-12s %-12s %-14s %-14s\n", "agent", "V(0)", "tau", "max|e| after", "max|v-f| after");
  for (const auto& f : rep.followers) {
    const std::string tau = f.tau ? std::to_string(*f.tau) : "-";
    std::printf("%-8d %-12.6g %-12s %-14.6g %-14.6g\n", f.id + 1, f.V0, tau.c_str(), f.max_residual_after,
                f.max_velocity_mismatch_after);
  }
  if (const auto t = rep.formation_time())
    std::printf("formation reached at t = %.6g (delta = %g)\n", *t, rep.delta);
  else
    std::printf("formation not reached within delta = %g\n", rep.delta);
}

int cmd_simulate(const std::string& scenario, const std::string& out_flag, const std::optional<std::uint64_t>& seed) {
  auto doc = ftform::read_scenario_document(scenario);
  if (seed) doc["sim"]["seed"] = *seed;
  ftform::ValidationReport vrep;
  const auto sc = ftform::load_parsed_scenario(doc, &vrep);
  print_warnings(vrep);
  const auto tr = ftform::simulate(sc.config);
  const auto rep = ftform::analyze(tr, sc.config, sc.analysis);

  const fs::path dir = output_dir(out_flag);
  fs::create_directories(dir);
  const std::string stem = stem_of(scenario);
  ftform::write_csv(tr, dir / (stem + ".csv"));
  ftform::export_metrics(rep, tr, dir / (stem + "_metrics.json"));
  ftform::emit_plots(tr, dir / stem);
  ftform::save_scenario(sc, dir / (stem + "_scenario.json"));
  print_summary(rep);
  std::printf("wrote %s/%s{.csv,_metrics.json,_trajectories.svg,_errors.svg,_scenario.json}\n", dir.string().c_str(),
              stem.c_str());
  return kOk;
}

int cmd_check(const std::string& scenario) {
  ftform::ValidationReport vrep;
  const auto sc = ftform::load_scenario(scenario, &vrep);
  print_warnings(vrep);
  std::printf("%s: ok (n=%d, d=%d, law=%s)\n", sc.config.name.c_str(), sc.config.graph.n, sc.config.graph.d,
              std::string(ftform::to_string(sc.config.law)).c_str());
  for (const auto& b : vrep.basin)
    std::printf("  agent %d: V(0)=%.6g theta=%.6g %s\n", b.follower + 1, b.V0, b.theta, b.inside ? "inside" : "outside");
  return kOk;
}

int cmd_theta(double a, double b, double c) {
  const auto res = ftform::vartheta_2d(a, b, c);
  std::printf("theta = %.12g\n", res.theta);
  for (std::size_t k = 0; k < res.roots.size(); ++k)
    std::printf("root x = %.12g  V = %.12g%s\n", res.roots[k], res.values[k], res.desired[k] ? "  (desired)" : "");
  return kOk;
}

struct SweepParam {
  std::string key;
  std::vector<double> values;
};

SweepParam parse_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ftform::ValidationError("--param: expected key=start:stop:step or key=v1,v2,...");
  SweepParam p{text.substr(0, eq), {}};
  const std::string rhs = text.substr(eq + 1);
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ftform::ValidationError("--param " + p.key + ": bad number '" + s + "'");
    }
  };
  if (rhs.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(rhs);
    for (std::string s; std::getline(ss, s, ':');) parts.push_back(s);
    if (parts.size() != 3) throw ftform::ValidationError("--param " + p.key + ": range needs start:stop:step");
    const double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ftform::ValidationError("--param " + p.key + ": need step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) p.values.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(rhs);
    for (std::string s; std::getline(ss, s, ',');) p.values.push_back(num(s));
  }
  if (p.values.empty()) throw ftform::ValidationError("--param " + p.key + ": no values");
  return p;
}

/// Scenario field that a sweep key edits.
json::json_pointer param_pointer(const std::string& key) {
  static const std::map<std::string, std::string> known{
      {"k", "/control/k"},     {"k_prime", "/control/k_prime"}, {"alpha", "/control/alpha"},
      {"gamma", "/control/gamma"}, {"eps", "/control/eps"},     {"dt", "/sim/dt"},
      {"t_end", "/sim/t_end"}, {"seed", "/sim/seed"},           {"radius", "/followers/initial/radius"}};
  const auto it = known.find(key);
  if (it == known.end())
    throw ftform::ValidationError("--param: unknown key '" + key + "' (k, k_prime, alpha, gamma, eps, dt, t_end, seed, radius)");
  return json::json_pointer(it->second);
}

int cmd_sweep(const std::string& scenario, const std::vector<std::string>& param_text, const std::string& out_flag,
              unsigned jobs) {
  const auto base = ftform::read_scenario_document(scenario);
  std::vector<SweepParam> params;
  for (const auto& t : param_text) params.push_back(parse_param(t));

  // Cartesian grid, last parameter fastest.
  std::vector<json> docs;
  std::vector<json> settings;
  std::vector<std::size_t> idx(params.size(), 0);
  for (;;) {
    json doc = base;
    json set = json::object();
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double v = params[p].values[idx[p]];
      if (params[p].key == "seed")
        doc[param_pointer(params[p].key)] = static_cast<std::uint64_t>(std::llround(v));
      else
        doc[param_pointer(params[p].key)] = v;
      set[params[p].key] = v;
    }
    docs.push_back(std::move(doc));
    settings.push_back(std::move(set));
    std::size_t p = params.size();
    while (p > 0 && ++idx[p - 1] == params[p - 1].values.size()) idx[--p] = 0;
    if (p == 0) break;
  }
  // Validate everything before spending time on simulation.
  std::vector<ftform::Scenario> scenarios;
  for (const auto& doc : docs) scenarios.push_back(ftform::load_parsed_scenario(doc));

  const fs::path dir = output_dir(out_flag);
  fs::create_directories(dir);
  std::vector<json> results(docs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t r = next++; r < docs.size(); r = next++) {
      json entry{{"run", r}, {"params", settings[r]}};
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", r);
      const fs::path run_dir = dir / name;
      try {
        const auto tr = ftform::simulate(scenarios[r].config);
        const auto rep = ftform::analyze(tr, scenarios[r].config, scenarios[r].analysis);
        fs::create_directories(run_dir);
        ftform::export_metrics(rep, tr, run_dir / "metrics.json");
        ftform::save_scenario(scenarios[r], run_dir / "scenario.json");
        entry["status"] = "ok";
        entry["formation_time"] = rep.formation_time() ? json(*rep.formation_time()) : json(nullptr);
        double resid = 0.0;
        for (const auto& f : rep.followers) resid = std::max(resid, f.max_residual_after);
        entry["max_residual_after"] = resid;
      } catch (const std::exception& e) {
        entry["status"] = "failed";
        entry["error"] = e.what();
      }
      std::lock_guard lock(io);
      std::printf("%s %s %s\n", name, settings[r].dump().c_str(), entry["status"].get<std::string>().c_str());
      std::fflush(stdout);
      results[r] = std::move(entry);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(docs.size())));
  std::vector<std::jthread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  pool.clear();

  json summary{{"scenario", scenario}, {"runs", results}};
  std::ofstream(dir / "sweep.json") << summary.dump(2) << '\n';
  const bool all_ok = std::all_of(results.begin(), results.end(), [](const json& j) { return j["status"] == "ok"; });
  std::printf("%zu runs, summary in %s\n", results.size(), (dir / "sweep.json").string().c_str());
  return all_ok ? kOk : kRuntime;
}

int cmd_plot(const std::string& csv_path, const std::string& out_flag, const std::string& scenario) {
  const auto csv = ftform::read_csv(fs::path(csv_path));
  std::optional<ftform::Scenario> sc;
  if (!scenario.empty()) sc = ftform::load_scenario(scenario);
  const auto tr = ftform::trajectory_from_csv(csv, sc ? &sc->config : nullptr);
  const fs::path dir = output_dir(out_flag);
  fs::create_directories(dir);
  for (const auto& p : ftform::emit_plots(tr, dir / fs::path(csv_path).stem())) std::printf("wrote %s\n", p.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based leader-follower formation simulator"};
  app.require_subcommand(1);

  std::string scenario, out, csv, plot_scenario;
  std::optional<std::uint64_t> seed;
  double a = 0, b = 0, c = 0;
  std::vector<std::string> params;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* sim = app.add_subcommand("simulate", "run a scenario and write CSV, metrics and plots");
  sim->add_option("scenario", scenario, "scenario file or bundled name")->required();
  sim->add_option("--out", out, "output directory");
  sim->add_option("--seed", seed, "override sim.seed");

  auto* check = app.add_subcommand("check", "validate a scenario");
  check->add_option("scenario", scenario, "scenario file or bundled name")->required();

  auto* theta = app.add_subcommand("theta", "planar basin threshold for neighbours at (-a,0), (a,0)");
  theta->add_option("--a", a, "half the neighbour separation")->required();
  theta->add_option("--b", b, "desired distance to the first neighbour")->required();
  theta->add_option("--c", c, "desired distance to the second neighbour")->required();

  auto* sweep = app.add_subcommand("sweep", "grid of runs over scenario parameters");
  sweep->add_option("scenario", scenario, "scenario file or bundled name")->required();
  sweep->add_option("--param", params, "key=start:stop:step or key=v1,v2,...")->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--jobs", jobs, "parallel runs");

  auto* plot = app.add_subcommand("plot", "SVG plots from a trajectory CSV");
  plot->add_option("csv", csv, "trajectory CSV written by simulate")->required();
  plot->add_option("--out", out, "output directory");
  plot->add_option("--scenario", plot_scenario, "scenario for the distance-error plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sim) return cmd_simulate(scenario, out, seed);
    if (*check) return cmd_check(scenario);
    if (*theta) return cmd_theta(a, b, c);
    if (*sweep) return cmd_sweep(scenario, params, out, jobs);
    if (*plot) return cmd_plot(csv, out, plot_scenario);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ftform::SimulationError& e) {
    std::cerr << "simulation failed after t = " << e.last_valid_time() << ": " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
