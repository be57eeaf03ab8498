#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftform/export.hpp"
#include "ftform/scenario.hpp"

using namespace ftform;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ftform_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json sim1_doc() { return parse_scenario_document(*bundled_scenario("sim1")); }

template <class F>
std::string validation_message(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(rc);
#else
  return rc;
#endif
}

}  // namespace

TEST(Scenario, Sim1Loads) {
  const auto sc = load_scenario("sim1");
  EXPECT_EQ(sc.config.graph.n, 9);
  EXPECT_EQ(sc.config.graph.d, 2);
  EXPECT_EQ(sc.config.control.alpha, 0.5);
  EXPECT_EQ(sc.config.control.gamma, 2.0);
  EXPECT_EQ(sc.config.control.k, 1.0);
  EXPECT_EQ(sc.config.law, ControlLaw::basic);
  EXPECT_EQ(sc.analysis.delta, 1e-2);
}

TEST(Scenario, BundledMatchesFiles) {
  for (const char* name : {"sim1", "sim2a", "sim2b"}) {
    const auto file = fs::path(FTFORM_SCENARIO_DIR) / (std::string(name) + ".json");
    EXPECT_EQ(parse_scenario_document(slurp(file)), parse_scenario_document(*bundled_scenario(name))) << name;
  }
  EXPECT_FALSE(bundled_scenario("sim3"));
  EXPECT_THROW(load_scenario("sim3"), ValidationError);
}

TEST(Scenario, LeaderSpacingNamesAssumption) {
  auto doc = sim1_doc();
  doc["leaders"]["positions"][1] = {3.0, 0.0};
  try {
    load_parsed_scenario(doc);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.assumption(), 3);
  }
}

TEST(Scenario, FieldErrors) {
  auto doc = sim1_doc();
  doc["graph"]["n"] = 1;
  EXPECT_NE(validation_message([&] { parse_scenario(doc); }).find("graph.n"), std::string::npos);

  doc = sim1_doc();
  doc["followers"]["initial"]["radius"] = "big";
  EXPECT_NE(validation_message([&] { parse_scenario(doc); }).find("followers.initial.radius"), std::string::npos);

  doc = sim1_doc();
  doc.erase("control");
  EXPECT_NE(validation_message([&] { parse_scenario(doc); }).find("control"), std::string::npos);

  doc = sim1_doc();
  doc["control"]["law"] = "pid";
  EXPECT_THROW(parse_scenario(doc), ValidationError);

  EXPECT_THROW(parse_scenario(nlohmann::json::array()), ValidationError);
}

TEST(Scenario, ParseErrorReportsLine) {
  const std::string text = "{\n  \"graph\": {\"n\": 3,\n  \"d\" 2}\n}\n";
  EXPECT_NE(validation_message([&] { parse_scenario_text(text); }).find("line 3"), std::string::npos);
}

TEST(Scenario, SaveReloadRoundTrip) {
  const auto dir = scratch("roundtrip");
  for (const char* name : {"sim1", "sim2b"}) {
    const auto sc = load_scenario(name);
    const auto path = dir / (std::string(name) + ".json");
    save_scenario(sc, path);
    const auto back = load_scenario(path.string());
    EXPECT_EQ(to_json(back), to_json(sc)) << name;
    EXPECT_EQ(back.config.initial_positions(), sc.config.initial_positions());
    for (std::size_t i = 0; i < sc.config.initial_states.size(); ++i)
      EXPECT_EQ(back.config.initial_states[i].frame.matrix(), sc.config.initial_states[i].frame.matrix());
  }
}

TEST(Scenario, SeedChangesRandomFields) {
  auto doc = sim1_doc();
  const auto a = parse_scenario(doc);
  doc["sim"]["seed"] = 2;
  const auto b = parse_scenario(doc);
  EXPECT_NE(a.config.initial_positions(), b.config.initial_positions());
  // leaders are given explicitly
  EXPECT_EQ(a.config.initial_positions().head(4), b.config.initial_positions().head(4));
}

TEST(Csv, OneAgentTwoSamples) {
  Trajectory tr;
  tr.n = 1;
  tr.d = 2;
  tr.times = {0.0, 0.5};
  Stacked p(2);
  p << 1.0, -2.0;
  tr.positions = {p, p};
  std::ostringstream out;
  write_csv(tr, out);
  EXPECT_EQ(out.str(), "t,agent,x,y\n0,1,1,-2\n0.5,1,1,-2\n");
}

TEST(Csv, RoundTrip) {
  const auto sc = load_scenario("sim1");
  const auto tr = simulate(sc.config);
  std::stringstream buf;
  write_csv(tr, buf);
  std::size_t rows = 0;
  for (std::string line; std::getline(buf, line);) ++rows;
  EXPECT_EQ(rows, 1 + 9 * tr.size());

  buf.clear();
  buf.seekg(0);
  const auto csv = read_csv(buf);
  ASSERT_EQ(csv.n, 9);
  ASSERT_EQ(csv.positions.size(), tr.size());
  for (std::size_t s = 0; s < tr.size(); ++s) {
    EXPECT_NEAR(csv.times[s], tr.times[s], 5e-9 * std::max(1.0, tr.times[s]));
    for (Eigen::Index k = 0; k < tr.positions[s].size(); ++k) {
      const double x = tr.positions[s][k];
      ASSERT_NEAR(csv.positions[s][k], x, 5e-9 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST(Csv, RejectsMalformed) {
  std::istringstream bad_header("t,agent,x\n0,1,1\n");
  EXPECT_ANY_THROW(read_csv(bad_header));
  std::istringstream bad_order("t,agent,x,y\n0,2,1,1\n");
  EXPECT_ANY_THROW(read_csv(bad_order));
  std::istringstream empty("");
  EXPECT_ANY_THROW(read_csv(empty));
}

TEST(Metrics, Sim1Fields) {
  const auto sc = load_scenario("sim1");
  const auto tr = simulate(sc.config);
  const auto rep = analyze(tr, sc.config, sc.analysis);
  const auto j = metrics_json(rep, tr);
  ASSERT_EQ(j["followers"].size(), 7u);
  EXPECT_EQ(j["followers"][0]["id"], 3);
  EXPECT_EQ(j["samples"], tr.size());
  EXPECT_EQ(j["delta"], 1e-2);
  EXPECT_EQ(j["final_errors"].size(), tr.constraints.size());
  EXPECT_TRUE(j["all_converged"].get<bool>());

  const auto dir = scratch("metrics");
  export_metrics(rep, tr, dir / "m.json");
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "m.json")), j);
}

TEST(Metrics, NoFollowers) {
  ConvergenceReport rep;
  Trajectory tr;
  const auto j = metrics_json(rep, tr);
  EXPECT_TRUE(j["followers"].empty());
  EXPECT_TRUE(j["formation_time"].is_null());
  EXPECT_EQ(j["samples"], 0);
}

TEST(Plots, EmptyTrajectoryIsValidSvg) {
  Trajectory tr;
  tr.n = 0;
  tr.d = 2;
  const auto s = errors_svg(tr);
  EXPECT_EQ(s.rfind("<?xml", 0), 0u);
  EXPECT_NE(s.find("<svg"), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  const auto t = trajectories_svg(0, 2, {}, {}, {});
  EXPECT_NE(t.find("</svg>"), std::string::npos);
}

TEST(Plots, DeterministicAndSettled) {
  const auto sc = load_scenario("sim1");
  const auto tr = simulate(sc.config);
  const auto a = scratch("plots_a"), b = scratch("plots_b");
  const auto pa = emit_plots(tr, a / "sim1");
  const auto pb = emit_plots(tr, b / "sim1");
  ASSERT_EQ(pa.size(), 2u);
  for (std::size_t k = 0; k < pa.size(); ++k) EXPECT_EQ(slurp(pa[k]), slurp(pb[k]));

  // error curves replotted from the CSV stay inside the tolerance band late in the run
  std::stringstream buf;
  write_csv(tr, buf);
  const auto back = trajectory_from_csv(read_csv(buf), &sc.config);
  for (std::size_t s = 0; s < back.size(); ++s)
    if (back.times[s] >= 2.0) ASSERT_LT(back.errors[s].cwiseAbs().maxCoeff(), 1e-2) << "t=" << back.times[s];
}

TEST(Plots, ThreeDimensionalProjections) {
  const auto sc = load_scenario("sim2a");
  auto cfg = sc.config;
  cfg.t_end = 0.01;
  const auto tr = simulate(cfg);
  const auto s = trajectories_svg(tr.n, tr.d, tr.times, tr.positions, tr.constraints);
  for (const char* title : {"xy projection", "xz projection", "yz projection"})
    EXPECT_NE(s.find(title), std::string::npos) << title;
}

TEST(Cli, Theta) {
  const auto dir = scratch("cli_theta");
  ASSERT_EQ(run(std::string("\"") + FTFORM_CLI + "\" theta --a 1 --b 2 --c 2 > \"" + (dir / "o.txt").string() + "\""), 0);
  EXPECT_EQ(slurp(dir / "o.txt").rfind("theta = 4\n", 0), 0u);
}

TEST(Cli, MalformedScenarioExitsOne) {
  const auto dir = scratch("cli_bad");
  std::ofstream(dir / "bad.json") << "{\"graph\": {\"n\": 3,\n";
  EXPECT_EQ(run(std::string("\"") + FTFORM_CLI + "\" check \"" + (dir / "bad.json").string() + "\" 2> /dev/null"), 1);
  EXPECT_EQ(run(std::string("\"") + FTFORM_CLI + "\" frobnicate 2> /dev/null"), 1);
}

TEST(Cli, SimulateWritesOutputs) {
  const auto dir = scratch("cli_sim");
  ASSERT_EQ(run(std::string("\"") + FTFORM_CLI + "\" simulate sim1 --out \"" + dir.string() + "\" > /dev/null 2>&1"), 0);
  for (const char* f : {"sim1.csv", "sim1_metrics.json", "sim1_trajectories.svg", "sim1_errors.svg", "sim1_scenario.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  // the saved scenario reproduces the run
  const auto sc = load_scenario((dir / "sim1_scenario.json").string());
  std::ostringstream csv;
  write_csv(simulate(sc.config), csv);
  EXPECT_EQ(csv.str(), slurp(dir / "sim1.csv"));
}

TEST(Cli, HonorsOutDirEnv) {
  const auto dir = scratch("cli_env");
  ASSERT_EQ(run("FTFORM_OUT_DIR=\"" + dir.string() + "\" \"" + FTFORM_CLI + "\" simulate sim1 > /dev/null 2>&1"), 0);
  EXPECT_TRUE(fs::exists(dir / "sim1.csv"));
}
