#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "ftform/analysis.hpp"
#include "ftform/bundled.hpp"
#include "ftform/simulator.hpp"

// Scenario files are JSON documents with the sections
//   graph, distances, desired (optional), leaders, followers, control, sim,
//   analysis (optional).
// Agent ids in files are 1-based. Every randomized field ("random" rates,
// random/perturbed follower positions, random frames) is drawn from the
// scenario seed, one independent stream per kind of field.

namespace ftform {

struct Scenario {
  SimConfig config;
  AnalysisOptions analysis;
};

namespace detail {

using nlohmann::json;

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string join(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

[[noreturn]] inline void fail(const std::string& path, const std::string& msg, int assumption = 0) {
  throw ValidationError(path + ": " + msg, assumption);
}

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing field");
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline double number_or(const json& obj, std::string_view key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

inline Vec as_vec(const json& v, const std::string& path, int d) {
  if (!v.is_array() || static_cast<int>(v.size()) != d) fail(path, "expected an array of " + std::to_string(d) + " numbers");
  Vec out(d);
  for (int k = 0; k < d; ++k) out[k] = as_number(v[static_cast<std::size_t>(k)], join(path, static_cast<std::size_t>(k)));
  return out;
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

enum Stream : std::uint32_t { kPositions = 1, kFrames = 2, kRates = 3 };

inline double rate_value(const json& v, const std::string& path, std::mt19937_64& rng) {
  if (v.is_string() && v.get<std::string>() == "random") return std::uniform_real_distribution<double>(0.1, 2.0)(rng);
  return as_number(v, path);
}

inline TrigTerm as_trig(const json& v, const std::string& path, std::mt19937_64& rng) {
  if (!v.is_object()) fail(path, "expected {\"fn\": \"sin\"|\"cos\", \"rate\": ...}");
  TrigTerm t;
  const auto fn = require(v, "fn", path);
  if (fn == "sin")
    t.fn = Trig::sin;
  else if (fn == "cos")
    t.fn = Trig::cos;
  else
    fail(join(path, "fn"), "expected \"sin\" or \"cos\"");
  t.rate = rate_value(require(v, "rate", path), join(path, "rate"), rng);
  t.amplitude = number_or(v, "amplitude", path, 1.0);
  return t;
}

inline LeaderVelocityProfile parse_profile(const json& v, const std::string& path, int d, std::mt19937_64& rng) {
  const auto& type = require(v, "type", path);
  if (type == "constant") return ConstantVelocity{as_vec(require(v, "velocity", path), join(path, "velocity"), d)};
  if (type == "sinusoid") {
    SinusoidVelocity s;
    s.amplitude = as_number(require(v, "amplitude", path), join(path, "amplitude"));
    const auto& fr = require(v, "frequencies", path);
    const auto fpath = join(path, "frequencies");
    if (fr.is_string()) {
      for (int k = 0; k < d; ++k) s.frequencies.push_back(rate_value(fr, fpath, rng));
    } else {
      if (!fr.is_array() || static_cast<int>(fr.size()) != d) fail(fpath, "expected \"random\" or " + std::to_string(d) + " rates");
      for (std::size_t k = 0; k < fr.size(); ++k) s.frequencies.push_back(rate_value(fr[k], join(fpath, k), rng));
    }
    return s;
  }
  if (type == "modulated") {
    ModulatedVelocity m;
    m.scale = as_number(require(v, "scale", path), join(path, "scale"));
    const auto& g = require(v, "G", path);
    const auto gpath = join(path, "G");
    if (!g.is_array() || static_cast<int>(g.size()) != d) fail(gpath, "expected " + std::to_string(d) + " rows");
    for (std::size_t r = 0; r < g.size(); ++r) {
      if (!g[r].is_array()) fail(join(gpath, r), "expected an array of terms");
      std::vector<TrigTerm> row;
      for (std::size_t c = 0; c < g[r].size(); ++c) row.push_back(as_trig(g[r][c], join(join(gpath, r), c), rng));
      m.g.push_back(std::move(row));
    }
    const auto& h = require(v, "h", path);
    if (!h.is_array()) fail(join(path, "h"), "expected an array of terms");
    for (std::size_t c = 0; c < h.size(); ++c) m.h.push_back(as_trig(h[c], join(join(path, "h"), c), rng));
    return m;
  }
  fail(join(path, "type"), "expected \"constant\", \"sinusoid\" or \"modulated\"");
}

inline ControlConfig parse_control(const json& v, const std::string& path, ControlConfig base) {
  if (!v.is_object()) fail(path, "expected an object");
  base.k = number_or(v, "k", path, base.k);
  base.k_prime = number_or(v, "k_prime", path, base.k_prime);
  base.alpha = number_or(v, "alpha", path, base.alpha);
  base.gamma = number_or(v, "gamma", path, base.gamma);
  base.eps = number_or(v, "eps", path, base.eps);
  try {
    base.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return base;
}

inline FrameRotation as_frame(const json& v, const std::string& path, int d) {
  try {
    if (v.is_number()) {
      if (d != 2) fail(path, "a single angle describes a planar frame only");
      return FrameRotation::planar(v.get<double>());
    }
    if (!v.is_array() || static_cast<int>(v.size()) != d) fail(path, "expected an angle or a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    Mat r(d, d);
    for (int i = 0; i < d; ++i) r.row(i) = as_vec(v[static_cast<std::size_t>(i)], join(path, static_cast<std::size_t>(i)), d).transpose();
    return FrameRotation(r);
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    fail(path, e.what());
  }
}

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

namespace detail {

inline Scenario parse_scenario_unchecked(const nlohmann::json& doc) {
  if (!doc.is_object()) fail("<root>", "expected an object");
  Scenario sc;
  auto& cfg = sc.config;
  cfg.name = doc.value("name", std::string("scenario"));

  const auto& graph = require(doc, "graph", "");
  const auto& jn = require(graph, "n", "graph");
  const auto& jd = require(graph, "d", "graph");
  if (!jn.is_number_integer() || !jd.is_number_integer()) fail("graph", "n and d must be integers");
  const int n = jn.get<int>();
  const int d = jd.get<int>();
  if (d != 2 && d != 3) fail("graph.d", "must be 2 or 3", 1);
  if (n < d) fail("graph.n", "must be >= graph.d (" + std::to_string(d) + ")", 1);
  cfg.graph = build_procedure1_graph(n, d);
  const auto ag = augment_leader_clique(cfg.graph);

  const auto& simj = require(doc, "sim", "");
  cfg.dt = as_number(require(simj, "dt", "sim"), "sim.dt");
  cfg.t_end = as_number(require(simj, "t_end", "sim"), "sim.t_end");
  cfg.integrator = parse_integrator(simj.value("integrator", std::string("rk4")));
  if (const auto it = simj.find("seed"); it != simj.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) fail("sim.seed", "expected a non-negative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (const auto it = simj.find("record_every"); it != simj.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) fail("sim.record_every", "expected a positive integer");
    cfg.record_every = it->get<int>();
  }

  // desired realization
  std::optional<Stacked> desired;
  if (const auto it = doc.find("desired"); it != doc.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != n) fail("desired", "expected " + std::to_string(n) + " positions", 2);
    Stacked p(n * d);
    for (int i = 0; i < n; ++i) p.segment(i * d, d) = as_vec((*it)[static_cast<std::size_t>(i)], join("desired", static_cast<std::size_t>(i)), d);
    desired = p;
  }

  // distances
  const auto& dj = require(doc, "distances", "");
  if (!dj.is_object()) fail("distances", "expected an object");
  if (dj.value("from_desired", false)) {
    if (!desired) fail("distances.from_desired", "needs a \"desired\" section", 2);
    cfg.spec = distances_from_realization(ag, Realization{*desired, d});
  } else {
    if (const auto it = dj.find("default"); it != dj.end()) {
      const double dflt = as_number(*it, "distances.default");
      for (const auto& c : ag.constraints()) cfg.spec.distances[c] = dflt;
    }
    if (const auto it = dj.find("edges"); it != dj.end()) {
      if (!it->is_array()) fail("distances.edges", "expected an array of [i, j, d*] triples");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto& e = (*it)[k];
        const auto path = join("distances.edges", k);
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer())
          fail(path, "expected [i, j, d*] with integer ids");
        const int i = e[0].get<int>() - 1;
        const int j = e[1].get<int>() - 1;
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) fail(path, "agent ids must be distinct and in 1.." + std::to_string(n), 2);
        const auto c = Constraint::of(i, j);
        const auto cs = ag.constraints();
        if (std::find(cs.begin(), cs.end(), c) == cs.end()) fail(path, "pair is not an edge of the augmented graph", 2);
        cfg.spec.distances[c] = as_number(e[2], join(path, 2));
      }
    }
    cfg.spec.desired_realization = desired;
  }
  try {
    validate_distance_spec(cfg.spec, ag);
  } catch (const ValidationError& e) {
    fail("distances", e.what(), 2);
  }

  // leaders
  auto rates = stream(cfg.seed, kRates);
  const auto& lj = require(doc, "leaders", "");
  const auto& lp = require(lj, "positions", "leaders");
  if (!lp.is_array() || static_cast<int>(lp.size()) != d) fail("leaders.positions", "expected " + std::to_string(d) + " positions", 3);
  cfg.initial_states.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < d; ++i) {
    auto& s = cfg.initial_states[static_cast<std::size_t>(i)];
    s.id = i;
    s.role = Role::leader;
    s.frame = FrameRotation::identity(d);
    s.position = as_vec(lp[static_cast<std::size_t>(i)], join("leaders.positions", static_cast<std::size_t>(i)), d);
  }
  cfg.leader_profile = parse_profile(require(lj, "profile", "leaders"), "leaders.profile", d, rates);

  // followers
  const int nf = n - d;
  const auto fj = doc.contains("followers") ? doc.at("followers") : json::object();
  auto pos_rng = stream(cfg.seed, kPositions);
  auto frame_rng = stream(cfg.seed, kFrames);
  if (nf > 0) {
    const auto& init = require(fj, "initial", "followers");
    const std::string mode = init.is_object() ? init.value("mode", std::string()) : std::string();
    for (int k = 0; k < nf; ++k) {
      auto& s = cfg.initial_states[static_cast<std::size_t>(d + k)];
      s.id = d + k;
      s.role = Role::follower;
    }
    if (mode == "explicit") {
      const auto& ps = require(init, "positions", "followers.initial");
      if (!ps.is_array() || static_cast<int>(ps.size()) != nf) fail("followers.initial.positions", "expected " + std::to_string(nf) + " positions");
      for (int k = 0; k < nf; ++k)
        cfg.initial_states[static_cast<std::size_t>(d + k)].position =
            as_vec(ps[static_cast<std::size_t>(k)], join("followers.initial.positions", static_cast<std::size_t>(k)), d);
    } else if (mode == "random") {
      const Vec lo = as_vec(require(init, "box_min", "followers.initial"), "followers.initial.box_min", d);
      const Vec hi = as_vec(require(init, "box_max", "followers.initial"), "followers.initial.box_max", d);
      if ((hi - lo).minCoeff() <= 0.0) fail("followers.initial", "box_max must exceed box_min componentwise");
      for (int k = 0; k < nf; ++k) {
        Vec p(d);
        for (int c = 0; c < d; ++c) p[c] = std::uniform_real_distribution<double>(lo[c], hi[c])(pos_rng);
        cfg.initial_states[static_cast<std::size_t>(d + k)].position = p;
      }
    } else if (mode == "perturb") {
      if (!desired) fail("followers.initial", "mode \"perturb\" needs a \"desired\" section");
      const double r = as_number(require(init, "radius", "followers.initial"), "followers.initial.radius");
      if (!(r >= 0.0)) fail("followers.initial.radius", "must be >= 0");
      for (int k = 0; k < nf; ++k) {
        Vec p = block(*desired, d + k, d);
        for (int c = 0; c < d; ++c) p[c] += std::uniform_real_distribution<double>(-r, r)(pos_rng);
        cfg.initial_states[static_cast<std::size_t>(d + k)].position = p;
      }
    } else {
      fail("followers.initial.mode", "expected \"explicit\", \"random\" or \"perturb\"");
    }

    const json frames = fj.contains("frames") ? fj.at("frames") : json("identity");
    for (int k = 0; k < nf; ++k) {
      auto& s = cfg.initial_states[static_cast<std::size_t>(d + k)];
      if (frames == "identity")
        s.frame = FrameRotation::identity(d);
      else if (frames == "random")
        s.frame = random_rotation(frame_rng, d);
      else if (frames.is_array() && static_cast<int>(frames.size()) == nf)
        s.frame = as_frame(frames[static_cast<std::size_t>(k)], join("followers.frames", static_cast<std::size_t>(k)), d);
      else
        fail("followers.frames", "expected \"identity\", \"random\" or one frame per follower");
    }
  }

  // control
  const auto& cj = require(doc, "control", "");
  cfg.law = parse_control_law(cj.value("law", std::string("basic")));
  cfg.control = parse_control(cj, "control", ControlConfig{});
  if (const auto it = cj.find("overrides"); it != cj.end()) {
    if (!it->is_object()) fail("control.overrides", "expected an object keyed by follower id");
    for (const auto& [key, val] : it->items()) {
      int id = 0;
      try {
        id = std::stoi(key) - 1;
      } catch (const std::exception&) {
        fail("control.overrides." + key, "key must be a follower id");
      }
      if (!cfg.graph.is_follower(id)) fail("control.overrides." + key, "not a follower id");
      cfg.control_overrides[id] = parse_control(val, "control.overrides." + key, cfg.control);
    }
  }

  if (const auto it = doc.find("analysis"); it != doc.end()) {
    sc.analysis.delta = number_or(*it, "delta", "analysis", sc.analysis.delta);
    sc.analysis.window = number_or(*it, "window", "analysis", sc.analysis.window);
    if (!(sc.analysis.delta > 0.0)) fail("analysis.delta", "must be > 0");
    if (!(sc.analysis.window >= 0.0)) fail("analysis.window", "must be >= 0");
  }
  return sc;
}

}  // namespace detail

/// Builds a configuration from a parsed document. Field errors name the path.
inline Scenario parse_scenario(const nlohmann::json& doc) {
  try {
    return detail::parse_scenario_unchecked(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

inline nlohmann::json parse_scenario_document(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ValidationError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

inline Scenario parse_scenario_text(std::string_view text) { return parse_scenario(parse_scenario_document(text)); }

/// Raw document for a file path or a bundled scenario name (sim1, sim2a, sim2b).
inline nlohmann::json read_scenario_document(const std::string& path_or_name) {
  if (std::filesystem::is_regular_file(path_or_name)) {
    std::ifstream in(path_or_name, std::ios::binary);
    if (!in) throw ValidationError(path_or_name + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_document(buf.str());
  }
  if (const auto b = bundled_scenario(path_or_name)) return parse_scenario_document(*b);
  throw ValidationError(path_or_name + ": no such file or bundled scenario");
}

/// Parses and runs validate_config; basin warnings land in `report`.
inline Scenario load_parsed_scenario(const nlohmann::json& doc, ValidationReport* report = nullptr) {
  Scenario sc = parse_scenario(doc);
  auto rep = validate_config(sc.config);
  if (report) *report = std::move(rep);
  return sc;
}

inline Scenario load_scenario(const std::string& path_or_name, ValidationReport* report = nullptr) {
  return load_parsed_scenario(read_scenario_document(path_or_name), report);
}

namespace detail {

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

inline json to_json(const TrigTerm& t) {
  json j{{"fn", t.fn == Trig::sin ? "sin" : "cos"}, {"rate", t.rate}};
  if (t.amplitude != 1.0) j["amplitude"] = t.amplitude;
  return j;
}

inline json to_json(const ControlConfig& c) {
  return json{{"k", c.k}, {"k_prime", c.k_prime}, {"alpha", c.alpha}, {"gamma", c.gamma}, {"eps", c.eps}};
}

}  // namespace detail

/// Fully resolved document: every random field is written out explicitly so
/// reloading it reproduces the same run.
inline nlohmann::json to_json(const Scenario& sc) {
  using detail::json;
  using detail::to_json;
  const auto& cfg = sc.config;
  const int n = cfg.graph.n;
  const int d = cfg.graph.d;
  json doc;
  doc["name"] = cfg.name;
  doc["graph"] = {{"n", n}, {"d", d}};
  json edges = json::array();
  for (const auto& [c, v] : cfg.spec.distances) edges.push_back(json::array({c.a + 1, c.b + 1, v}));
  doc["distances"] = {{"edges", edges}};
  if (cfg.spec.desired_realization) {
    json des = json::array();
    for (int i = 0; i < n; ++i) des.push_back(to_json(Vec(block(*cfg.spec.desired_realization, i, d))));
    doc["desired"] = des;
  }
  json leaders = json::array();
  for (int i = 0; i < d; ++i) leaders.push_back(to_json(cfg.initial_states[static_cast<std::size_t>(i)].position));
  json profile;
  if (const auto* c = std::get_if<ConstantVelocity>(&cfg.leader_profile)) {
    profile = {{"type", "constant"}, {"velocity", to_json(c->v)}};
  } else if (const auto* s = std::get_if<SinusoidVelocity>(&cfg.leader_profile)) {
    profile = {{"type", "sinusoid"}, {"amplitude", s->amplitude}, {"frequencies", s->frequencies}};
  } else {
    const auto& m = std::get<ModulatedVelocity>(cfg.leader_profile);
    json g = json::array();
    for (const auto& row : m.g) {
      json r = json::array();
      for (const auto& t : row) r.push_back(to_json(t));
      g.push_back(r);
    }
    json h = json::array();
    for (const auto& t : m.h) h.push_back(to_json(t));
    profile = {{"type", "modulated"}, {"scale", m.scale}, {"G", g}, {"h", h}};
  }
  doc["leaders"] = {{"positions", leaders}, {"profile", profile}};
  if (n > d) {
    json pos = json::array();
    json frames = json::array();
    for (int i = d; i < n; ++i) {
      const auto& s = cfg.initial_states[static_cast<std::size_t>(i)];
      pos.push_back(to_json(s.position));
      json rows = json::array();
      for (int r = 0; r < d; ++r) rows.push_back(to_json(Vec(s.frame.matrix().row(r).transpose())));
      frames.push_back(rows);
    }
    doc["followers"] = {{"initial", {{"mode", "explicit"}, {"positions", pos}}}, {"frames", frames}};
  }
  json control = to_json(cfg.control);
  control["law"] = std::string(to_string(cfg.law));
  if (!cfg.control_overrides.empty()) {
    json ov = json::object();
    for (const auto& [id, c] : cfg.control_overrides) ov[std::to_string(id + 1)] = to_json(c);
    control["overrides"] = ov;
  }
  doc["control"] = control;
  doc["sim"] = {{"dt", cfg.dt},
                {"t_end", cfg.t_end},
                {"integrator", std::string(to_string(cfg.integrator))},
                {"seed", cfg.seed},
                {"record_every", cfg.record_every}};
  doc["analysis"] = {{"delta", sc.analysis.delta}, {"window", sc.analysis.window}};
  return doc;
}

inline void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(sc).dump(2) << '\n';
}

}  // namespace ftform
