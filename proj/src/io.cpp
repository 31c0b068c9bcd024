#include "reachavoid/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace reachavoid::io {

namespace {

const json& field(const json& obj, const std::string& key,
                  const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(path + "." + key, "missing required field");
  }
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ScenarioError(path, "expected a number");
  return v.get<double>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) {
    throw ScenarioError(path, "expected [x, y, z]");
  }
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"),
          number(v[2], path + "[2]")};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json vec_json9(const Vec3& v) {
  return json::array({round9(v.x()), round9(v.y()), round9(v.z())});
}

template <typename T>
T optional_number(const json& obj, const std::string& key, T fallback,
                  const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ScenarioError(path + "." + key, "expected a number");
  return it->get<T>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ScenarioError(path, "expected a string");
  return v.get<std::string>();
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Scenario sc;
  const std::string root = "$";
  const json& ps = field(doc, "pursuers", root);
  if (!ps.is_array()) throw ScenarioError("$.pursuers", "expected an array");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string path = "$.pursuers[" + std::to_string(i) + "]";
    PursuerSpec p;
    p.position = vec3(field(ps[i], "pos", path), path + ".pos");
    p.speed = number(field(ps[i], "speed", path), path + ".speed");
    p.capture_radius = number(field(ps[i], "radius", path), path + ".radius");
    sc.pursuers.push_back(p);
  }
  const json& es = field(doc, "evaders", root);
  if (!es.is_array()) throw ScenarioError("$.evaders", "expected an array");
  for (std::size_t j = 0; j < es.size(); ++j) {
    const std::string path = "$.evaders[" + std::to_string(j) + "]";
    EvaderSpec e;
    e.position = vec3(field(es[j], "pos", path), path + ".pos");
    e.speed = number(field(es[j], "speed", path), path + ".speed");
    sc.evaders.push_back(e);
    EvaderPolicy pol = EvaderPolicy::Straight;
    if (es[j].contains("policy")) {
      try {
        pol = parse_evader_policy(text(es[j]["policy"], path + ".policy"));
      } catch (const std::invalid_argument& ex) {
        throw ScenarioError(path + ".policy", ex.what());
      }
    }
    sc.evader_policies.push_back(pol);
  }

  const json& region = field(doc, "region", root);
  try {
    if (region.is_string() && region.get<std::string>() == "unbounded") {
      sc.region = RegionSpec::unbounded();
    } else if (region.is_object() && region.contains("unbounded")) {
      sc.region = RegionSpec::unbounded();
    } else if (region.is_object() && region.contains("ball")) {
      const json& b = region["ball"];
      sc.region = RegionSpec::ball(
          vec3(field(b, "center", "$.region.ball"), "$.region.ball.center"),
          number(field(b, "radius", "$.region.ball"), "$.region.ball.radius"));
    } else {
      throw ScenarioError("$.region",
                          "expected \"unbounded\" or {\"ball\": {...}}");
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw ScenarioError("$.region", ex.what());
  }

  sc.dt = number(field(doc, "dt", root), "$.dt");
  sc.max_time = number(field(doc, "max_time", root), "$.max_time");
  const json& seed = field(doc, "seed", root);
  if (!seed.is_number_unsigned()) {
    throw ScenarioError("$.seed", "expected a non-negative integer");
  }
  sc.seed = seed.get<std::uint64_t>();
  if (doc.contains("matcher")) {
    try {
      sc.matcher = parse_matcher(text(doc["matcher"], "$.matcher"));
    } catch (const std::invalid_argument& ex) {
      throw ScenarioError("$.matcher", ex.what());
    }
  }
  if (doc.contains("unmatched_pursuer_policy")) {
    try {
      sc.unmatched_pursuer_policy = parse_pursuer_policy(
          text(doc["unmatched_pursuer_policy"], "$.unmatched_pursuer_policy"));
    } catch (const std::invalid_argument& ex) {
      throw ScenarioError("$.unmatched_pursuer_policy", ex.what());
    }
  }
  sc.rematch_every =
      optional_number<int>(doc, "rematch_every", sc.rematch_every, "$");
  sc.capture_tolerance = optional_number<double>(
      doc, "capture_tolerance", sc.capture_tolerance, "$");
  sc.exact_max_edges = optional_number<std::size_t>(
      doc, "exact_max_edges", sc.exact_max_edges, "$");

  try {
    sc.validate();
  } catch (const ScenarioError& ex) {
    throw ScenarioError("$." + ex.field, std::string(ex.what()).substr(
                                             ex.field.size() + 2));
  }
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["pursuers"] = json::array();
  for (const auto& p : sc.pursuers) {
    doc["pursuers"].push_back({{"pos", vec_json(p.position)},
                               {"speed", p.speed},
                               {"radius", p.capture_radius}});
  }
  doc["evaders"] = json::array();
  for (std::size_t j = 0; j < sc.evaders.size(); ++j) {
    doc["evaders"].push_back({{"pos", vec_json(sc.evaders[j].position)},
                              {"speed", sc.evaders[j].speed},
                              {"policy", to_string(sc.evader_policies[j])}});
  }
  if (sc.region.bounded()) {
    doc["region"] = {{"ball",
                      {{"center", vec_json(sc.region.center)},
                       {"radius", sc.region.radius}}}};
  } else {
    doc["region"] = "unbounded";
  }
  doc["dt"] = sc.dt;
  doc["seed"] = sc.seed;
  doc["max_time"] = sc.max_time;
  doc["matcher"] = to_string(sc.matcher);
  doc["unmatched_pursuer_policy"] = to_string(sc.unmatched_pursuer_policy);
  doc["rematch_every"] = sc.rematch_every;
  doc["capture_tolerance"] = sc.capture_tolerance;
  doc["exact_max_edges"] = sc.exact_max_edges;
  return doc;
}

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ScenarioError(path, std::string("malformed JSON: ") + ex.what());
  }
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_file(path));
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  out << scenario_to_json(scenario).dump(2) << "\n";
}

GameGraph graph_from_json(const json& doc) {
  GameGraph g;
  const json& cs = field(doc, "coalitions", "$");
  if (!cs.is_array()) throw ScenarioError("$.coalitions", "expected an array");
  std::size_t max_pursuer = 0;
  for (std::size_t c = 0; c < cs.size(); ++c) {
    const std::string path = "$.coalitions[" + std::to_string(c) + "]";
    if (!cs[c].is_array() || cs[c].empty()) {
      throw ScenarioError(path, "expected a non-empty list of pursuers");
    }
    std::vector<std::size_t> members;
    for (const json& m : cs[c]) {
      if (!m.is_number_unsigned()) {
        throw ScenarioError(path, "pursuer ids must be non-negative integers");
      }
      members.push_back(m.get<std::size_t>());
      max_pursuer = std::max(max_pursuer, members.back() + 1);
    }
    try {
      g.coalitions.emplace_back(std::move(members));
    } catch (const std::invalid_argument& ex) {
      throw ScenarioError(path, ex.what());
    }
  }
  g.num_pursuers =
      optional_number<std::size_t>(doc, "num_pursuers", max_pursuer, "$");
  if (g.num_pursuers < max_pursuer) {
    throw ScenarioError("$.num_pursuers", "smaller than the largest pursuer id");
  }
  const json& es = field(doc, "evaders", "$");
  if (!es.is_array()) throw ScenarioError("$.evaders", "expected an array");
  for (const json& e : es) {
    if (!e.is_number_unsigned()) {
      throw ScenarioError("$.evaders", "evader ids must be non-negative integers");
    }
    g.evaders.push_back(e.get<std::size_t>());
  }
  const json& edges = field(doc, "edges", "$");
  if (!edges.is_array()) throw ScenarioError("$.edges", "expected an array");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string path = "$.edges[" + std::to_string(k) + "]";
    const json& e = edges[k];
    Edge edge;
    if (e.is_array() && (e.size() == 2 || e.size() == 3) &&
        e[0].is_number_unsigned() && e[1].is_number_unsigned()) {
      edge.coalition = e[0].get<std::size_t>();
      edge.evader = e[1].get<std::size_t>();
      if (e.size() == 3) edge.tie = e[2].get<bool>();
    } else if (e.is_object()) {
      edge.coalition = static_cast<std::size_t>(
          number(field(e, "coalition", path), path + ".coalition"));
      edge.evader = static_cast<std::size_t>(
          number(field(e, "evader", path), path + ".evader"));
      edge.tie = e.value("tie", false);
    } else {
      throw ScenarioError(path, "expected [coalition, evader]");
    }
    if (edge.coalition >= g.coalitions.size()) {
      throw ScenarioError(path, "unknown coalition id");
    }
    if (std::find(g.evaders.begin(), g.evaders.end(), edge.evader) ==
        g.evaders.end()) {
      throw ScenarioError(path, "unknown evader id");
    }
    g.edges.push_back(edge);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

json graph_to_json(const GameGraph& g) {
  json doc;
  doc["num_pursuers"] = g.num_pursuers;
  doc["coalitions"] = json::array();
  for (const auto& c : g.coalitions) doc["coalitions"].push_back(c.members());
  doc["evaders"] = g.evaders;
  doc["edges"] = json::array();
  for (const Edge& e : g.edges) {
    json row = json::array({e.coalition, e.evader});
    if (e.tie) row.push_back(true);
    doc["edges"].push_back(row);
  }
  return doc;
}

GameGraph load_graph(const std::string& path) {
  return graph_from_json(parse_file(path));
}

json matching_to_json(const GameGraph& g, const Matching& m) {
  json out = json::array();
  for (const Edge& e : m.pairs) {
    out.push_back({{"coalition", g.coalitions.at(e.coalition).members()},
                   {"evader", e.evader},
                   {"tie", e.tie}});
  }
  return out;
}

ThreeDMInstance three_dm_from_json(const json& doc) {
  ThreeDMInstance inst;
  inst.m = static_cast<std::size_t>(number(field(doc, "m", "$"), "$.m"));
  const json& ts = field(doc, "triples", "$");
  if (!ts.is_array()) throw ScenarioError("$.triples", "expected an array");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::string path = "$.triples[" + std::to_string(k) + "]";
    if (!ts[k].is_array() || ts[k].size() != 3) {
      throw ScenarioError(path, "expected [x, y, z]");
    }
    std::array<std::size_t, 3> t{};
    for (int c = 0; c < 3; ++c) {
      if (!ts[k][c].is_number_unsigned()) {
        throw ScenarioError(path, "coordinates must be non-negative integers");
      }
      t[c] = ts[k][c].get<std::size_t>();
    }
    inst.triples.push_back(t);
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument& ex) {
    throw ScenarioError("$.triples", ex.what());
  }
  return inst;
}

json three_dm_to_json(const ThreeDMInstance& inst) {
  json doc;
  doc["m"] = inst.m;
  doc["triples"] = json::array();
  for (const auto& t : inst.triples) doc["triples"].push_back(t);
  return doc;
}

double round9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

namespace {

json event_json(const Event& e) {
  json j = {{"t", round9(e.time)},
            {"kind", to_string(e.kind)},
            {"evader", e.evader},
            {"pos", vec_json9(e.position)}};
  j["pursuer"] = e.pursuer ? json(*e.pursuer) : json(nullptr);
  return j;
}

}  // namespace

void write_trace_jsonl(const Trace& trace, std::ostream& out) {
  std::size_t next_event = 0;
  for (std::size_t f = 0; f < trace.frames.size(); ++f) {
    const Frame& fr = trace.frames[f];
    const double end = f + 1 < trace.frames.size()
                           ? trace.frames[f + 1].time
                           : std::numeric_limits<double>::infinity();
    json j;
    j["type"] = "frame";
    j["t"] = round9(fr.time);
    j["pursuers"] = json::array();
    for (const auto& p : fr.pursuers) j["pursuers"].push_back(vec_json9(p));
    j["evaders"] = json::array();
    for (const auto& e : fr.evaders) j["evaders"].push_back(vec_json9(e));
    j["live"] = fr.evader_live;
    j["matching"] = json::array();
    for (std::size_t k = 0; k < fr.adopted.size(); ++k) {
      const AdoptedPair& a = fr.adopted[k];
      json pair = {{"coalition", a.coalition.members()},
                   {"evader", a.evader},
                   {"tie", a.tie}};
      if (k < fr.interception_values.size()) {
        pair["z_intercept"] = round9(fr.interception_values[k]);
      }
      j["matching"].push_back(pair);
    }
    j["pursuer_headings"] = json::array();
    for (const auto& h : fr.pursuer_headings) {
      j["pursuer_headings"].push_back(vec_json9(h));
    }
    j["evader_headings"] = json::array();
    for (const auto& h : fr.evader_headings) {
      j["evader_headings"].push_back(vec_json9(h));
    }
    j["events"] = json::array();
    while (next_event < trace.events.size() &&
           trace.events[next_event].time < end) {
      j["events"].push_back(event_json(trace.events[next_event++]));
    }
    out << j.dump() << "\n";
  }
  json s;
  s["type"] = "summary";
  s["captured"] = trace.summary.captured;
  s["escaped"] = trace.summary.escaped;
  s["remaining"] = trace.summary.remaining;
  s["events"] = json::array();
  for (const Event& e : trace.events) s["events"].push_back(event_json(e));
  out << s.dump() << "\n";
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "time,role,id,x,y,z,event\n";
  auto row = [&](double t, const char* role, std::size_t id, const Vec3& p,
                 const std::string& event) {
    out << format9(t) << "," << role << "," << id << "," << format9(p.x())
        << "," << format9(p.y()) << "," << format9(p.z()) << "," << event
        << "\n";
  };
  for (const Frame& fr : trace.frames) {
    for (std::size_t i = 0; i < fr.pursuers.size(); ++i) {
      row(fr.time, "pursuer", i, fr.pursuers[i], "");
    }
    for (std::size_t j = 0; j < fr.evaders.size(); ++j) {
      if (fr.evader_live[j]) row(fr.time, "evader", j, fr.evaders[j], "");
    }
  }
  for (const Event& e : trace.events) {
    row(e.time, "evader", e.evader, e.position, to_string(e.kind));
  }
}

}  // namespace reachavoid::io
