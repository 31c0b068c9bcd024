#pragma once

// Scenario, trace and graph documents.
//
// Scenario: JSON with pursuers [{pos, speed, radius}], evaders
// [{pos, speed, policy}], region "unbounded" | {"ball": {center, radius}},
// dt, seed, max_time, matcher "sma" | "exact". Optional keys:
// unmatched_pursuer_policy, rematch_every, capture_tolerance,
// exact_max_edges.
//
// Trace: one JSON frame object per line followed by a summary object;
// numbers carry 9 significant digits. The CSV companion lists
// (time, role, id, x, y, z, event) rows.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "reachavoid/engine.hpp"
#include "reachavoid/matching.hpp"

namespace reachavoid::io {

using nlohmann::json;

Scenario scenario_from_json(const json& doc);
json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

GameGraph graph_from_json(const json& doc);
json graph_to_json(const GameGraph& graph);
GameGraph load_graph(const std::string& path);

json matching_to_json(const GameGraph& graph, const Matching& m);

ThreeDMInstance three_dm_from_json(const json& doc);
json three_dm_to_json(const ThreeDMInstance& instance);

// Rounds to 9 significant digits.
double round9(double v);
std::string format9(double v);

void write_trace_jsonl(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, std::ostream& out);

}  // namespace reachavoid::io
