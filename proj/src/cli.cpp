#include "reachavoid/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "reachavoid/io.hpp"

namespace reachavoid::cli {

namespace {

using io::format9;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string vec9(const Vec3& v) {
  return "(" + format9(v.x()) + "," + format9(v.y()) + "," + format9(v.z()) +
         ")";
}

Coalition parse_coalition(const std::string& spec, std::size_t num_pursuers) {
  std::vector<std::size_t> members;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty() && (item[0] == 'P' || item[0] == 'p')) item.erase(0, 1);
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (item.empty() || pos != item.size()) {
      throw InputError("--coalition: bad pursuer id '" + item + "'");
    }
    if (v >= num_pursuers) {
      throw InputError("--coalition: pursuer " + item + " does not exist");
    }
    members.push_back(v);
  }
  if (members.empty()) throw InputError("--coalition: empty coalition");
  try {
    return Coalition(std::move(members));
  } catch (const std::invalid_argument& ex) {
    throw InputError(std::string("--coalition: ") + ex.what());
  }
}

Coalition everyone(std::size_t n) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return Coalition(std::move(all));
}

struct Options {
  std::string scenario;
  std::string graph_file;
  std::string instance_file;
  std::string matcher;
  std::string coalition;
  std::string out;
  std::string csv;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_time;
  std::size_t evader = 0;
  std::size_t instances = 0;
  std::size_t max_pursuers = 6;
  std::size_t max_evaders = 6;
  std::size_t max_edges = 64;
  std::size_t m = 3;
  std::size_t triples = 6;
};

Scenario load(const Options& o) {
  if (o.scenario.empty()) throw InputError("--scenario is required");
  Scenario sc = io::load_scenario(o.scenario);
  if (o.dt) sc.dt = *o.dt;
  if (o.seed) sc.seed = *o.seed;
  if (o.max_time) sc.max_time = *o.max_time;
  if (!o.matcher.empty() && o.matcher != "both") {
    sc.matcher = parse_matcher(o.matcher);
  }
  if (o.max_edges != 64) sc.exact_max_edges = o.max_edges;
  sc.validate();
  return sc;
}

void print_matching(std::ostream& out, const std::string& label,
                    const GameGraph& g, const Matching& m) {
  out << label << " size=" << m.size();
  for (const Edge& e : m.pairs) {
    out << " " << g.coalitions[e.coalition].to_string() << "-E" << e.evader;
    if (e.tie) out << "(tie)";
  }
  out << "\n";
}

int cmd_kind(const Options& o, std::ostream& out) {
  const Scenario sc = load(o);
  if (o.evader >= sc.evaders.size()) {
    throw InputError("--evader: evader " + std::to_string(o.evader) +
                     " does not exist");
  }
  if (sc.pursuers.empty()) throw InputError("scenario has no pursuers");
  const Coalition c = o.coalition.empty()
                          ? everyone(sc.pursuers.size())
                          : parse_coalition(o.coalition, sc.pursuers.size());
  const KindResult r =
      classify(c, sc.evaders[o.evader], sc.pursuers, sc.region);
  out << to_string(r.kind) << " z=" << format9(r.interception.value)
      << " point=" << vec9(r.interception.point);
  if (r.exit_witness) out << " exit=" << vec9(*r.exit_witness);
  out << "\n";
  return kOk;
}

int cmd_intercept(const Options& o, std::ostream& out) {
  const Scenario sc = load(o);
  if (o.evader >= sc.evaders.size()) {
    throw InputError("--evader: evader " + std::to_string(o.evader) +
                     " does not exist");
  }
  if (sc.pursuers.empty()) throw InputError("scenario has no pursuers");
  const Coalition c = o.coalition.empty()
                          ? everyone(sc.pursuers.size())
                          : parse_coalition(o.coalition, sc.pursuers.size());
  const EvaderSpec& e = sc.evaders[o.evader];
  const InterceptionResult r = solve_interception(c, e, sc.pursuers, sc.region);
  const KktResiduals k = kkt_residuals(r, c, e, sc.pursuers, sc.region);
  out << "point=" << vec9(r.point) << "\n";
  out << "z=" << format9(r.value) << "\n";
  out << "active=";
  for (std::size_t i = 0; i < r.active_set.size(); ++i) {
    out << (i ? "," : "") << "P" << r.active_set[i];
  }
  if (r.region_active) out << (r.active_set.empty() ? "" : ",") << "region";
  out << "\n";
  out << "multipliers=";
  for (std::size_t i = 0; i < r.multipliers.size(); ++i) {
    out << (i ? "," : "") << "P" << c.members()[i] << ":"
        << format9(r.multipliers[i]);
  }
  if (sc.region.bounded()) out << ",region:" << format9(r.region_multiplier);
  out << "\n";
  out << "reduced=" << reduce_coalition(c, e, sc.pursuers, sc.region, r).to_string()
      << "\n";
  out << "stationarity=" << format9(k.stationarity)
      << " complementarity=" << format9(k.complementarity) << "\n";
  return kOk;
}

int cmd_match(const Options& o, std::ostream& out) {
  GameGraph g;
  std::string which = o.matcher;
  std::size_t guard = o.max_edges;
  if (!o.graph_file.empty()) {
    g = io::load_graph(o.graph_file);
    if (which.empty()) which = "sma";
  } else {
    const Scenario sc = load(o);
    g = build_graph(sc.pursuers, sc.evaders, sc.region);
    if (which.empty()) which = to_string(sc.matcher);
    guard = sc.exact_max_edges;
  }
  if (which != "sma" && which != "exact" && which != "both") {
    throw InputError("--matcher: expected sma, exact or both");
  }
  out << "edges=" << g.edges.size() << "\n";
  std::optional<Matching> sma;
  std::optional<Matching> opt;
  if (which != "exact") {
    sma = sequential_matching(g);
    print_matching(out, "sma", g, *sma);
  }
  if (which != "sma") {
    opt = exact_mbmc(g, ExactOptions{guard});
    print_matching(out, "exact", g, *opt);
  }
  if (sma && opt) {
    const double ratio =
        opt->empty() ? 1.0
                     : static_cast<double>(sma->size()) / opt->size();
    out << "ratio=" << format9(ratio) << "\n";
  }
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(o);
  Trace trace;
  int code = kOk;
  try {
    trace = run(sc);
  } catch (const EngineError& ex) {
    err << "solver failure at frame " << ex.frame << " (t="
        << format9(ex.time) << "): " << ex.what() << "\n";
    trace = ex.partial;
    code = kSolverError;
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw InputError("--out: cannot write " + o.out);
    io::write_trace_jsonl(trace, f);
  }
  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    if (!f) throw InputError("--csv: cannot write " + o.csv);
    io::write_trace_csv(trace, f);
  }
  out << "{\"captured\":" << trace.summary.captured
      << ",\"escaped\":" << trace.summary.escaped
      << ",\"remaining\":" << trace.summary.remaining << "}\n";
  return code;
}

bool three_dm_perfect(const ThreeDMInstance& inst) {
  // Small backtracking search, only used for reporting.
  std::vector<bool> ux(inst.m), uy(inst.m), uz(inst.m);
  auto rec = [&](auto&& self, std::size_t x) -> bool {
    if (x == inst.m) return true;
    for (const auto& t : inst.triples) {
      if (t[0] != x || uy[t[1]] || uz[t[2]]) continue;
      uy[t[1]] = uz[t[2]] = true;
      if (self(self, x + 1)) return true;
      uy[t[1]] = uz[t[2]] = false;
    }
    return false;
  };
  return rec(rec, 0);
}

int cmd_reduce3dm(const Options& o, std::ostream& out) {
  ThreeDMInstance inst;
  if (!o.instance_file.empty()) {
    std::ifstream in(o.instance_file);
    if (!in) throw InputError(o.instance_file + ": cannot open file");
    io::json doc;
    try {
      doc = io::json::parse(in);
    } catch (const io::json::parse_error& ex) {
      throw InputError(o.instance_file + ": malformed JSON: " + ex.what());
    }
    inst = io::three_dm_from_json(doc);
  } else {
    std::mt19937_64 rng(o.seed.value_or(0));
    inst = random_3dm(o.m, o.triples, rng);
  }
  const GameGraph g = reduce_3dm(inst);
  const Matching m = exact_mbmc(g, ExactOptions{o.max_edges});
  const bool complete = m.size() == inst.m;
  io::json doc;
  doc["instance"] = io::three_dm_to_json(inst);
  doc["graph"] = io::graph_to_json(g);
  doc["matching"] = io::matching_to_json(g, m);
  doc["complete"] = complete;
  doc["three_dm_perfect"] = three_dm_perfect(inst);
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    f << doc.dump(2) << "\n";
  }
  out << "m=" << inst.m << " triples=" << inst.triples.size()
      << " edges=" << g.edges.size() << " matching=" << m.size()
      << " complete=" << (complete ? "yes" : "no") << "\n";
  return kOk;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

int cmd_bench(const Options& o, std::ostream& out) {
  out << "instance,pursuers,evaders,edges,opt,sma,ratio,opt_singles,"
         "opt_pairs,opt_triples,build_ms,sma_ms,exact_ms\n";
  std::mt19937_64 rng(o.seed.value_or(0));
  RandomScenarioOptions ro;
  ro.max_pursuers = o.max_pursuers;
  ro.max_evaders = o.max_evaders;
  for (std::size_t k = 0; k < o.instances; ++k) {
    const Scenario sc = random_scenario(ro, rng);
    auto t0 = std::chrono::steady_clock::now();
    const GameGraph g = build_graph(sc.pursuers, sc.evaders, sc.region);
    const double build_ms = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const Matching sma = sequential_matching(g);
    const double sma_ms = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const Matching opt = exact_mbmc(g, ExactOptions{std::max<std::size_t>(
                                           o.max_edges, g.edges.size())});
    const double exact_ms = ms_since(t0);
    const double ratio =
        opt.empty() ? 1.0 : static_cast<double>(sma.size()) / opt.size();
    out << k << "," << sc.pursuers.size() << "," << sc.evaders.size() << ","
        << g.edges.size() << "," << opt.size() << "," << sma.size() << ","
        << format9(ratio) << "," << opt.count_of_size(g, 1) << ","
        << opt.count_of_size(g, 2) << "," << opt.count_of_size(g, 3) << ","
        << format9(build_ms) << "," << format9(sma_ms) << ","
        << format9(exact_ms) << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Reach-avoid pursuit-evasion games in three dimensions"};
  app.require_subcommand(1);
  Options o;

  auto scenario_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON file");
    cmd->add_option("--dt", o.dt, "Override the frame length");
    cmd->add_option("--seed", o.seed, "Override the seed");
    cmd->add_option("--max-time", o.max_time, "Override the time limit");
  };

  auto* kind = app.add_subcommand("kind", "Classify one coalition/evader game");
  scenario_flags(kind);
  kind->add_option("--coalition", o.coalition, "Pursuer ids, e.g. 0,2");
  kind->add_option("--evader", o.evader, "Evader id");

  auto* intercept =
      app.add_subcommand("intercept", "Interception point with certificate");
  scenario_flags(intercept);
  intercept->add_option("--coalition", o.coalition, "Pursuer ids, e.g. 0,2");
  intercept->add_option("--evader", o.evader, "Evader id");

  auto* match = app.add_subcommand("match", "Build the game graph and match");
  scenario_flags(match);
  match->add_option("--graph-file", o.graph_file, "Graph JSON instead of a scenario");
  match->add_option("--matcher", o.matcher, "sma, exact or both");
  match->add_option("--max-edges", o.max_edges, "Exact-search size guard");

  auto* simulate = app.add_subcommand("simulate", "Run the receding-horizon game");
  scenario_flags(simulate);
  simulate->add_option("--matcher", o.matcher, "sma or exact");
  simulate->add_option("--out", o.out, "Trace JSONL output");
  simulate->add_option("--csv", o.csv, "Position CSV output");
  simulate->add_option("--max-edges", o.max_edges, "Exact-search size guard");

  auto* reduce = app.add_subcommand("reduce3dm", "Reduce a 3DM instance to a game graph");
  reduce->add_option("--instance", o.instance_file, "3DM JSON {m, triples}");
  reduce->add_option("--m", o.m, "Random instance size");
  reduce->add_option("--triples", o.triples, "Random instance triple count");
  reduce->add_option("--seed", o.seed, "Random seed");
  reduce->add_option("--out", o.out, "Write instance, graph and matching JSON");
  reduce->add_option("--max-edges", o.max_edges, "Exact-search size guard");

  auto* bench = app.add_subcommand("bench", "Compare SMA with the exact optimum");
  bench->add_option("--instances", o.instances, "Number of random instances");
  bench->add_option("--seed", o.seed, "Random seed");
  bench->add_option("--max-pursuers", o.max_pursuers, "Pursuers per instance");
  bench->add_option("--max-evaders", o.max_evaders, "Evaders per instance");
  bench->add_option("--max-edges", o.max_edges, "Exact-search size guard");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << ex.what() << "\n";
    return kInputError;
  }

  try {
    if (kind->parsed()) return cmd_kind(o, out);
    if (intercept->parsed()) return cmd_intercept(o, out);
    if (match->parsed()) return cmd_match(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (reduce->parsed()) return cmd_reduce3dm(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
  } catch (const SizeGuardError& ex) {
    err << "size guard: " << ex.what() << "\n";
    return kSizeGuard;
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& ex) {
    // ScenarioError, GeometryError and friends.
    err << "input error: " << ex.what() << "\n";
    return kInputError;
  } catch (const GraphBuildError& ex) {
    err << "solver error for " << ex.coalition.to_string() << " vs E"
        << ex.evader << ": " << ex.what() << "\n";
    return kSolverError;
  } catch (const std::runtime_error& ex) {
    err << "solver error: " << ex.what() << "\n";
    return kSolverError;
  }
  return kInputError;
}

}  // namespace reachavoid::cli
