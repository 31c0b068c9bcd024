#pragma once

// Coalition/evader game graph with the shared-pursuer conflict rule, exact
// and sequential (three-stage) conflict-free matching, and the 3DM instance
// reduction.

#include <cstddef>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reachavoid/coalition.hpp"
#include "reachavoid/interception.hpp"

namespace reachavoid {

struct Edge {
  std::size_t coalition = 0;  // index into GameGraph::coalitions
  std::size_t evader = 0;     // evader id (label)
  bool tie = false;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.coalition == b.coalition && a.evader == b.evader;
  }
  friend auto operator<=>(const Edge& a, const Edge& b) {
    if (auto c = a.coalition <=> b.coalition; c != 0) return c;
    return a.evader <=> b.evader;
  }
};

struct GameGraph {
  std::size_t num_pursuers = 0;
  std::vector<Coalition> coalitions;
  std::vector<std::size_t> evaders;
  std::vector<Edge> edges;  // sorted by (coalition, evader)

  // Edges conflict when their coalitions differ but share a pursuer.
  bool conflict(const Edge& a, const Edge& b) const;
  bool has_edge(std::size_t coalition, std::size_t evader) const;
  std::size_t coalition_id(const Coalition& c) const;  // throws if absent
};

struct Matching {
  std::vector<Edge> pairs;  // sorted by (coalition, evader)

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  void normalize();
  // Number of pairs whose coalition has exactly k members.
  std::size_t count_of_size(const GameGraph& g, std::size_t k) const;
  const Edge* for_evader(std::size_t evader) const;
};

// Each evader and coalition at most once, no shared pursuer, every pair an
// edge of the graph.
bool is_valid_matching(const GameGraph& graph, const Matching& m);

std::size_t coalition_count(std::size_t num_pursuers);

// All coalitions of size 1, 2, 3; by size, then lexicographically.
std::vector<Coalition> enumerate_coalitions(std::size_t num_pursuers);

class GraphBuildError : public std::runtime_error {
 public:
  GraphBuildError(const std::string& what, Coalition coalition,
                  std::size_t evader)
      : std::runtime_error(what),
        coalition(std::move(coalition)),
        evader(evader) {}
  Coalition coalition;
  std::size_t evader;
};

/// Edge (s, j) iff s wins or ties against j and every proper subcoalition
/// loses. `evader_ids` labels the evaders (defaults to 0..n-1).
GameGraph build_graph(std::span<const PursuerSpec> pursuers,
                      std::span<const EvaderSpec> evaders,
                      const RegionSpec& region,
                      std::span<const std::size_t> evader_ids = {});

/// Maximum-cardinality matching of a plain bipartite graph (no conflict
/// rule), Hopcroft-Karp. Ties resolve towards lower ids.
Matching max_bipartite_matching(std::span<const std::size_t> coalition_ids,
                                std::span<const std::size_t> evader_ids,
                                std::span<const Edge> edges);

struct SequentialMatching {
  Matching stage1;
  Matching stage2;
  Matching stage3;

  Matching combined() const;
};

SequentialMatching sequential_matching_stages(const GameGraph& graph);
Matching sequential_matching(const GameGraph& graph);

class SizeGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactOptions {
  std::size_t max_edges = 64;
};

/// Maximum conflict-free matching by branch and bound.
Matching exact_mbmc(const GameGraph& graph, const ExactOptions& options = {});

struct ThreeDMInstance {
  std::size_t m = 0;
  // (x, y, z) with each coordinate in [0, m).
  std::vector<std::array<std::size_t, 3>> triples;

  void validate() const;
};

/// Pursuers 0..m-1 stand for X, m..2m-1 for Y; evaders are Z. One pair
/// coalition per distinct (x, y) occurring in T.
GameGraph reduce_3dm(const ThreeDMInstance& instance);

ThreeDMInstance random_3dm(std::size_t m, std::size_t num_triples,
                           std::mt19937_64& rng);

}  // namespace reachavoid
