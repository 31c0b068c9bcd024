#include "reachavoid/matching.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace reachavoid {

bool GameGraph::conflict(const Edge& a, const Edge& b) const {
  return a.coalition != b.coalition &&
         coalitions.at(a.coalition).intersects(coalitions.at(b.coalition));
}

bool GameGraph::has_edge(std::size_t coalition, std::size_t evader) const {
  return std::binary_search(edges.begin(), edges.end(),
                            Edge{coalition, evader, false});
}

std::size_t GameGraph::coalition_id(const Coalition& c) const {
  const auto it = std::find(coalitions.begin(), coalitions.end(), c);
  if (it == coalitions.end()) {
    throw std::out_of_range("coalition " + c.to_string() + " not in graph");
  }
  return static_cast<std::size_t>(it - coalitions.begin());
}

void Matching::normalize() { std::sort(pairs.begin(), pairs.end()); }

std::size_t Matching::count_of_size(const GameGraph& g, std::size_t k) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [&](const Edge& e) {
        return g.coalitions.at(e.coalition).size() == k;
      }));
}

const Edge* Matching::for_evader(std::size_t evader) const {
  for (const Edge& e : pairs) {
    if (e.evader == evader) return &e;
  }
  return nullptr;
}

bool is_valid_matching(const GameGraph& graph, const Matching& m) {
  std::set<std::size_t> coalitions;
  std::set<std::size_t> evaders;
  std::set<std::size_t> pursuers;
  for (const Edge& e : m.pairs) {
    if (!graph.has_edge(e.coalition, e.evader)) return false;
    if (!coalitions.insert(e.coalition).second) return false;
    if (!evaders.insert(e.evader).second) return false;
    for (std::size_t p : graph.coalitions.at(e.coalition)) {
      if (!pursuers.insert(p).second) return false;
    }
  }
  return true;
}

std::size_t coalition_count(std::size_t n) {
  return n * (n * n + 5) / 6;
}

std::vector<Coalition> enumerate_coalitions(std::size_t n) {
  std::vector<Coalition> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back(Coalition{a});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) out.push_back(Coalition{a, b});
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        out.push_back(Coalition{a, b, c});
      }
    }
  }
  return out;
}

GameGraph build_graph(std::span<const PursuerSpec> pursuers,
                      std::span<const EvaderSpec> evaders,
                      const RegionSpec& region,
                      std::span<const std::size_t> evader_ids) {
  if (!evader_ids.empty() && evader_ids.size() != evaders.size()) {
    throw std::invalid_argument("evader id list does not match evaders");
  }
  GameGraph g;
  g.num_pursuers = pursuers.size();
  g.coalitions = enumerate_coalitions(pursuers.size());
  for (std::size_t k = 0; k < evaders.size(); ++k) {
    const std::size_t id = evader_ids.empty() ? k : evader_ids[k];
    g.evaders.push_back(id);
    std::vector<const Coalition*> winners;
    for (std::size_t c = 0; c < g.coalitions.size(); ++c) {
      const Coalition& s = g.coalitions[c];
      // Supersets of a winning coalition are never minimal; skip the solve.
      const bool covered =
          std::any_of(winners.begin(), winners.end(),
                      [&](const Coalition* w) { return w->is_subset_of(s); });
      if (covered) continue;
      GameKind kind;
      try {
        kind = classify_kind(s, evaders[k], pursuers, region);
      } catch (const std::exception& ex) {
        throw GraphBuildError("coalition " + s.to_string() + " vs evader E" +
                                  std::to_string(id) + ": " + ex.what(),
                              s, id);
      }
      if (kind == GameKind::EvaderWins) continue;
      winners.push_back(&s);
      g.edges.push_back({c, id, kind == GameKind::Tie});
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

Matching max_bipartite_matching(std::span<const std::size_t> coalition_ids,
                                std::span<const std::size_t> evader_ids,
                                std::span<const Edge> edges) {
  std::vector<std::size_t> left(coalition_ids.begin(), coalition_ids.end());
  std::vector<std::size_t> right(evader_ids.begin(), evader_ids.end());
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  left.erase(std::unique(left.begin(), left.end()), left.end());
  right.erase(std::unique(right.begin(), right.end()), right.end());
  auto index_of = [](const std::vector<std::size_t>& v, std::size_t x) {
    const auto it = std::lower_bound(v.begin(), v.end(), x);
    return (it != v.end() && *it == x) ? static_cast<int>(it - v.begin()) : -1;
  };

  const int nl = static_cast<int>(left.size());
  const int nr = static_cast<int>(right.size());
  std::vector<std::vector<int>> adj(left.size());
  std::map<std::pair<int, int>, bool> tie;
  for (const Edge& e : edges) {
    const int u = index_of(left, e.coalition);
    const int v = index_of(right, e.evader);
    if (u < 0 || v < 0) continue;
    adj[u].push_back(v);
    tie[{u, v}] = e.tie;
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  constexpr int kFree = -1;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> match_l(nl, kFree), match_r(nr, kFree), dist(nl);

  auto bfs = [&] {
    std::queue<int> q;
    bool found = false;
    for (int u = 0; u < nl; ++u) {
      if (match_l[u] == kFree) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = kInf;
      }
    }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        const int w = match_r[v];
        if (w == kFree) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };
  std::function<bool(int)> dfs = [&](int u) {
    for (int v : adj[u]) {
      const int w = match_r[v];
      if (w == kFree || (dist[w] == dist[u] + 1 && dfs(w))) {
        match_l[u] = v;
        match_r[v] = u;
        return true;
      }
    }
    dist[u] = kInf;
    return false;
  };
  while (bfs()) {
    for (int u = 0; u < nl; ++u) {
      if (match_l[u] == kFree) dfs(u);
    }
  }

  Matching m;
  for (int u = 0; u < nl; ++u) {
    if (match_l[u] != kFree) {
      m.pairs.push_back({left[u], right[match_l[u]], tie[{u, match_l[u]}]});
    }
  }
  m.normalize();
  return m;
}

namespace {

std::uint64_t pursuer_mask(const Coalition& c) {
  std::uint64_t mask = 0;
  for (std::size_t p : c) mask |= std::uint64_t{1} << p;
  return mask;
}

// Branch and bound for the largest conflict-free subset of `edges`. Branches
// per evader (fewest edges first); `ceiling` is a known upper bound that
// stops the search early.
Matching conflict_free_max(const GameGraph& g, const std::vector<Edge>& edges,
                           std::size_t ceiling) {
  if (g.num_pursuers > 64) {
    throw std::invalid_argument("exact search supports at most 64 pursuers");
  }
  std::map<std::size_t, std::vector<const Edge*>> by_evader;
  for (const Edge& e : edges) by_evader[e.evader].push_back(&e);

  struct Slot {
    std::size_t evader;
    std::vector<std::pair<std::uint64_t, const Edge*>> options;
  };
  std::vector<Slot> slots;
  for (auto& [ev, list] : by_evader) {
    Slot s{ev, {}};
    std::sort(list.begin(), list.end(),
              [](const Edge* a, const Edge* b) { return *a < *b; });
    for (const Edge* e : list) {
      s.options.emplace_back(pursuer_mask(g.coalitions.at(e->coalition)), e);
    }
    slots.push_back(std::move(s));
  }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& a, const Slot& b) {
                     return a.options.size() < b.options.size();
                   });

  std::vector<const Edge*> current, best;
  auto reachable = [&](std::size_t from, std::uint64_t used) {
    std::size_t n = 0;
    for (std::size_t k = from; k < slots.size(); ++k) {
      for (const auto& [mask, e] : slots[k].options) {
        if ((mask & used) == 0) {
          ++n;
          break;
        }
      }
    }
    return n;
  };
  std::function<void(std::size_t, std::uint64_t)> search =
      [&](std::size_t k, std::uint64_t used) {
        if (best.size() >= ceiling) return;
        if (current.size() + reachable(k, used) <= best.size()) return;
        if (k == slots.size()) {
          best = current;
          return;
        }
        for (const auto& [mask, e] : slots[k].options) {
          if (mask & used) continue;
          current.push_back(e);
          search(k + 1, used | mask);
          current.pop_back();
        }
        search(k + 1, used);
      };
  search(0, 0);

  Matching m;
  for (const Edge* e : best) m.pairs.push_back(*e);
  m.normalize();
  return m;
}

bool conflict_free(const GameGraph& g, const Matching& m) {
  std::uint64_t used = 0;
  for (const Edge& e : m.pairs) {
    const std::uint64_t mask = pursuer_mask(g.coalitions.at(e.coalition));
    if (mask & used) return false;
    used |= mask;
  }
  return true;
}

// One stage of the sequential algorithm: maximum matching over the edges
// whose coalitions use only `free_pursuers` and have at most `max_size`
// members, restricted to `free_evaders`.
Matching stage_matching(const GameGraph& g, std::size_t max_size,
                        std::uint64_t free_pursuers,
                        const std::set<std::size_t>& free_evaders) {
  std::vector<Edge> stage_edges;
  std::set<std::size_t> left;
  for (const Edge& e : g.edges) {
    const Coalition& c = g.coalitions.at(e.coalition);
    if (c.size() > max_size) continue;
    if ((pursuer_mask(c) & ~free_pursuers) != 0) continue;
    if (!free_evaders.count(e.evader)) continue;
    stage_edges.push_back(e);
    left.insert(e.coalition);
  }
  const std::vector<std::size_t> lv(left.begin(), left.end());
  const std::vector<std::size_t> rv(free_evaders.begin(), free_evaders.end());
  Matching flow = max_bipartite_matching(lv, rv, stage_edges);
  if (conflict_free(g, flow)) return flow;
  return conflict_free_max(g, stage_edges, flow.size());
}

}  // namespace

Matching SequentialMatching::combined() const {
  Matching m;
  for (const Matching* s : {&stage1, &stage2, &stage3}) {
    m.pairs.insert(m.pairs.end(), s->pairs.begin(), s->pairs.end());
  }
  m.normalize();
  return m;
}

SequentialMatching sequential_matching_stages(const GameGraph& graph) {
  if (graph.num_pursuers > 64) {
    throw std::invalid_argument("sequential matching supports <= 64 pursuers");
  }
  std::uint64_t free_pursuers =
      graph.num_pursuers == 64 ? ~std::uint64_t{0}
                               : (std::uint64_t{1} << graph.num_pursuers) - 1;
  std::set<std::size_t> free_evaders(graph.evaders.begin(),
                                     graph.evaders.end());
  SequentialMatching out;
  Matching* stages[] = {&out.stage1, &out.stage2, &out.stage3};
  for (std::size_t k = 1; k <= 3; ++k) {
    *stages[k - 1] = stage_matching(graph, k, free_pursuers, free_evaders);
    for (const Edge& e : stages[k - 1]->pairs) {
      free_pursuers &= ~pursuer_mask(graph.coalitions.at(e.coalition));
      free_evaders.erase(e.evader);
    }
  }
  return out;
}

Matching sequential_matching(const GameGraph& graph) {
  return sequential_matching_stages(graph).combined();
}

Matching exact_mbmc(const GameGraph& graph, const ExactOptions& options) {
  if (graph.edges.size() > options.max_edges) {
    throw SizeGuardError("exact matching refused: " +
                         std::to_string(graph.edges.size()) +
                         " edges exceed the guard of " +
                         std::to_string(options.max_edges));
  }
  std::set<std::size_t> left;
  for (const Edge& e : graph.edges) left.insert(e.coalition);
  const std::vector<std::size_t> lv(left.begin(), left.end());
  const Matching relaxed =
      max_bipartite_matching(lv, graph.evaders, graph.edges);
  return conflict_free_max(graph, graph.edges, relaxed.size());
}

void ThreeDMInstance::validate() const {
  for (const auto& t : triples) {
    for (std::size_t c : t) {
      if (c >= m) throw std::invalid_argument("3DM coordinate out of range");
    }
  }
}

GameGraph reduce_3dm(const ThreeDMInstance& instance) {
  instance.validate();
  GameGraph g;
  g.num_pursuers = 2 * instance.m;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_id;
  for (const auto& [x, y, z] : instance.triples) {
    const auto key = std::make_pair(x, y);
    if (!pair_id.count(key)) {
      pair_id[key] = g.coalitions.size();
      g.coalitions.push_back(Coalition{x, instance.m + y});
    }
  }
  for (std::size_t z = 0; z < instance.m; ++z) g.evaders.push_back(z);
  for (const auto& [x, y, z] : instance.triples) {
    g.edges.push_back({pair_id.at({x, y}), z, false});
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

ThreeDMInstance random_3dm(std::size_t m, std::size_t num_triples,
                           std::mt19937_64& rng) {
  ThreeDMInstance inst;
  inst.m = m;
  if (m == 0) return inst;
  std::uniform_int_distribution<std::size_t> coord(0, m - 1);
  std::set<std::array<std::size_t, 3>> seen;
  const std::size_t cap = std::min(num_triples, m * m * m);
  while (seen.size() < cap) seen.insert({coord(rng), coord(rng), coord(rng)});
  inst.triples.assign(seen.begin(), seen.end());
  return inst;
}

}  // namespace reachavoid
