#pragma once

// Random generators and independent reference computations shared by the
// unit and acceptance tests. The reference computations never call the
// library's solvers or matchers, so agreement is a genuine cross-check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "reachavoid/geometry.hpp"
#include "reachavoid/matching.hpp"

namespace testsupport {

using reachavoid::Coalition;
using reachavoid::Edge;
using reachavoid::EvaderSpec;
using reachavoid::GameGraph;
using reachavoid::PursuerSpec;
using reachavoid::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

struct Pose {
  EvaderSpec evader;
  std::vector<PursuerSpec> pursuers;
};

// Evader near the middle, k pursuers scattered around it with speed ratios
// in [1.1, 3] and the evader clear of every capture ball.
inline Pose random_pose(std::mt19937_64& rng, std::size_t k) {
  Pose pose;
  pose.evader.position =
      Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 1, 4));
  pose.evader.speed = uniform(rng, 0.5, 1.5);
  while (pose.pursuers.size() < k) {
    PursuerSpec p;
    const double d = uniform(rng, 0.5, 4.0);
    p.position = pose.evader.position + d * unit_vector(rng);
    p.speed = pose.evader.speed * uniform(rng, 1.1, 3.0);
    p.capture_radius = uniform(rng, 0.0, 0.4) * d;
    pose.pursuers.push_back(p);
  }
  return pose;
}

// f(x) written out independently of the library.
inline double race(const PursuerSpec& p, const EvaderSpec& e, const Vec3& x) {
  const double alpha = p.speed / e.speed;
  return (x - p.position).norm() - alpha * (x - e.position).norm() -
         p.capture_radius;
}

// Boundary distance along unit e by bisection on f; f > 0 near the evader
// and f -> -inf far away.
inline double bisect_radius(const PursuerSpec& p, const EvaderSpec& ev,
                            const Vec3& e) {
  double lo = 0.0;
  double hi = 1.0;
  while (race(p, ev, ev.position + hi * e) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (race(p, ev, ev.position + mid * e) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Lowest z of the coalition's evasion space over the unbounded half-space,
// by direct search over directions. The evasion space is an intersection of
// convex sets containing the evader, so it is star-shaped from there.
// An optional ball (centre, radius) containing the evader clips the rays.
inline double lowest_z_by_search(const Coalition& c, const EvaderSpec& ev,
                                 const std::vector<PursuerSpec>& ps,
                                 const Vec3* ball_center = nullptr,
                                 double ball_radius = 0.0) {
  auto z_at = [&](double th, double psi) {
    const Vec3 e(std::cos(psi) * std::cos(th), std::cos(psi) * std::sin(th),
                 std::sin(psi));
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t i : c) rho = std::min(rho, bisect_radius(ps[i], ev, e));
    if (ball_center) {
      // |ev + s e - c| = R, positive root.
      const Vec3 d = ev.position - *ball_center;
      const double b = d.dot(e);
      const double s = -b + std::sqrt(b * b - d.squaredNorm() +
                                      ball_radius * ball_radius);
      rho = std::min(rho, s);
    }
    return ev.position.z() + rho * e.z();
  };
  constexpr double pi = std::numbers::pi;
  double best = std::numeric_limits<double>::infinity();
  double bt = 0.0;
  double bp = -pi / 2;
  for (int i = 0; i < 72; ++i) {
    for (int j = 0; j <= 36; ++j) {
      const double th = 2 * pi * i / 72.0;
      const double psi = -pi / 2 + (pi / 2) * j / 36.0;
      const double z = z_at(th, psi);
      if (z < best) {
        best = z;
        bt = th;
        bp = psi;
      }
    }
  }
  // Pattern search polling the compass directions and then random ones;
  // the random polls find the narrow descent cones along ridges where two
  // boundaries meet.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  // A few restarts from the incumbent shake it off ridges it stalled on.
  for (int round = 0; round < 4; ++round) {
    double step = 2 * pi / 72.0;
    while (step > 1e-11) {
      bool moved = false;
      for (int k = 0; k < 8 + 256 && !moved; ++k) {
        const double a = k < 8 ? k * pi / 4 : angle(rng);
        const double th = bt + step * std::cos(a);
        const double psi = std::clamp(bp + step * std::sin(a), -pi / 2, pi / 2);
        const double z = z_at(th, psi);
        if (z < best) {
          best = z;
          bt = th;
          bp = psi;
          moved = true;
        }
      }
      if (!moved) step *= 0.5;
    }
  }
  return best;
}

// Pose whose interception point I sits directly below the evader with all
// three pursuers active: each P_i lies on the ray from I along -u_i at the
// distance that puts I on its boundary, and the horizontal parts of the u_i
// surround the vertical so that e_z is inside the cone of the gradients.
inline Pose triple_pose(std::mt19937_64& rng) {
  constexpr double pi = std::numbers::pi;
  Pose pose;
  pose.evader.position =
      Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 2, 4));
  pose.evader.speed = 1.0;
  const double rho = uniform(rng, 0.5, 1.5);
  const Vec3 I = pose.evader.position - rho * Vec3::UnitZ();
  const double base = uniform(rng, 0, 2 * pi);
  for (int k = 0; k < 3; ++k) {
    const double phi = base + 2 * pi * k / 3.0 + uniform(rng, -0.4, 0.4);
    const double tilt = uniform(rng, -0.6, 0.6);
    const Vec3 u = Vec3(std::cos(tilt) * std::cos(phi),
                        std::cos(tilt) * std::sin(phi), std::sin(tilt));
    PursuerSpec p;
    p.speed = uniform(rng, 1.2, 2.5);
    p.capture_radius = uniform(rng, 0.0, 0.3);
    p.position = I - (p.speed * rho + p.capture_radius) * u;
    pose.pursuers.push_back(p);
  }
  return pose;
}

// ---- matching references ---------------------------------------------------

inline std::uint64_t mask_of(const Coalition& c) {
  std::uint64_t m = 0;
  for (std::size_t i : c) m |= std::uint64_t{1} << i;
  return m;
}

// Exhaustive maximum conflict-free matching: every evader picks one of its
// edges or nothing.
inline std::size_t brute_force_mbmc(const GameGraph& g) {
  std::vector<std::vector<const Edge*>> by_evader(g.evaders.size());
  for (const Edge& e : g.edges) {
    const auto it = std::find(g.evaders.begin(), g.evaders.end(), e.evader);
    by_evader[it - g.evaders.begin()].push_back(&e);
  }
  std::size_t best = 0;
  std::function<void(std::size_t, std::uint64_t, std::size_t)> rec =
      [&](std::size_t j, std::uint64_t used, std::size_t size) {
        if (j == by_evader.size()) {
          best = std::max(best, size);
          return;
        }
        rec(j + 1, used, size);
        for (const Edge* e : by_evader[j]) {
          const std::uint64_t m = mask_of(g.coalitions[e->coalition]);
          if ((m & used) == 0) rec(j + 1, used | m, size + 1);
        }
      };
  rec(0, 0, 0);
  return best;
}

// Exhaustive plain bipartite matching (no conflict rule).
inline std::size_t brute_force_bipartite(std::size_t num_left,
                                         const std::vector<Edge>& edges,
                                         std::size_t num_right) {
  std::vector<std::vector<std::size_t>> adj(num_left);
  for (const Edge& e : edges) adj[e.coalition].push_back(e.evader);
  std::vector<bool> used(num_right, false);
  std::size_t best = 0;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t u,
                                                           std::size_t size) {
    if (size + (num_left - u) <= best) return;
    if (u == num_left) {
      best = std::max(best, size);
      return;
    }
    rec(u + 1, size);
    for (std::size_t v : adj[u]) {
      if (used[v]) continue;
      used[v] = true;
      rec(u + 1, size + 1);
      used[v] = false;
    }
  };
  rec(0, 0);
  return best;
}

// Largest set of pairwise disjoint triples.
inline std::size_t brute_force_3dm(
    std::size_t m, const std::vector<std::array<std::size_t, 3>>& triples) {
  std::size_t best = 0;
  std::vector<bool> ux(m), uy(m), uz(m);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k,
                                                           std::size_t size) {
    best = std::max(best, size);
    if (k == triples.size() || size + (triples.size() - k) <= best) return;
    const auto& t = triples[k];
    if (!ux[t[0]] && !uy[t[1]] && !uz[t[2]]) {
      ux[t[0]] = uy[t[1]] = uz[t[2]] = true;
      rec(k + 1, size + 1);
      ux[t[0]] = uy[t[1]] = uz[t[2]] = false;
    }
    rec(k + 1, size);
  };
  rec(0, 0);
  return best;
}

// Random abstract game graph over up to `max_p` pursuers and `max_e`
// evaders. Respects edge minimality: an evader never gets both a coalition
// and one of its proper subsets.
inline GameGraph random_graph(std::mt19937_64& rng, std::size_t max_p,
                              std::size_t max_e, double density) {
  GameGraph g;
  g.num_pursuers = std::uniform_int_distribution<std::size_t>(1, max_p)(rng);
  g.coalitions = reachavoid::enumerate_coalitions(g.num_pursuers);
  const std::size_t ne =
      std::uniform_int_distribution<std::size_t>(1, max_e)(rng);
  for (std::size_t j = 0; j < ne; ++j) g.evaders.push_back(j);
  std::bernoulli_distribution coin(density);
  for (std::size_t j = 0; j < ne; ++j) {
    std::vector<std::size_t> chosen;
    // Random order; keep a coalition only if it is incomparable with every
    // one already kept.
    std::vector<std::size_t> order(g.coalitions.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t c : order) {
      if (!coin(rng)) continue;
      bool comparable = false;
      for (std::size_t d : chosen) {
        if (g.coalitions[c].is_subset_of(g.coalitions[d]) ||
            g.coalitions[d].is_subset_of(g.coalitions[c])) {
          comparable = true;
        }
      }
      if (!comparable) chosen.push_back(c);
    }
    for (std::size_t c : chosen) g.edges.push_back({c, j, false});
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace testsupport
