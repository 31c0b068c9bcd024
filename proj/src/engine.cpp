#include "reachavoid/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace reachavoid {

std::string to_string(EvaderPolicy p) {
  switch (p) {
    case EvaderPolicy::Optimal:
      return "optimal";
    case EvaderPolicy::Straight:
      return "straight";
    case EvaderPolicy::RandomWalk:
      return "random-walk";
  }
  return "?";
}

std::string to_string(PursuerPolicy p) {
  return p == PursuerPolicy::Hold ? "hold" : "nearest";
}

std::string to_string(MatcherKind m) {
  return m == MatcherKind::Exact ? "exact" : "sma";
}

EvaderPolicy parse_evader_policy(const std::string& s) {
  if (s == "optimal") return EvaderPolicy::Optimal;
  if (s == "straight") return EvaderPolicy::Straight;
  if (s == "random-walk") return EvaderPolicy::RandomWalk;
  throw std::invalid_argument("unknown evader policy '" + s + "'");
}

PursuerPolicy parse_pursuer_policy(const std::string& s) {
  if (s == "nearest") return PursuerPolicy::NearestPursuit;
  if (s == "hold") return PursuerPolicy::Hold;
  throw std::invalid_argument("unknown pursuer policy '" + s + "'");
}

MatcherKind parse_matcher(const std::string& s) {
  if (s == "sma") return MatcherKind::Sequential;
  if (s == "exact") return MatcherKind::Exact;
  throw std::invalid_argument("unknown matcher '" + s + "'");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Captured:
      return "Captured";
    case EventKind::ReachedGoal:
      return "ReachedGoal";
    case EventKind::Escaped:
      return "Escaped";
  }
  return "?";
}

void Scenario::validate() const {
  auto finite = [](const Vec3& v) { return v.allFinite(); };
  const std::size_t np = pursuers.size();
  const std::size_t ne = evaders.size();
  if (evader_policies.size() != ne) {
    throw ScenarioError("evaders", "one policy per evader is required");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ScenarioError("dt", "must be > 0");
  if (!(max_time >= 0.0)) throw ScenarioError("max_time", "must be >= 0");
  if (rematch_every < 1) throw ScenarioError("rematch_every", "must be >= 1");
  if (!(capture_tolerance >= 0.0)) {
    throw ScenarioError("capture_tolerance", "must be >= 0");
  }
  if (np > 64) throw ScenarioError("pursuers", "at most 64 pursuers");
  for (std::size_t i = 0; i < np; ++i) {
    const std::string f = "pursuers[" + std::to_string(i) + "]";
    const PursuerSpec& p = pursuers[i];
    if (!finite(p.position)) throw ScenarioError(f + ".pos", "not finite");
    if (!(p.speed > 0.0)) throw ScenarioError(f + ".speed", "must be > 0");
    if (!(p.capture_radius >= 0.0)) {
      throw ScenarioError(f + ".radius", "must be >= 0");
    }
    for (std::size_t k = 0; k < i; ++k) {
      if ((pursuers[k].position - p.position).norm() == 0.0) {
        throw ScenarioError(f + ".pos", "coincides with pursuers[" +
                                            std::to_string(k) + "]");
      }
    }
    if (region.bounded() && !(region.g(p.position) > 0.0 &&
                              p.position.z() >= 0.0)) {
      throw ScenarioError(f + ".pos", "outside the bounded play region");
    }
  }
  for (std::size_t j = 0; j < ne; ++j) {
    const std::string f = "evaders[" + std::to_string(j) + "]";
    const EvaderSpec& e = evaders[j];
    if (!finite(e.position)) throw ScenarioError(f + ".pos", "not finite");
    if (!(e.speed > 0.0)) throw ScenarioError(f + ".speed", "must be > 0");
    for (std::size_t k = 0; k < j; ++k) {
      if ((evaders[k].position - e.position).norm() == 0.0) {
        throw ScenarioError(f + ".pos", "coincides with evaders[" +
                                            std::to_string(k) + "]");
      }
    }
    if (!(e.position.z() > 0.0)) {
      throw ScenarioError(f + ".pos", "evader must start in the play region "
                                      "(z > 0)");
    }
    if (region.bounded() && !(region.g(e.position) > 0.0)) {
      throw ScenarioError(f + ".pos", "outside the bounded play region");
    }
    for (std::size_t i = 0; i < np; ++i) {
      const PursuerSpec& p = pursuers[i];
      if (!(p.speed > e.speed)) {
        throw ScenarioError(f + ".speed", "pursuers[" + std::to_string(i) +
                                              "] must be strictly faster");
      }
      if (!((e.position - p.position).norm() > p.capture_radius)) {
        throw ScenarioError(f + ".pos", "starts inside the capture ball of "
                                        "pursuers[" +
                                            std::to_string(i) + "]");
      }
    }
  }
}

std::vector<Vec3> step(std::span<const Vec3> positions,
                       std::span<const Heading> headings,
                       std::span<const double> speeds, double dt) {
  if (positions.size() != headings.size() || positions.size() != speeds.size()) {
    throw std::invalid_argument("step: mismatched player arrays");
  }
  std::vector<Vec3> out(positions.begin(), positions.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!headings[k].is_hold()) {
      out[k] += speeds[k] * dt * headings[k].direction;
    }
  }
  return out;
}

namespace {

// Earliest s in [0, 1] with |d0 + s (d1 - d0)| <= radius.
std::optional<double> first_contact(const Vec3& d0, const Vec3& d1,
                                    double radius) {
  const double c = d0.squaredNorm() - radius * radius;
  if (c <= 0.0) return 0.0;
  const Vec3 delta = d1 - d0;
  const double a = delta.squaredNorm();
  const double b = d0.dot(delta);
  // Outside and not closing in.
  if (a == 0.0 || b >= 0.0) return std::nullopt;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  // Smaller root of a s^2 + 2 b s + c, in the cancellation-free form.
  const double s = c / (-b + std::sqrt(disc));
  if (s > 1.0) return std::nullopt;
  return s;
}

}  // namespace

std::vector<Event> capture_check(const FrameMotion& motion,
                                 std::span<const PursuerSpec> pursuers,
                                 const std::vector<bool>& live,
                                 const RegionSpec& region, double t0, double dt,
                                 double capture_tolerance) {
  std::vector<Event> events;
  for (std::size_t j = 0; j < live.size(); ++j) {
    if (!live[j]) continue;
    const Vec3& e0 = motion.evaders_before[j];
    const Vec3& e1 = motion.evaders_after[j];

    std::optional<double> capture;
    std::size_t by = 0;
    for (std::size_t i = 0; i < pursuers.size(); ++i) {
      const auto s = first_contact(e0 - motion.pursuers_before[i],
                                   e1 - motion.pursuers_after[i],
                                   pursuers[i].capture_radius +
                                       capture_tolerance);
      if (s && (!capture || *s < *capture)) {
        capture = s;
        by = i;
      }
    }

    std::optional<double> crossing;
    if (e0.z() > 0.0 && e1.z() <= 0.0) {
      const double s = e0.z() / (e0.z() - e1.z());
      Vec3 at = e0 + s * (e1 - e0);
      at.z() = 0.0;
      if (!region.bounded() || region.g(at) >= 0.0) crossing = s;
    }

    if (capture && (!crossing || *capture <= *crossing)) {
      events.push_back({t0 + *capture * dt, EventKind::Captured, j, by,
                        e0 + *capture * (e1 - e0), *capture});
    } else if (crossing) {
      events.push_back({t0 + *crossing * dt,
                        region.bounded() ? EventKind::Escaped
                                         : EventKind::ReachedGoal,
                        j, std::nullopt, e0 + *crossing * (e1 - e0),
                        *crossing});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) {
                     return a.fraction < b.fraction;
                   });
  return events;
}

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Vec3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-9) return v / len;
  }
}

Vec3 closest_exit_point(const RegionSpec& region, const Vec3& x) {
  Vec3 q(x.x(), x.y(), 0.0);
  if (!region.bounded()) return q;
  const Vec3 c(region.center.x(), region.center.y(), 0.0);
  const double disk = region.exit_disk_radius();
  const Vec3 off = q - c;
  const double n = off.norm();
  if (n > disk) q = c + off * (disk / n);
  return q;
}

class Game {
 public:
  explicit Game(const Scenario& sc)
      : sc_(sc),
        rng_(sc.seed),
        pursuers_(sc.pursuers),
        evaders_(sc.evaders),
        live_(sc.evaders.size(), true) {}

  Trace play() {
    if (evaders_.empty()) return {};
    std::size_t frame = 0;
    double t = 0.0;
    try {
      while (any_live() && t < sc_.max_time - 1e-12 * sc_.dt) {
        if (frame % static_cast<std::size_t>(sc_.rematch_every) == 0) {
          rematch();
        }
        advance(t);
        ++frame;
        t = static_cast<double>(frame) * sc_.dt;
      }
    } catch (const std::exception& ex) {
      finish(t);
      throw EngineError(std::string("frame ") + std::to_string(frame) +
                            " (t=" + std::to_string(t) + "): " + ex.what(),
                        frame, t, std::move(trace_));
    }
    finish(t);
    return std::move(trace_);
  }

 private:
  bool any_live() const {
    return std::find(live_.begin(), live_.end(), true) != live_.end();
  }

  void rematch() {
    std::vector<EvaderSpec> live_evaders;
    std::vector<std::size_t> ids;
    for (std::size_t j = 0; j < evaders_.size(); ++j) {
      if (live_[j]) {
        live_evaders.push_back(evaders_[j]);
        ids.push_back(j);
      }
    }
    const GameGraph g = build_graph(pursuers_, live_evaders, sc_.region, ids);
    Matching m;
    if (sc_.matcher == MatcherKind::Exact &&
        g.edges.size() <= sc_.exact_max_edges) {
      m = exact_mbmc(g, {sc_.exact_max_edges});
    } else {
      m = sequential_matching(g);
    }
    std::erase_if(adopted_, [&](const AdoptedPair& p) { return !live_[p.evader]; });
    if (m.size() > adopted_.size() || capture_flag_) {
      adopted_.clear();
      for (const Edge& e : m.pairs) {
        adopted_.push_back({g.coalitions[e.coalition], e.evader, e.tie});
      }
      capture_flag_ = false;
    }
  }

  void advance(double t) {
    const std::size_t np = pursuers_.size();
    const std::size_t ne = evaders_.size();
    std::vector<Heading> ph(np, Heading::hold());
    std::vector<Heading> eh(ne, Heading::hold());
    std::vector<bool> pursuer_assigned(np, false);
    std::vector<std::optional<Vec3>> evader_target(ne);

    Frame fr;
    fr.time = t;
    for (const AdoptedPair& pair : adopted_) {
      const EvaderSpec& ev = evaders_[pair.evader];
      const Coalition s1 =
          reduce_coalition(pair.coalition, ev, pursuers_, sc_.region);
      const InterceptionResult ir =
          solve_interception(s1, ev, pursuers_, sc_.region);
      for (std::size_t i : pair.coalition) {
        ph[i] = pursuer_heading(pursuers_[i].position, ir.point);
        pursuer_assigned[i] = true;
      }
      evader_target[pair.evader] = ir.point;
      fr.interception_values.push_back(ir.value);
    }
    for (std::size_t i = 0; i < np; ++i) {
      if (!pursuer_assigned[i]) ph[i] = unmatched_pursuer(i);
    }
    for (std::size_t j = 0; j < ne; ++j) {
      if (live_[j]) eh[j] = evader_heading(j, evader_target[j]);
    }

    std::vector<Vec3> pb, eb;
    std::vector<double> ps, es;
    for (const auto& p : pursuers_) {
      pb.push_back(p.position);
      ps.push_back(p.speed);
    }
    for (const auto& e : evaders_) {
      eb.push_back(e.position);
      es.push_back(e.speed);
    }
    fr.pursuers = pb;
    fr.evaders = eb;
    fr.evader_live = live_;
    fr.adopted = adopted_;
    for (const auto& h : ph) fr.pursuer_headings.push_back(h.direction);
    for (const auto& h : eh) fr.evader_headings.push_back(h.direction);
    trace_.frames.push_back(std::move(fr));

    const std::vector<Vec3> pa = step(pb, ph, ps, sc_.dt);
    const std::vector<Vec3> ea = step(eb, eh, es, sc_.dt);
    const auto events =
        capture_check({pb, pa, eb, ea}, sc_.pursuers, live_, sc_.region, t,
                      sc_.dt, sc_.capture_tolerance);

    for (std::size_t i = 0; i < np; ++i) pursuers_[i].position = pa[i];
    for (std::size_t j = 0; j < ne; ++j) {
      if (live_[j]) evaders_[j].position = ea[j];
    }
    for (const Event& ev : events) {
      live_[ev.evader] = false;
      evaders_[ev.evader].position = ev.position;
      if (ev.kind == EventKind::Captured) {
        capture_flag_ = true;
        ++trace_.summary.captured;
      } else {
        ++trace_.summary.escaped;
      }
      trace_.events.push_back(ev);
    }
  }

  Heading unmatched_pursuer(std::size_t i) const {
    if (sc_.unmatched_pursuer_policy == PursuerPolicy::Hold) {
      return Heading::hold();
    }
    const Vec3& p = pursuers_[i].position;
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < evaders_.size(); ++j) {
      if (!live_[j]) continue;
      const double d = (evaders_[j].position - p).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (!best) return Heading::hold();
    return heading_towards(p, evaders_[*best].position);
  }

  Heading evader_heading(std::size_t j, const std::optional<Vec3>& target) {
    const Vec3& x = evaders_[j].position;
    switch (sc_.evader_policies[j]) {
      case EvaderPolicy::Optimal:
        if (target) return evader_optimal_heading(x, *target);
        return heading_towards(x, closest_exit_point(sc_.region, x));
      case EvaderPolicy::Straight:
        return heading_towards(x, closest_exit_point(sc_.region, x));
      case EvaderPolicy::RandomWalk: {
        const double reach = evaders_[j].speed * sc_.dt;
        for (int attempt = 0; attempt < 16; ++attempt) {
          const Vec3 u = random_unit(rng_);
          if (!sc_.region.bounded() || sc_.region.g(x + reach * u) > 0.0) {
            return {u};
          }
        }
        return heading_towards(x, sc_.region.center);
      }
    }
    return Heading::hold();
  }

  void finish(double t) {
    Frame fr;
    fr.time = t;
    for (const auto& p : pursuers_) {
      fr.pursuers.push_back(p.position);
      fr.pursuer_headings.push_back(Vec3::Zero());
    }
    for (const auto& e : evaders_) {
      fr.evaders.push_back(e.position);
      fr.evader_headings.push_back(Vec3::Zero());
    }
    fr.evader_live = live_;
    fr.adopted = adopted_;
    std::erase_if(fr.adopted,
                  [&](const AdoptedPair& p) { return !live_[p.evader]; });
    if (trace_.frames.empty() || trace_.frames.back().time < t) {
      trace_.frames.push_back(std::move(fr));
    }
    trace_.summary.remaining = static_cast<std::size_t>(
        std::count(live_.begin(), live_.end(), true));
  }

  const Scenario& sc_;
  std::mt19937_64 rng_;
  std::vector<PursuerSpec> pursuers_;
  std::vector<EvaderSpec> evaders_;
  std::vector<bool> live_;
  std::vector<AdoptedPair> adopted_;
  bool capture_flag_ = false;
  Trace trace_;
};

}  // namespace

Trace run(const Scenario& scenario) {
  scenario.validate();
  return Game(scenario).play();
}

}  // namespace reachavoid

namespace reachavoid {

Scenario random_scenario(const RandomScenarioOptions& options,
                         std::mt19937_64& rng) {
  using Uniform = std::uniform_real_distribution<double>;
  auto count = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  Scenario sc;
  sc.dt = options.dt;
  sc.max_time = options.max_time;
  sc.seed = rng();
  if (options.bounded) sc.region = RegionSpec::ball(Vec3(0, 0, 1), 7.0);

  auto draw = [&](double zlo, double zhi) {
    for (;;) {
      Vec3 x(Uniform(-3, 3)(rng), Uniform(-3, 3)(rng), Uniform(zlo, zhi)(rng));
      if (!sc.region.bounded() || sc.region.g(x) > 0.25) return x;
    }
  };

  const std::size_t np = count(options.min_pursuers, options.max_pursuers);
  const std::size_t ne = count(options.min_evaders, options.max_evaders);
  for (std::size_t i = 0; i < np; ++i) {
    PursuerSpec p;
    p.position = draw(0.3, 3.0);
    p.speed = Uniform(1.05, 1.5)(rng);
    p.capture_radius = Uniform(0.05, 0.3)(rng);
    sc.pursuers.push_back(p);
  }
  std::uniform_int_distribution<std::size_t> pick(0,
                                                  options.policies.size() - 1);
  while (sc.evaders.size() < ne) {
    EvaderSpec e;
    e.position = draw(1.5, 5.0);
    e.speed = 1.0;
    bool clear = true;
    for (const auto& p : sc.pursuers) {
      if ((p.position - e.position).norm() <= p.capture_radius + 0.2) {
        clear = false;
      }
    }
    if (!clear) continue;
    sc.evaders.push_back(e);
    sc.evader_policies.push_back(options.policies[pick(rng)]);
  }
  sc.validate();
  return sc;
}

}  // namespace reachavoid
