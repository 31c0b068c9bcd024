#pragma once

// Discrete-time receding-horizon game loop. Each frame rematches, keeping the
// adopted matching unless a strictly larger one appears or a capture
// happened. Matched pursuers steer at their coalition's interception point;
// captures and goal arrivals are located inside the frame.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachavoid/matching.hpp"
#include "reachavoid/strategy.hpp"

namespace reachavoid {

enum class EvaderPolicy { Optimal, Straight, RandomWalk };
enum class PursuerPolicy { NearestPursuit, Hold };
enum class MatcherKind { Sequential, Exact };

std::string to_string(EvaderPolicy p);
std::string to_string(PursuerPolicy p);
std::string to_string(MatcherKind m);
EvaderPolicy parse_evader_policy(const std::string& s);
PursuerPolicy parse_pursuer_policy(const std::string& s);
MatcherKind parse_matcher(const std::string& s);

struct Scenario {
  std::vector<PursuerSpec> pursuers;
  std::vector<EvaderSpec> evaders;
  std::vector<EvaderPolicy> evader_policies;  // one per evader
  RegionSpec region;
  double dt = 0.01;
  double max_time = 20.0;
  std::uint64_t seed = 0;
  MatcherKind matcher = MatcherKind::Sequential;
  PursuerPolicy unmatched_pursuer_policy = PursuerPolicy::NearestPursuit;
  int rematch_every = 1;
  double capture_tolerance = 1e-6;
  std::size_t exact_max_edges = 64;

  // Throws ScenarioError naming the offending field.
  void validate() const;
};

class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field(field) {}
  std::string field;
};

enum class EventKind { Captured, ReachedGoal, Escaped };
std::string to_string(EventKind k);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Captured;
  std::size_t evader = 0;
  std::optional<std::size_t> pursuer;
  Vec3 position = Vec3::Zero();
  double fraction = 0.0;  // position inside the frame, in [0, 1]
};

struct AdoptedPair {
  Coalition coalition;
  std::size_t evader = 0;
  bool tie = false;
};

struct Frame {
  double time = 0.0;
  std::vector<Vec3> pursuers;
  std::vector<Vec3> evaders;
  std::vector<bool> evader_live;
  std::vector<AdoptedPair> adopted;
  std::vector<Vec3> pursuer_headings;  // zero vector = hold
  std::vector<Vec3> evader_headings;
  // Interception value of each adopted pair (same order as `adopted`).
  std::vector<double> interception_values;
};

struct Summary {
  std::size_t captured = 0;
  std::size_t escaped = 0;
  std::size_t remaining = 0;
};

struct Trace {
  std::vector<Frame> frames;
  std::vector<Event> events;
  Summary summary;
};

class EngineError : public std::runtime_error {
 public:
  EngineError(const std::string& what, std::size_t frame, double time,
              Trace partial)
      : std::runtime_error(what),
        frame(frame),
        time(time),
        partial(std::move(partial)) {}
  std::size_t frame;
  double time;
  Trace partial;
};

/// x <- x + v u dt for every player; a hold heading leaves x unchanged.
std::vector<Vec3> step(std::span<const Vec3> positions,
                       std::span<const Heading> headings,
                       std::span<const double> speeds, double dt);

struct FrameMotion {
  std::span<const Vec3> pursuers_before;
  std::span<const Vec3> pursuers_after;
  std::span<const Vec3> evaders_before;
  std::span<const Vec3> evaders_after;
};

/// Terminal events within one frame for the evaders flagged in `live`.
/// Straight-line motion is interpolated; per evader the earliest of capture
/// (distance <= r + tolerance, lowest pursuer index on ties) and goal/exit
/// crossing wins, capture taking equal times.
std::vector<Event> capture_check(const FrameMotion& motion,
                                 std::span<const PursuerSpec> pursuers,
                                 const std::vector<bool>& live,
                                 const RegionSpec& region, double t0, double dt,
                                 double capture_tolerance = 1e-6);

Trace run(const Scenario& scenario);

struct RandomScenarioOptions {
  std::size_t min_pursuers = 1;
  std::size_t max_pursuers = 5;
  std::size_t min_evaders = 1;
  std::size_t max_evaders = 5;
  bool bounded = false;
  // Each evader draws its policy uniformly from this list.
  std::vector<EvaderPolicy> policies = {EvaderPolicy::Optimal,
                                        EvaderPolicy::Straight,
                                        EvaderPolicy::RandomWalk};
  double dt = 0.01;
  double max_time = 20.0;
};

/// Valid random deployment with the evaders above the pursuers on average.
/// Every pursuer is faster than every evader.
Scenario random_scenario(const RandomScenarioOptions& options,
                         std::mt19937_64& rng);

}  // namespace reachavoid
