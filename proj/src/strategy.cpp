#include "reachavoid/strategy.hpp"

namespace reachavoid {

Heading heading_towards(const Vec3& from, const Vec3& target) {
  const Vec3 d = target - from;
  const double n = d.norm();
  if (n <= kHoldDistance) return Heading::hold();
  return {d / n};
}

Heading pursuer_heading(const Vec3& pursuer_position,
                        const Vec3& interception_point) {
  return heading_towards(pursuer_position, interception_point);
}

Heading evader_optimal_heading(const Vec3& evader_position,
                               const Vec3& interception_point) {
  return heading_towards(evader_position, interception_point);
}

double value_function(const Coalition& coalition, const EvaderSpec& evader,
                      std::span<const PursuerSpec> pursuers,
                      const RegionSpec& region) {
  Coalition s = coalition;
  if (s.size() > Coalition::kMaxMatchable) {
    s = reduce_coalition(coalition, evader, pursuers, region);
  }
  const KindResult k = classify(s, evader, pursuers, region);
  if (k.kind != GameKind::PursuitWins) {
    throw PreconditionError("value function needs a winning coalition, got " +
                            to_string(k.kind));
  }
  return k.interception.value;
}

}  // namespace reachavoid
