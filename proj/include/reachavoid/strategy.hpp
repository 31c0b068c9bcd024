#pragma once

#include <span>
#include <stdexcept>

#include "reachavoid/interception.hpp"

namespace reachavoid {

/// Unit heading, or the zero "hold" sentinel when the player already sits on
/// its target.
struct Heading {
  Vec3 direction = Vec3::Zero();

  static Heading hold() { return {}; }
  bool is_hold() const { return direction.isZero(0.0); }
};

inline constexpr double kHoldDistance = 1e-12;

Heading heading_towards(const Vec3& from, const Vec3& target);

// Pursuers of the reduced coalition head straight for the interception point.
Heading pursuer_heading(const Vec3& pursuer_position,
                        const Vec3& interception_point);

// The evader's saddle-point reply: head for the same interception point.
Heading evader_optimal_heading(const Vec3& evader_position,
                               const Vec3& interception_point);

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Game-of-degree value: the lowest z of the evasion-space closure. Only
/// defined when the coalition strictly wins; coalitions larger than three
/// are reduced first.
double value_function(const Coalition& coalition, const EvaderSpec& evader,
                      std::span<const PursuerSpec> pursuers,
                      const RegionSpec& region = RegionSpec::unbounded());

}  // namespace reachavoid
