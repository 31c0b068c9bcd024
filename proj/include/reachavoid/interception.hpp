#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachavoid/coalition.hpp"
#include "reachavoid/geometry.hpp"

namespace reachavoid {

/// Play region. Unbounded: play space z > 0, goal z <= 0. BoundedBall: play
/// space {z >= 0, g >= 0} with g(x) = R^2 - |x - c|^2 and exit disk on z = 0.
struct RegionSpec {
  enum class Kind { UnboundedHalfspace, BoundedBall };

  Kind kind = Kind::UnboundedHalfspace;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;

  static RegionSpec unbounded() { return {}; }
  static RegionSpec ball(const Vec3& center, double radius);

  bool bounded() const { return kind == Kind::BoundedBall; }
  double g(const Vec3& x) const;
  Vec3 g_gradient(const Vec3& x) const;
  // Radius of the exit disk {z = 0} ∩ ball; zero for the unbounded region.
  double exit_disk_radius() const;
  bool contains(const Vec3& x) const;
};

enum class SolveStatus { Solved, Infeasible, EvasionReachesGoal };

struct InterceptionResult {
  Vec3 point = Vec3::Zero();
  double value = 0.0;
  std::vector<std::size_t> active_set;  // pursuer indices
  bool region_active = false;
  // Aligned with the coalition members; non-positive.
  std::vector<double> multipliers;
  double region_multiplier = 0.0;
  SolveStatus status = SolveStatus::Solved;
  int newton_iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterceptionOptions {
  // Strictly feasible starting point; the solver picks one below the evader
  // when absent.
  std::optional<Vec3> warm_start;
  double initial_t = 1.0;
  double t_growth = 10.0;
  double gap_tolerance = 1e-10;
  double newton_tolerance = 1e-12;
  int max_newton_iterations = 400;
};

inline constexpr double kActiveTolerance = 1e-7;
inline constexpr double kKindTolerance = 1e-7;

InterceptionResult solve_interception(const Coalition& coalition,
                                      const EvaderSpec& evader,
                                      std::span<const PursuerSpec> pursuers,
                                      const RegionSpec& region,
                                      const InterceptionOptions& options = {});

struct KktResiduals {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;  // max positive multiplier
};

KktResiduals kkt_residuals(const InterceptionResult& result,
                           const Coalition& coalition,
                           const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region);

class CoplanarError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Points common to the three boundary surfaces of a triple, from the real
/// positive roots of the quartic in rho. Throws CoplanarError when the
/// evader and the three pursuers are (numerically) coplanar.
std::vector<Vec3> triple_candidates(const Coalition& coalition,
                                    const EvaderSpec& evader,
                                    std::span<const PursuerSpec> pursuers);

bool coplanar(const Coalition& coalition, const EvaderSpec& evader,
              std::span<const PursuerSpec> pursuers);

/// Smallest subcoalition (at most three members) with the same interception
/// point.
Coalition reduce_coalition(const Coalition& coalition, const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region);

Coalition reduce_coalition(const Coalition& coalition, const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region,
                           const InterceptionResult& solved);

enum class GameKind { PursuitWins, Tie, EvaderWins };

std::string to_string(GameKind kind);

struct KindResult {
  GameKind kind = GameKind::EvaderWins;
  InterceptionResult interception;
  // Set for bounded-region EvaderWins: a point of the evasion-space closure
  // on the exit disk.
  std::optional<Vec3> exit_witness;
};

KindResult classify(const Coalition& coalition, const EvaderSpec& evader,
                    std::span<const PursuerSpec> pursuers,
                    const RegionSpec& region);

GameKind classify_kind(const Coalition& coalition, const EvaderSpec& evader,
                       std::span<const PursuerSpec> pursuers,
                       const RegionSpec& region);

}  // namespace reachavoid
