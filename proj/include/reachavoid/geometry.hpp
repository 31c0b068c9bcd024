#pragma once

// Evasion-space primitives for one pursuer/evader pair: the potential
// f(x) = |x - xP| - alpha |x - xE| - r, its gradient, the boundary radius in
// evader-centred polar coordinates, and curvature of planar cross-sections.

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachavoid/coalition.hpp"

namespace reachavoid {

using Vec3 = Eigen::Vector3d;

struct PursuerSpec {
  Vec3 position = Vec3::Zero();
  double speed = 1.0;
  double capture_radius = 0.0;
};

struct EvaderSpec {
  Vec3 position = Vec3::Zero();
  double speed = 1.0;
};

// theta selects the cross-section plane, psi walks around it.
struct PolarFrame {
  Vec3 origin = Vec3::Zero();
  double theta0 = 0.0;
  double psi0 = 0.0;

  Vec3 direction(double theta, double psi) const;
  // d/dpsi of direction(); the second derivative is -direction().
  Vec3 direction_dpsi(double theta, double psi) const;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tolerance under which a potential still counts as "inside" the closure.
inline constexpr double kClosureTolerance = 1e-12;

double speed_ratio(const PursuerSpec& pursuer, const EvaderSpec& evader);

// Throws GeometryError unless alpha > 1 and the evader lies strictly outside
// the capture ball.
void check_pair(const PursuerSpec& pursuer, const EvaderSpec& evader);

double potential(const PursuerSpec& pursuer, const EvaderSpec& evader,
                 const Vec3& x);

Vec3 potential_gradient(const PursuerSpec& pursuer, const EvaderSpec& evader,
                        const Vec3& x);

/// Distance from the evader to the boundary of its evasion space along the
/// unit direction `e`. Closed form of the quadratic in rho obtained by
/// squaring f(xE + rho e) = 0.
double boundary_radius(const PursuerSpec& pursuer, const EvaderSpec& evader,
                       const Vec3& e);

bool in_closure(const Coalition& coalition, const EvaderSpec& evader,
                std::span<const PursuerSpec> pursuers, const Vec3& x);

struct RadiusDerivatives {
  double rho = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// rho and its first two psi-derivatives along a cross-section, from the
/// analytic chain through h1 and h2.
RadiusDerivatives boundary_radius_derivatives(const PursuerSpec& pursuer,
                                              const EvaderSpec& evader,
                                              const PolarFrame& frame,
                                              double theta, double psi);

enum class Differentiation { Analytic, FiniteDifference };

/// Curvature of the cross-section curve rho(psi) at fixed theta:
/// (rho^2 + 2 rho'^2 - rho rho'') / (rho^2 + rho'^2)^(3/2).
double cross_section_curvature(const PursuerSpec& pursuer,
                               const EvaderSpec& evader,
                               const PolarFrame& frame, double theta,
                               double psi,
                               Differentiation mode = Differentiation::Analytic);

}  // namespace reachavoid
