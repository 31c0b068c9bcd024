#include "reachavoid/geometry.hpp"

#include <cmath>

namespace reachavoid {

Vec3 PolarFrame::direction(double theta, double psi) const {
  const double t = theta + theta0;
  const double p = psi + psi0;
  return {std::cos(p) * std::cos(t), std::cos(p) * std::sin(t), std::sin(p)};
}

Vec3 PolarFrame::direction_dpsi(double theta, double psi) const {
  const double t = theta + theta0;
  const double p = psi + psi0;
  return {-std::sin(p) * std::cos(t), -std::sin(p) * std::sin(t),
          std::cos(p)};
}

double speed_ratio(const PursuerSpec& pursuer, const EvaderSpec& evader) {
  return pursuer.speed / evader.speed;
}

void check_pair(const PursuerSpec& pursuer, const EvaderSpec& evader) {
  if (!(pursuer.speed > 0.0) || !(evader.speed > 0.0)) {
    throw GeometryError("player speeds must be positive");
  }
  if (!(pursuer.capture_radius >= 0.0)) {
    throw GeometryError("capture radius must be non-negative");
  }
  if (!(speed_ratio(pursuer, evader) > 1.0)) {
    throw GeometryError("speed ratio must exceed 1");
  }
  if (!((evader.position - pursuer.position).norm() >
        pursuer.capture_radius)) {
    throw GeometryError("evader lies inside the capture ball");
  }
}

double potential(const PursuerSpec& pursuer, const EvaderSpec& evader,
                 const Vec3& x) {
  check_pair(pursuer, evader);
  return (x - pursuer.position).norm() -
         speed_ratio(pursuer, evader) * (x - evader.position).norm() -
         pursuer.capture_radius;
}

Vec3 potential_gradient(const PursuerSpec& pursuer, const EvaderSpec& evader,
                        const Vec3& x) {
  check_pair(pursuer, evader);
  const Vec3 to_p = x - pursuer.position;
  const Vec3 to_e = x - evader.position;
  const double dp = to_p.norm();
  const double de = to_e.norm();
  if (dp == 0.0 || de == 0.0) {
    throw GeometryError("potential gradient is singular at a player position");
  }
  return to_p / dp - speed_ratio(pursuer, evader) * to_e / de;
}

namespace {

struct PolarTerms {
  double a2m1;  // alpha^2 - 1
  double k;     // (alpha^2 - 1)(|xE - xP|^2 - r^2)
  Vec3 offset;  // xE - xP
  double alpha_r;
};

PolarTerms polar_terms(const PursuerSpec& pursuer, const EvaderSpec& evader) {
  check_pair(pursuer, evader);
  const double alpha = speed_ratio(pursuer, evader);
  const Vec3 offset = evader.position - pursuer.position;
  const double r = pursuer.capture_radius;
  const double a2m1 = alpha * alpha - 1.0;
  return {a2m1, a2m1 * (offset.squaredNorm() - r * r), offset, alpha * r};
}

}  // namespace

double boundary_radius(const PursuerSpec& pursuer, const EvaderSpec& evader,
                       const Vec3& e) {
  const PolarTerms pt = polar_terms(pursuer, evader);
  const double h1 = pt.offset.dot(e) - pt.alpha_r;
  const double h2 = std::sqrt(h1 * h1 + pt.k);
  // h1 + h2 loses digits when h1 << 0; use the conjugate form there.
  if (h1 < 0.0) return pt.k / (pt.a2m1 * (h2 - h1));
  return (h1 + h2) / pt.a2m1;
}

bool in_closure(const Coalition& coalition, const EvaderSpec& evader,
                std::span<const PursuerSpec> pursuers, const Vec3& x) {
  if (coalition.empty()) throw GeometryError("empty coalition");
  for (std::size_t i : coalition) {
    if (i >= pursuers.size()) throw GeometryError("pursuer index out of range");
    if (potential(pursuers[i], evader, x) < -kClosureTolerance) return false;
  }
  return true;
}

RadiusDerivatives boundary_radius_derivatives(const PursuerSpec& pursuer,
                                              const EvaderSpec& evader,
                                              const PolarFrame& frame,
                                              double theta, double psi) {
  const PolarTerms pt = polar_terms(pursuer, evader);
  const Vec3 e = frame.direction(theta, psi);
  const Vec3 de = frame.direction_dpsi(theta, psi);
  const double h1 = pt.offset.dot(e) - pt.alpha_r;
  const double h1d = pt.offset.dot(de);
  const double h1dd = -pt.offset.dot(e);
  const double h2 = std::sqrt(h1 * h1 + pt.k);

  RadiusDerivatives out;
  out.rho = boundary_radius(pursuer, evader, e);
  const double ratio = (h2 + h1) / h2;
  out.d1 = ratio * h1d / pt.a2m1;
  out.d2 = (ratio * h1dd + (h2 * h2 - h1 * h1) / (h2 * h2 * h2) * h1d * h1d) /
           pt.a2m1;
  return out;
}

double cross_section_curvature(const PursuerSpec& pursuer,
                               const EvaderSpec& evader,
                               const PolarFrame& frame, double theta,
                               double psi, Differentiation mode) {
  RadiusDerivatives d;
  if (mode == Differentiation::Analytic) {
    d = boundary_radius_derivatives(pursuer, evader, frame, theta, psi);
  } else {
    constexpr double h = 1e-4;
    auto rho = [&](double p) {
      return boundary_radius(pursuer, evader, frame.direction(theta, p));
    };
    const double r0 = rho(psi);
    const double rp = rho(psi + h);
    const double rm = rho(psi - h);
    d.rho = r0;
    d.d1 = (rp - rm) / (2.0 * h);
    d.d2 = (rp - 2.0 * r0 + rm) / (h * h);
  }
  const double num = d.rho * d.rho + 2.0 * d.d1 * d.d1 - d.rho * d.d2;
  const double den = std::pow(d.rho * d.rho + d.d1 * d.d1, 1.5);
  return num / den;
}

}  // namespace reachavoid
