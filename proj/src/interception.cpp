#include "reachavoid/interception.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

namespace reachavoid {

using Mat3 = Eigen::Matrix3d;

RegionSpec RegionSpec::ball(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  if (!(std::abs(center.z()) < radius)) {
    throw std::invalid_argument("ball does not meet the exit plane z = 0");
  }
  RegionSpec r;
  r.kind = Kind::BoundedBall;
  r.center = center;
  r.radius = radius;
  return r;
}

double RegionSpec::g(const Vec3& x) const {
  return radius * radius - (x - center).squaredNorm();
}

Vec3 RegionSpec::g_gradient(const Vec3& x) const { return -2.0 * (x - center); }

double RegionSpec::exit_disk_radius() const {
  if (!bounded()) return 0.0;
  return std::sqrt(radius * radius - center.z() * center.z());
}

bool RegionSpec::contains(const Vec3& x) const {
  if (!bounded()) return x.z() > 0.0;
  return x.z() >= 0.0 && g(x) >= 0.0;
}

namespace {

const Vec3 kUp{0.0, 0.0, 1.0};
const Vec3 kDown{0.0, 0.0, -1.0};

// One smooth constraint c(x) >= 0 of the barrier problem. Pursuer
// constraints are the concave surrogate h = f * S with
// S = |x - P| + alpha |x - E| + r, whose superlevel set equals {f >= 0}.
// The region constraint is g itself, already concave.
struct Constraint {
  const PursuerSpec* pursuer = nullptr;  // null for the region
  std::size_t index = 0;
  double alpha = 0.0;
};

struct Local {
  double value = 0.0;  // barrier-space value (h or g)
  Vec3 grad = Vec3::Zero();
  Mat3 hess = Mat3::Zero();
};

class Problem {
 public:
  Problem(const Coalition& coalition, const EvaderSpec& evader,
          std::span<const PursuerSpec> pursuers, const RegionSpec& region)
      : evader_(evader), region_(region) {
    if (coalition.empty()) throw std::invalid_argument("empty coalition");
    for (std::size_t i : coalition) {
      if (i >= pursuers.size()) {
        throw std::invalid_argument("pursuer index out of range");
      }
      check_pair(pursuers[i], evader);
      constraints_.push_back(
          {&pursuers[i], i, speed_ratio(pursuers[i], evader)});
    }
    if (region.bounded()) constraints_.push_back({nullptr, 0, 0.0});
  }

  std::size_t size() const { return constraints_.size(); }
  // The potentials are not differentiable at the evader; for small t the
  // centering minimiser can sit exactly there.
  bool at_kink(const Vec3& x) const {
    return (x - evader_.position).norm() <= 1e-9 * (1.0 + x.norm());
  }
  const Constraint& at(std::size_t k) const { return constraints_[k]; }
  bool is_region(std::size_t k) const { return !constraints_[k].pursuer; }

  // Potential f (pursuer) or signed distance R - |x - c| (region).
  double natural(std::size_t k, const Vec3& x) const {
    const Constraint& c = constraints_[k];
    if (!c.pursuer) return region_.radius - (x - region_.center).norm();
    return (x - c.pursuer->position).norm() -
           c.alpha * (x - evader_.position).norm() - c.pursuer->capture_radius;
  }

  Vec3 natural_grad(std::size_t k, const Vec3& x) const {
    const Constraint& c = constraints_[k];
    if (!c.pursuer) {
      const Vec3 d = x - region_.center;
      return -d / d.norm();
    }
    const Vec3 dp = x - c.pursuer->position;
    const Vec3 de = x - evader_.position;
    return dp / dp.norm() - c.alpha * de / std::max(de.norm(), 1e-300);
  }

  Mat3 natural_hess(std::size_t k, const Vec3& x) const {
    const Constraint& c = constraints_[k];
    const Mat3 eye = Mat3::Identity();
    if (!c.pursuer) {
      const Vec3 d = x - region_.center;
      const double n = d.norm();
      const Vec3 v = d / n;
      return -(eye - v * v.transpose()) / n;
    }
    const Vec3 dp = x - c.pursuer->position;
    const Vec3 de = x - evader_.position;
    const double np = dp.norm();
    const double ne = std::max(de.norm(), 1e-300);
    const Vec3 u = dp / np;
    const Vec3 w = de / ne;
    return (eye - u * u.transpose()) / np -
           c.alpha * (eye - w * w.transpose()) / ne;
  }

  Local barrier_local(std::size_t k, const Vec3& x) const {
    const Constraint& c = constraints_[k];
    const Mat3 eye = Mat3::Identity();
    Local out;
    if (!c.pursuer) {
      out.value = region_.g(x);
      out.grad = region_.g_gradient(x);
      out.hess = -2.0 * eye;
      return out;
    }
    const Vec3 dp = x - c.pursuer->position;
    const Vec3 de = x - evader_.position;
    const double np = dp.norm();
    const double ne = std::max(de.norm(), 1e-14);
    const double r = c.pursuer->capture_radius;
    const double a = c.alpha;
    const double f = np - a * ne - r;
    const double s = np + a * ne + r;
    const Vec3 w = de / ne;
    out.value = f * s;
    out.grad = 2.0 * dp - 2.0 * a * (a * ne + r) * w;
    out.hess = 2.0 * (1.0 - a * a) * eye -
               2.0 * a * r * (eye - w * w.transpose()) / ne;
    return out;
  }

  // d(barrier constraint)/d(natural constraint) on the boundary.
  double barrier_scale(std::size_t k, const Vec3& x) const {
    const Constraint& c = constraints_[k];
    if (!c.pursuer) return region_.radius + (x - region_.center).norm();
    return (x - c.pursuer->position).norm() +
           c.alpha * (x - evader_.position).norm() + c.pursuer->capture_radius;
  }

  bool strictly_feasible(const Vec3& x) const {
    for (std::size_t k = 0; k < size(); ++k) {
      if (!(barrier_local(k, x).value > 0.0)) return false;
    }
    return true;
  }

  Vec3 default_start() const {
    double reach = std::numeric_limits<double>::infinity();
    for (const Constraint& c : constraints_) {
      if (c.pursuer) {
        reach = std::min(reach, boundary_radius(*c.pursuer, evader_, kDown));
      } else {
        const Vec3 d = evader_.position - region_.center;
        const double b = d.dot(kDown);
        const double q = d.squaredNorm() - region_.radius * region_.radius;
        if (!(q < 0.0)) {
          throw SolverError("evader is not strictly inside the play region");
        }
        reach = std::min(reach, -b + std::sqrt(b * b - q));
      }
    }
    return evader_.position + 0.5 * reach * kDown;
  }

 private:
  const EvaderSpec& evader_;
  const RegionSpec& region_;
  std::vector<Constraint> constraints_;
};

struct BarrierState {
  Vec3 x;
  double t = 1.0;
  int iterations = 0;
};

double barrier_objective(const Problem& p, const Vec3& x, double t) {
  double phi = t * x.z();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double c = p.barrier_local(k, x).value;
    if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
    phi -= std::log(c);
  }
  return phi;
}

// Returns false when the line search stalls before the decrement target.
bool centering(const Problem& p, BarrierState& st,
               const InterceptionOptions& opt) {
  while (st.iterations < opt.max_newton_iterations) {
    if (p.at_kink(st.x)) return true;
    Vec3 grad = st.t * kUp;
    Mat3 hess = Mat3::Zero();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const Local l = p.barrier_local(k, st.x);
      grad -= l.grad / l.value;
      hess += l.grad * l.grad.transpose() / (l.value * l.value) -
              l.hess / l.value;
    }
    const Eigen::LDLT<Mat3> ldlt(hess);
    const Vec3 step = -ldlt.solve(grad);
    const double decrement = -grad.dot(step);
    ++st.iterations;
    if (!std::isfinite(decrement)) return false;
    if (decrement / 2.0 <= opt.newton_tolerance) return true;

    const double phi0 = barrier_objective(p, st.x, st.t);
    double s = 1.0;
    while (s > 1e-20 && !p.strictly_feasible(st.x + s * step)) s *= 0.5;
    while (s > 1e-20 &&
           barrier_objective(p, st.x + s * step, st.t) >
               phi0 - 0.25 * s * decrement) {
      s *= 0.5;
    }
    if (s <= 1e-20) return false;
    const Vec3 move = s * step;
    st.x += move;
    // Roundoff floor: the decrement cannot shrink further once steps stop
    // moving the iterate.
    if (move.norm() <= 1e-13 * (1.0 + st.x.norm())) return true;
  }
  return false;
}

struct Polished {
  Vec3 x;
  std::vector<std::size_t> active;  // constraint slots
  std::vector<double> mu;           // natural-space, non-negative
};

// Newton on the equality KKT system of the active constraints.
std::optional<Polished> polish(const Problem& p, const Vec3& x0,
                               std::vector<std::size_t> active,
                               std::vector<double> mu0) {
  for (int attempt = 0; attempt < 4 && !active.empty(); ++attempt) {
    const std::size_t m = active.size();
    if (m > 3) return std::nullopt;
    Vec3 x = x0;
    Eigen::VectorXd mu = Eigen::Map<Eigen::VectorXd>(mu0.data(), m);
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
      Eigen::VectorXd F(3 + m);
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 + m, 3 + m);
      Vec3 stat = kUp;
      Mat3 lag = Mat3::Zero();
      for (std::size_t a = 0; a < m; ++a) {
        const Vec3 g = p.natural_grad(active[a], x);
        stat -= mu(a) * g;
        lag -= mu(a) * p.natural_hess(active[a], x);
        F(3 + a) = p.natural(active[a], x);
        J.block<3, 1>(0, 3 + a) = -g;
        J.block<1, 3>(3 + a, 0) = g.transpose();
      }
      F.head<3>() = stat;
      J.block<3, 3>(0, 0) = lag;
      if (F.lpNorm<Eigen::Infinity>() <= 1e-14) {
        converged = true;
        break;
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
      if (lu.rank() < static_cast<Eigen::Index>(3 + m)) return std::nullopt;
      const Eigen::VectorXd d = lu.solve(-F);
      x += d.head<3>();
      mu += d.tail(m);
      if (!x.allFinite()) return std::nullopt;
      if (it > 5 && F.lpNorm<Eigen::Infinity>() <= 1e-12) converged = true;
    }
    if (!converged || (x - x0).norm() > 1e-4) return std::nullopt;

    // Drop a constraint whose multiplier came out negative and retry.
    Eigen::Index worst = 0;
    if (mu.minCoeff(&worst) < -1e-10) {
      active.erase(active.begin() + worst);
      mu0.erase(mu0.begin() + worst);
      continue;
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      if (p.natural(k, x) < -1e-12) return std::nullopt;
    }
    Polished out{x, active, {}};
    for (std::size_t a = 0; a < m; ++a) out.mu.push_back(std::max(mu(a), 0.0));
    return out;
  }
  return std::nullopt;
}

}  // namespace

InterceptionResult solve_interception(const Coalition& coalition,
                                      const EvaderSpec& evader,
                                      std::span<const PursuerSpec> pursuers,
                                      const RegionSpec& region,
                                      const InterceptionOptions& options) {
  const Problem p(coalition, evader, pursuers, region);
  BarrierState st;
  st.t = options.initial_t;
  if (options.warm_start) {
    if (!p.strictly_feasible(*options.warm_start)) {
      throw std::invalid_argument("warm start is not strictly feasible");
    }
    st.x = *options.warm_start;
  } else {
    st.x = p.default_start();
  }

  const double m = static_cast<double>(p.size());
  while (true) {
    const bool ok = centering(p, st, options);
    const double gap = m / st.t;
    if (!ok) {
      if (gap <= 1e-6 && st.iterations < options.max_newton_iterations) break;
      throw SolverError("interior-point Newton failed to converge");
    }
    if (gap <= options.gap_tolerance) break;
    st.t *= options.t_growth;
    if (p.at_kink(st.x)) st.x = p.default_start();
  }

  // Central-path multipliers in natural space.
  std::vector<double> mu_barrier(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    mu_barrier[k] = p.barrier_scale(k, st.x) /
                    (st.t * p.barrier_local(k, st.x).value);
  }

  std::vector<std::size_t> active;
  std::vector<double> mu_active;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (std::abs(p.natural(k, st.x)) <= kActiveTolerance) {
      active.push_back(k);
      mu_active.push_back(mu_barrier[k]);
    }
  }

  InterceptionResult res;
  res.newton_iterations = st.iterations;
  res.multipliers.assign(coalition.size(), 0.0);

  if (auto pol = polish(p, st.x, active, mu_active)) {
    res.point = pol->x;
    for (std::size_t a = 0; a < pol->active.size(); ++a) {
      const std::size_t k = pol->active[a];
      if (p.is_region(k)) {
        res.region_active = true;
        // g = R^2 - |x-c|^2 has gradient 2R times that of R - |x-c| here.
        res.region_multiplier = -pol->mu[a] / (2.0 * region.radius);
      } else {
        res.multipliers[k] = -pol->mu[a];
        res.active_set.push_back(p.at(k).index);
      }
    }
  } else {
    res.point = st.x;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const bool is_active = std::abs(p.natural(k, st.x)) <= kActiveTolerance;
      if (p.is_region(k)) {
        res.region_active = is_active;
        res.region_multiplier = -1.0 / (st.t * p.barrier_local(k, st.x).value);
      } else {
        res.multipliers[k] = -mu_barrier[k];
        if (is_active) res.active_set.push_back(p.at(k).index);
      }
    }
  }
  res.value = res.point.z();
  res.status = SolveStatus::Solved;
  return res;
}

KktResiduals kkt_residuals(const InterceptionResult& result,
                           const Coalition& coalition,
                           const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region) {
  KktResiduals out;
  const Vec3& x = result.point;
  Vec3 stat = kDown;
  std::size_t a = 0;
  for (std::size_t i : coalition) {
    const double lambda = result.multipliers.at(a++);
    const double f = potential(pursuers[i], evader, x);
    stat -= lambda * potential_gradient(pursuers[i], evader, x);
    out.complementarity = std::max(out.complementarity, std::abs(lambda * f));
    out.primal_violation = std::max(out.primal_violation, -f);
    out.dual_violation = std::max(out.dual_violation, lambda);
  }
  if (region.bounded()) {
    const double lambda = result.region_multiplier;
    const double g = region.g(x);
    stat -= lambda * region.g_gradient(x);
    out.complementarity = std::max(out.complementarity, std::abs(lambda * g));
    out.primal_violation = std::max(out.primal_violation, -g);
    out.dual_violation = std::max(out.dual_violation, lambda);
  }
  out.stationarity = stat.norm();
  return out;
}

namespace {

struct TripleSystem {
  Mat3 m;  // rows m_i
  Vec3 b;
  Vec3 c;
};

TripleSystem triple_system(const Coalition& coalition, const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers) {
  if (coalition.size() != 3) {
    throw std::invalid_argument("triple_candidates needs exactly 3 pursuers");
  }
  TripleSystem sys;
  int row = 0;
  for (std::size_t i : coalition) {
    if (i >= pursuers.size()) {
      throw std::invalid_argument("pursuer index out of range");
    }
    const PursuerSpec& pu = pursuers[i];
    check_pair(pu, evader);
    const double alpha = speed_ratio(pu, evader);
    const double a2m1 = alpha * alpha - 1.0;
    const Vec3 d = evader.position - pu.position;
    const double r = pu.capture_radius;
    sys.m.row(row) = 2.0 * d.transpose() / a2m1;
    sys.b(row) = 2.0 * alpha * r / a2m1;
    sys.c(row) = (d.squaredNorm() - r * r) / a2m1;
    ++row;
  }
  return sys;
}

bool singular(const Mat3& m) {
  const double scale = std::max(
      {m.row(0).norm(), m.row(1).norm(), m.row(2).norm()});
  return std::abs(m.determinant()) <= 1e-10 * scale * scale * scale;
}

double eval_poly(const std::array<double, 5>& c, double x) {
  double v = 0.0;
  for (double coef : c) v = v * x + coef;
  return v;
}

}  // namespace

bool coplanar(const Coalition& coalition, const EvaderSpec& evader,
              std::span<const PursuerSpec> pursuers) {
  return singular(triple_system(coalition, evader, pursuers).m);
}

std::vector<Vec3> triple_candidates(const Coalition& coalition,
                                    const EvaderSpec& evader,
                                    std::span<const PursuerSpec> pursuers) {
  const TripleSystem sys = triple_system(coalition, evader, pursuers);
  if (singular(sys.m)) {
    throw CoplanarError("evader and pursuers are coplanar");
  }
  // e(rho) = A rho + B + C / rho; |e| = 1 times rho^2 gives the quartic.
  const Eigen::PartialPivLU<Mat3> lu(sys.m);
  const Vec3 A = lu.solve(Vec3::Ones());
  const Vec3 B = lu.solve(sys.b);
  const Vec3 C = -lu.solve(sys.c);
  const std::array<double, 5> coef{A.dot(A), 2.0 * A.dot(B),
                                   B.dot(B) + 2.0 * A.dot(C) - 1.0,
                                   2.0 * B.dot(C), C.dot(C)};
  const std::array<double, 5> dcoef{0.0, 4.0 * coef[0], 3.0 * coef[1],
                                    2.0 * coef[2], coef[3]};

  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  companion.block<3, 3>(1, 0).setIdentity();
  for (int k = 0; k < 4; ++k) companion(k, 3) = -coef[4 - k] / coef[0];
  const Eigen::EigenSolver<Eigen::Matrix4d> es(companion, false);

  std::vector<Vec3> out;
  for (int k = 0; k < 4; ++k) {
    const std::complex<double> root = es.eigenvalues()(k);
    // Near-double roots come back with imaginary parts around sqrt(eps);
    // the residual check below is the real filter.
    if (std::abs(root.imag()) > 1e-6) continue;
    double rho = root.real();
    for (int it = 0; it < 3; ++it) {
      const double d = eval_poly(dcoef, rho);
      if (d == 0.0) break;
      const double next = rho - eval_poly(coef, rho) / d;
      if (!std::isfinite(next)) break;
      rho = next;
    }
    if (!(rho > 1e-12)) continue;
    const Vec3 x = evader.position + rho * (A * rho + B + C / rho);
    bool on_all = true;
    for (std::size_t i : coalition) {
      if (std::abs(potential(pursuers[i], evader, x)) > 1e-7) on_all = false;
    }
    if (!on_all) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Vec3& y) {
      return (x - y).norm() <= 1e-8;
    });
    if (!dup) out.push_back(x);
  }
  std::sort(out.begin(), out.end(),
            [](const Vec3& a, const Vec3& b) { return a.z() < b.z(); });
  return out;
}

namespace {

bool independent_gradients(const std::vector<std::size_t>& members,
                           const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region, const InterceptionResult& r) {
  std::vector<Vec3> grads;
  for (std::size_t i : members) {
    grads.push_back(potential_gradient(pursuers[i], evader, r.point));
  }
  if (r.region_active) grads.push_back(region.g_gradient(r.point).normalized());
  if (grads.size() > 3) return false;
  Eigen::MatrixXd g(3, grads.size());
  for (std::size_t k = 0; k < grads.size(); ++k) {
    g.col(static_cast<Eigen::Index>(k)) = grads[k];
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const auto& sv = svd.singularValues();
  return sv.size() == 0 || sv(sv.size() - 1) > 1e-8 * std::max(1.0, sv(0));
}

}  // namespace

Coalition reduce_coalition(const Coalition& coalition, const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region) {
  return reduce_coalition(
      coalition, evader, pursuers, region,
      solve_interception(coalition, evader, pursuers, region));
}

Coalition reduce_coalition(const Coalition& coalition, const EvaderSpec& evader,
                           std::span<const PursuerSpec> pursuers,
                           const RegionSpec& region,
                           const InterceptionResult& solved) {
  if (coalition.size() <= 1) return coalition;
  constexpr double kSamePoint = 1e-7;
  auto same_point = [&](const Coalition& s) {
    const auto r = solve_interception(s, evader, pursuers, region);
    return (r.point - solved.point).norm() <= kSamePoint;
  };

  if (solved.active_set.empty()) {
    // Only the region constraint binds; any single member reproduces it.
    return Coalition{coalition.members().front()};
  }

  Coalition current(solved.active_set);
  if (current.size() <= 3 &&
      independent_gradients(current.members(), evader, pursuers, region,
                            solved) &&
      same_point(current)) {
    return current;
  }
  // Dependent or oversized active set: drop members, highest index first,
  // while the interception point is unchanged.
  bool progress = true;
  while (progress && current.size() > 1) {
    progress = false;
    const auto& mem = current.members();
    for (auto it = mem.rbegin(); it != mem.rend(); ++it) {
      std::vector<std::size_t> rest;
      for (std::size_t i : mem) {
        if (i != *it) rest.push_back(i);
      }
      Coalition trial(std::move(rest));
      if (same_point(trial)) {
        current = std::move(trial);
        progress = true;
        break;
      }
    }
    if (current.size() <= 3 && !progress) break;
  }
  return current;
}

std::string to_string(GameKind kind) {
  switch (kind) {
    case GameKind::PursuitWins:
      return "PursuitWins";
    case GameKind::Tie:
      return "Tie";
    case GameKind::EvaderWins:
      return "EvaderWins";
  }
  return "?";
}

KindResult classify(const Coalition& coalition, const EvaderSpec& evader,
                    std::span<const PursuerSpec> pursuers,
                    const RegionSpec& region) {
  KindResult out;
  out.interception = solve_interception(coalition, evader, pursuers, region);
  const double v = out.interception.value;
  if (v > kKindTolerance) {
    out.kind = GameKind::PursuitWins;
  } else if (v >= -kKindTolerance) {
    out.kind = GameKind::Tie;
  } else {
    out.kind = GameKind::EvaderWins;
    if (region.bounded()) {
      const Vec3& e = evader.position;
      const Vec3& low = out.interception.point;
      Vec3 w = e;
      if (e.z() > 0.0) w = e + (e.z() / (e.z() - low.z())) * (low - e);
      w.z() = 0.0;
      const bool in_es = in_closure(coalition, evader, pursuers, w);
      const bool in_disk = region.g(w) >= -1e-9;
      if (!in_es || !in_disk) {
        throw SolverError("exit-disk certificate failed for EvaderWins");
      }
      out.exit_witness = w;
    }
  }
  return out;
}

GameKind classify_kind(const Coalition& coalition, const EvaderSpec& evader,
                       std::span<const PursuerSpec> pursuers,
                       const RegionSpec& region) {
  return classify(coalition, evader, pursuers, region).kind;
}

}  // namespace reachavoid
