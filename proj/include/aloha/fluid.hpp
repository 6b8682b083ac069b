#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/model.hpp"
#include "aloha/vec.hpp"

namespace aloha {

/// A deterministic trajectory on a time grid; also the container for scaled
/// sample paths. Values are nonnegative K-vectors.
struct FluidTrajectory {
  Vec grid;
  std::vector<Vec> values;
};

/// Right-hand side of the fluid ODE: lambda - p*z - (1/e) m(z).
inline Vec fluid_rhs(const Vec& z, const ValidatedModel& model) {
  const Vec m = drift_direction_m(z, model.lambda());
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = model.lambda()[i] - model.p()[i] * z[i] - kInvE * m[i];
  return out;
}

/// Derivative of the fluid trajectory at a zero initial state:
/// (1 - (1/e)/|lambda|_1) * lambda.
inline Vec fluid_derivative_at_zero(const ValidatedModel& model) {
  const double factor = 1.0 - kInvE / model.lambda_sum();
  Vec out(model.lambda());
  for (double& v : out) v *= factor;
  return out;
}

namespace detail {

inline Vec clamped_nonnegative(Vec z) {
  for (double& v : z) v = std::max(v, 0.0);
  return z;
}

}  // namespace detail

/// Classical fixed-step RK4 on the fluid ODE. Grid is {0, dt, ..., t_max}.
/// Round-off can push coordinates slightly negative; those are clamped to 0,
/// and any clamp larger than dt^2 aborts with StepTooLarge.
inline FluidTrajectory integrate_fms(const Vec& z0, const ValidatedModel& model, double t_max,
                                     double dt) {
  if (!(dt > 0.0)) throw DomainError("integration step must be positive");
  const std::size_t n_steps = static_cast<std::size_t>(std::llround(std::ceil(t_max / dt - 1e-9)));
  FluidTrajectory traj;
  traj.grid.reserve(n_steps + 1);
  traj.values.reserve(n_steps + 1);
  traj.grid.push_back(0.0);
  traj.values.push_back(z0);

  Vec z = z0;
  const std::size_t k = z.size();
  Vec stage(k), k1, k2, k3, k4;
  for (std::size_t n = 0; n < n_steps; ++n) {
    k1 = fluid_rhs(z, model);
    for (std::size_t i = 0; i < k; ++i) stage[i] = z[i] + 0.5 * dt * k1[i];
    k2 = fluid_rhs(detail::clamped_nonnegative(stage), model);
    for (std::size_t i = 0; i < k; ++i) stage[i] = z[i] + 0.5 * dt * k2[i];
    k3 = fluid_rhs(detail::clamped_nonnegative(stage), model);
    for (std::size_t i = 0; i < k; ++i) stage[i] = z[i] + dt * k3[i];
    k4 = fluid_rhs(detail::clamped_nonnegative(stage), model);
    for (std::size_t i = 0; i < k; ++i) {
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (z[i] < 0.0) {
        if (-z[i] > dt * dt)
          throw StepTooLarge("trajectory overshot below zero by more than dt^2; reduce dt");
        z[i] = 0.0;
      }
    }
    const double t = static_cast<double>(n + 1) * dt;
    if (sup_norm(z) == 0.0)
      throw StepTooLarge("trajectory collapsed to zero at t >= dt; reduce dt");
    traj.grid.push_back(t);
    traj.values.push_back(z);
  }
  return traj;
}

/// Single-class fluid trajectory in closed form:
/// z0 e^{-pt} + ((lambda - 1/e)/p)(1 - e^{-pt}).
inline double closed_form_1d(double z0, double lambda, double p, double t) {
  const double decay = std::exp(-p * t);
  return z0 * decay + (lambda - kInvE) / p * (1.0 - decay);
}

/// Zero-start auxiliary trajectory with equal decay parameter a1 in every
/// coordinate; linear in t when a1 = 0.
inline Vec closed_form_equal_a(const Vec& lambda, double a1, double t) {
  const double lambda_sum = l1_norm(lambda);
  const double scale = (a1 == 0.0) ? (lambda_sum - kInvE) * t
                                   : (lambda_sum - kInvE) / a1 * (1.0 - std::exp(-a1 * t));
  Vec out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) out[i] = lambda[i] / lambda_sum * scale;
  return out;
}

struct EquilibriumResult {
  Vec z_e;         // the unique equilibrium point, all coordinates positive
  double x_root;   // root of sum_i p_i lambda_i/(x+p_i) = |lambda|_1 - 1/e
  double residual; // sup-norm of lambda - p*z_e - (1/e) z_e/|z_e|_1
};

/// Solves the scalar equilibrium equation by bisection. The left side is
/// strictly decreasing from |lambda|_1 at x=0+ to 0, so a sign change is
/// found by doubling the upper bracket.
inline EquilibriumResult equilibrium(const ValidatedModel& model) {
  const Vec& lambda = model.lambda();
  const Vec& p = model.p();
  const double target = model.lambda_sum() - kInvE;
  auto f = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) s += p[i] * lambda[i] / (x + p[i]);
    return s;
  };
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (f(hi) > target) {
    hi *= 2.0;
    if (++doublings > 60) throw NumericFailure("equilibrium bracket not found within 2^60");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  EquilibriumResult res;
  res.x_root = 0.5 * (lo + hi);
  res.z_e.resize(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) res.z_e[i] = lambda[i] / (res.x_root + p[i]);
  const double ze_sum = l1_norm(res.z_e);
  double residual = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double r = lambda[i] - p[i] * res.z_e[i] - kInvE * res.z_e[i] / ze_sum;
    residual = std::max(residual, std::abs(r));
  }
  res.residual = residual;
  if (!(res.residual <= 1e-9))
    throw NumericFailure("equilibrium residual exceeds 1e-9; bisection failed");
  return res;
}

/// Bounds on |z(t)|_1 along the whole trajectory from z0:
/// l = min{|z0|_1, (|lambda|_1 - 1/e)/p_max}, u = max{|z0|_1, (|lambda|_1 - 1/e)/p_min}.
inline std::pair<double, double> fms_norm_bounds(const Vec& z0, const ValidatedModel& model) {
  const double drive = model.lambda_sum() - kInvE;
  const double n0 = l1_norm(z0);
  const double u = std::max(n0, drive / model.p_min());
  const double l = std::min(n0, drive / model.p_max());
  return {l, u};
}

/// Coordinatewise trajectory bounds derived from the norm bounds. The lower
/// bounds are 0 when z0 = 0.
inline std::pair<Vec, Vec> fms_coord_bounds(const Vec& z0, const ValidatedModel& model) {
  const auto [l, u] = fms_norm_bounds(z0, model);
  const Vec& lambda = model.lambda();
  const Vec& p = model.p();
  Vec lower(z0.size(), 0.0), upper(z0.size(), 0.0);
  for (std::size_t i = 0; i < z0.size(); ++i) {
    upper[i] = std::max(z0[i], lambda[i] / (kInvE / u + p[i]));
    if (l > 0.0) lower[i] = std::min(z0[i], lambda[i] / (kInvE / l + p[i]));
  }
  return {lower, upper};
}

/// Weighted squared distance to the equilibrium: sum (z_i - z_e,i)^2 / z_e,i.
inline double lyapunov_value(const Vec& z, const Vec& z_e) {
  double v = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double y = z[i] - z_e[i];
    v += y * y / z_e[i];
  }
  return v;
}

/// Quadratic form sum y_i^2/z_e,i - (sum y_i)^2 / sum z_e,i; nonnegative
/// whenever y + z_e stays in the positive orthant.
inline double lyapunov_quadratic_form(const Vec& y, const Vec& z_e) {
  double quad = 0.0, y_sum = 0.0, ze_sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    quad += y[i] * y[i] / z_e[i];
    y_sum += y[i];
    ze_sum += z_e[i];
  }
  return quad - y_sum * y_sum / ze_sum;
}

/// Trajectory derivative of the Lyapunov function along the fluid ODE;
/// nonpositive on the positive orthant.
inline double lyapunov_derivative(const Vec& z, const Vec& z_e, const ValidatedModel& model) {
  const Vec& p = model.p();
  Vec y(z.size());
  double z_sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    y[i] = z[i] - z_e[i];
    z_sum += z[i];
  }
  double decay = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) decay += 2.0 * p[i] * y[i] * y[i] / z_e[i];
  return -decay - 2.0 * kInvE / z_sum * lyapunov_quadratic_form(y, z_e);
}

}  // namespace aloha
