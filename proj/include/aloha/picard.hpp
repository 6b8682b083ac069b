#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/fluid.hpp"
#include "aloha/model.hpp"
#include "aloha/vec.hpp"

namespace aloha {

/// Configuration of the fixed-point solver for the (epsilon,a)-trajectories.
struct PicardConfig {
  double epsilon = 0.0;
  Vec a;                    // per-class decay parameters, all >= 0
  double dt = 1e-3;         // solver grid step
  double t_max = 10.0;      // horizon
  double tol = 1e-10;       // sup-norm stopping tolerance between iterates
  int max_iterations = 5000;
};

struct PicardDiagnostics {
  int iterations = 0;
  double final_change = 0.0;
  /// Largest coordinatewise decrease seen between successive iterates
  /// (0 when the iteration is monotone non-decreasing).
  double max_monotone_violation = 0.0;
};

namespace detail {

/// Integral of (1/e)/|u(s)|_1 over one grid cell, with |u|_1 interpolated
/// linearly between the endpoint values; exact for linear |u|_1, which keeps
/// the near-zero cells of a zero-start trajectory accurate.
inline double cell_inner_integral(double norm0, double norm1, double dt) {
  const double diff = norm1 - norm0;
  if (std::abs(diff) <= 1e-12 * std::max(norm0, norm1))
    return kInvE * dt * 2.0 / (norm0 + norm1);
  return kInvE * dt * std::log(norm1 / norm0) / diff;
}

}  // namespace detail

/// One application of the integral operator behind the (epsilon,a)-family:
/// out_i(t) = epsilon + lambda_i * int_0^t exp(-a_i (t-s) - int_s^t (1/e)/|u|_1) ds.
/// The outer integral is the trapezoid rule on the grid, evaluated through a
/// decay recurrence so the cost is O(grid) per coordinate and nothing is
/// exponentiated outside [-inf, 0].
///
/// When u starts at zero the first cell is singular: |u(s)|_1 ~ sigma*s makes
/// the inner integrand ~ c/s with c = (1/e)/sigma, so exp(-int_s^t) vanishes
/// at s=0 like (s/t1)^c and the first cell integrates to dt/(1+c).
inline std::vector<Vec> picard_apply(const std::vector<Vec>& u, const Vec& grid,
                                     const ValidatedModel& model, double epsilon, const Vec& a) {
  const std::size_t n = grid.size();
  const std::size_t k = model.lambda().size();
  const double dt = n > 1 ? grid[1] - grid[0] : 0.0;

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = l1_norm(u[j]);

  // Per-cell inner integrals; the singular zero-start cell is flagged and
  // handled by the power-law rule instead.
  std::vector<double> cell_phi(n, 0.0);
  bool singular_start = false;
  for (std::size_t j = 1; j < n; ++j) {
    if (norms[j - 1] <= 0.0) {
      if (j != 1) throw NumericFailure("trajectory norm vanished away from t=0");
      singular_start = true;
      cell_phi[j] = 0.0;  // folded into the power-law first cell below
    } else {
      cell_phi[j] = detail::cell_inner_integral(norms[j - 1], norms[j], dt);
    }
  }
  const double sigma = model.lambda_sum() - kInvE;
  const double c_exponent = kInvE / sigma;

  std::vector<Vec> out(n, Vec(k, epsilon));
  for (std::size_t i = 0; i < k; ++i) {
    const double a_i = a[i];
    double outer = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      if (j == 1 && singular_start) {
        outer = dt / (1.0 + c_exponent);
      } else {
        const double decay = std::exp(-a_i * dt - cell_phi[j]);
        outer = decay * (outer + 0.5 * dt) + 0.5 * dt;
      }
      out[j][i] = epsilon + model.lambda()[i] * outer;
    }
  }
  return out;
}

/// Iterates the integral operator to its fixed point on the grid.
/// epsilon > 0 starts from the constant-epsilon function and climbs;
/// epsilon = 0 starts from the equal-parameter upper trajectory with
/// a1 = max_i a_i, whose closed form is available.
inline FluidTrajectory picard_solve(const ValidatedModel& model, const PicardConfig& cfg,
                                    PicardDiagnostics* diag = nullptr) {
  if (!(cfg.dt > 0.0) || !(cfg.tol > 0.0)) throw DomainError("picard config needs dt > 0, tol > 0");
  if (cfg.a.size() != model.lambda().size())
    throw DimensionMismatch("picard parameter vector a has wrong dimension");
  for (double ai : cfg.a)
    if (ai < 0.0) throw DomainError("picard parameters a must be nonnegative");
  if (cfg.epsilon < 0.0) throw DomainError("epsilon must be nonnegative");

  const std::size_t n_steps =
      static_cast<std::size_t>(std::llround(std::ceil(cfg.t_max / cfg.dt - 1e-9)));
  Vec grid(n_steps + 1);
  for (std::size_t j = 0; j <= n_steps; ++j) grid[j] = static_cast<double>(j) * cfg.dt;

  const std::size_t k = model.lambda().size();
  std::vector<Vec> z(grid.size(), Vec(k, cfg.epsilon));
  if (cfg.epsilon == 0.0) {
    const double a_max = *std::max_element(cfg.a.begin(), cfg.a.end());
    for (std::size_t j = 0; j < grid.size(); ++j)
      z[j] = closed_form_equal_a(model.lambda(), a_max, grid[j]);
  }

  PicardDiagnostics local;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    std::vector<Vec> next = picard_apply(z, grid, model, cfg.epsilon, cfg.a);
    double change = 0.0;
    double drop = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
      for (std::size_t i = 0; i < k; ++i) {
        change = std::max(change, std::abs(next[j][i] - z[j][i]));
        drop = std::min(drop, next[j][i] - z[j][i]);
      }
    local.max_monotone_violation = std::max(local.max_monotone_violation, -drop);
    z = std::move(next);
    local.final_change = change;
    if (change <= cfg.tol) break;
  }
  if (local.final_change > cfg.tol)
    throw NoConvergence("picard iteration did not reach tolerance within max iterations");
  local.iterations = it + 1;
  if (diag) *diag = local;

  FluidTrajectory traj;
  traj.grid = std::move(grid);
  traj.values = std::move(z);
  return traj;
}

/// Gap between the epsilon- and zero-trajectories together with the
/// analytic envelope epsilon*(K + |a|_1 + phi_eps(t)), where
/// phi_eps(t) = int_0^t K (1/e)/|z_eps(s)|_1 ds (trapezoid on the grid).
struct EpsilonGapSeries {
  Vec grid;
  Vec gap;    // |z_eps(t) - z_0(t)|_1
  Vec bound;  // epsilon (K + |a|_1 + phi_eps(t))
  Vec phi;    // phi_eps(t)
};

inline EpsilonGapSeries epsilon_gap_bound(const ValidatedModel& model, const Vec& a,
                                          double epsilon, double t_max, double dt,
                                          double tol = 1e-10, int max_iterations = 5000) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon_gap_bound needs epsilon > 0");
  PicardConfig cfg;
  cfg.a = a;
  cfg.dt = dt;
  cfg.t_max = t_max;
  cfg.tol = tol;
  cfg.max_iterations = max_iterations;

  cfg.epsilon = epsilon;
  const FluidTrajectory z_eps = picard_solve(model, cfg);
  cfg.epsilon = 0.0;
  const FluidTrajectory z_zero = picard_solve(model, cfg);

  const double k = static_cast<double>(model.k());
  const double a_sum = l1_norm(a);

  EpsilonGapSeries series;
  series.grid = z_eps.grid;
  const std::size_t n = series.grid.size();
  series.gap.resize(n);
  series.bound.resize(n);
  series.phi.resize(n);
  double phi = 0.0;
  double prev_g = k * kInvE / l1_norm(z_eps.values[0]);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double g = k * kInvE / l1_norm(z_eps.values[j]);
      phi += 0.5 * dt * (prev_g + g);
      prev_g = g;
    }
    series.phi[j] = phi;
    double gap = 0.0;
    for (std::size_t i = 0; i < z_eps.values[j].size(); ++i)
      gap += std::abs(z_eps.values[j][i] - z_zero.values[j][i]);
    series.gap[j] = gap;
    series.bound[j] = epsilon * (k + a_sum + phi);
  }
  return series;
}

}  // namespace aloha
