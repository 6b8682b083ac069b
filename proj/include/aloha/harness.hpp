#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/fluid.hpp"
#include "aloha/model.hpp"
#include "aloha/simulator.hpp"
#include "aloha/vec.hpp"

namespace aloha {

struct LadderEntry {
  double R = 0.0;
  int reps = 0;
  double mean_sup_dist = 0.0;
  double max_sup_dist = 0.0;
  double std_sup_dist = 0.0;
};

struct ConvergenceReport {
  std::string model_fingerprint;
  Vec z0;
  double t_max = 0.0;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  std::vector<LadderEntry> entries;
};

namespace detail {

/// Runs fn(i) for i in [0,count) across a small thread pool; results land in
/// index order so downstream aggregation is reproducible.
template <typename Fn>
std::vector<double> run_indexed(std::size_t count, Fn fn) {
  std::vector<double> out(count, 0.0);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
    }));
  }
  for (auto& f : futures) f.get();
  return out;
}

inline Vec uniform_grid(double t_max, double step) {
  const auto n = static_cast<std::size_t>(std::llround(std::ceil(t_max / step - 1e-9)));
  Vec grid(n + 1);
  for (std::size_t j = 0; j <= n; ++j) grid[j] = static_cast<double>(j) * step;
  return grid;
}

/// Fluid trajectory sampled exactly on the experiment grid, integrated with
/// an internal step no coarser than 1e-3.
inline std::vector<Vec> fms_on_grid(const Vec& z0, const ValidatedModel& model, double t_max,
                                    double grid_step) {
  const auto divisor =
      static_cast<std::size_t>(std::max(1.0, std::ceil(grid_step / 1e-3 - 1e-9)));
  const double dt = grid_step / static_cast<double>(divisor);
  const FluidTrajectory fine = integrate_fms(z0, model, t_max, dt);
  std::vector<Vec> coarse;
  coarse.reserve(fine.values.size() / divisor + 1);
  for (std::size_t j = 0; j < fine.values.size(); j += divisor) coarse.push_back(fine.values[j]);
  return coarse;
}

}  // namespace detail

/// Law-of-large-numbers convergence experiment: for each R of the ladder,
/// run `reps` independent paths from round(R*z0), rescale, and record the
/// sup distance to the fluid trajectory over the shared grid. Fully
/// determined by (model, parameters, seed).
///
/// With `couple` set, every replication additionally runs the single-class
/// bounding chain on the same uniforms and verifies the pathwise domination
/// at each slot (a violated bound is an internal bug, hence NumericFailure).
inline ConvergenceReport convergence_experiment(const ValidatedModel& model, const Vec& z0,
                                                const Vec& r_ladder, int reps, double t_max,
                                                double grid_step, std::uint64_t seed,
                                                bool couple = false) {
  if (r_ladder.empty() && reps < 0) throw DomainError("bad experiment parameters");
  for (std::size_t r = 1; r < r_ladder.size(); ++r)
    if (!(r_ladder[r] > r_ladder[r - 1]))
      throw DomainError("R ladder must be strictly increasing");
  for (double r : r_ladder)
    if (r < model.p_max()) throw ScalingTooSmall("every ladder R must be at least max_i p_i");
  if (z0.size() != static_cast<std::size_t>(model.k()))
    throw DimensionMismatch("z0 dimension does not match model");

  const Vec grid = detail::uniform_grid(t_max, grid_step);
  const std::vector<Vec> fms = detail::fms_on_grid(z0, model, t_max, grid_step);

  ConvergenceReport report;
  report.model_fingerprint = model.fingerprint();
  report.z0 = z0;
  report.t_max = t_max;
  report.grid_step = grid_step;
  report.seed = seed;

  for (std::size_t r = 0; r < r_ladder.size(); ++r) {
    const double R = r_ladder[r];
    IntegerState initial(model.k());
    for (int i = 0; i < model.k(); ++i) initial[i] = std::llround(R * z0[i]);
    const auto horizon = static_cast<std::uint64_t>(std::ceil(R * t_max));

    const std::vector<double> dists = detail::run_indexed(
        static_cast<std::size_t>(reps), [&, r](std::size_t rep) {
          const std::uint64_t replication = r * static_cast<std::uint64_t>(reps) + rep;
          SimPath path;
          if (couple) {
            CoupledPaths coupled =
                coupled_single_class_bound(model, R, horizon, initial, seed, replication);
            for (std::size_t n = 0; n < coupled.single_class.size(); ++n)
              if (coupled.single_class[n] > l1_norm(coupled.multiclass.states[n]))
                throw NumericFailure("single-class bound violated inside a coupled run");
            path = std::move(coupled.multiclass);
          } else {
            path = run_path(model, R, horizon, initial, seed, replication,
                            RenegingMode::Binomial);
          }
          const FluidTrajectory scaled = scaled_path(path, grid);
          double sup = 0.0;
          for (std::size_t j = 0; j < grid.size(); ++j)
            sup = std::max(sup, sup_dist(scaled.values[j], fms[j]));
          return sup;
        });

    LadderEntry entry;
    entry.R = R;
    entry.reps = reps;
    for (double d : dists) {
      entry.mean_sup_dist += d;
      entry.max_sup_dist = std::max(entry.max_sup_dist, d);
    }
    if (reps > 0) entry.mean_sup_dist /= reps;
    double ss = 0.0;
    for (double d : dists) ss += (d - entry.mean_sup_dist) * (d - entry.mean_sup_dist);
    entry.std_sup_dist = reps > 1 ? std::sqrt(ss / (reps - 1)) : 0.0;
    report.entries.push_back(entry);
  }
  return report;
}

/// The residual of the rescaled path against the fluid integral equation and
/// its exact split into the martingale part, the floor gap, the throughput
/// gap and the fractional-slot tail. The four parts sum to the residual.
struct ResidualSeries {
  Vec grid;
  std::vector<Vec> g_total;
  std::vector<Vec> martingale;
  std::vector<Vec> g1;
  std::vector<Vec> g2;
  std::vector<Vec> g3;
};

/// Evaluates the residual series on the fluid trajectory's grid. Integrals
/// of the piecewise-constant rescaled path are computed exactly (whole slots
/// plus the fractional last slot), so the decomposition identity holds to
/// round-off.
inline ResidualSeries residual_decomposition(const SimPath& path, const ValidatedModel& model,
                                             const FluidTrajectory& fms) {
  const int k = model.k();
  const double R = path.R;
  const std::size_t n_slots = path.events.size();

  // prefix sums over whole slots
  std::vector<Vec> pref_m(n_slots + 1, Vec(k, 0.0));
  std::vector<Vec> pref_hm(n_slots + 1, Vec(k, 0.0));
  std::vector<Vec> pref_w(n_slots + 1, Vec(k, 0.0));
  for (std::size_t n = 0; n < n_slots; ++n) {
    const Vec m = drift_direction_m(to_vec(path.states[n]), model.lambda());
    const Vec hm = success_probabilities(path.states[n]);
    for (int i = 0; i < k; ++i) {
      pref_m[n + 1][i] = pref_m[n][i] + m[i];
      pref_hm[n + 1][i] = pref_hm[n][i] + hm[i];
      pref_w[n + 1][i] = pref_w[n][i] + static_cast<double>(path.states[n][i]);
    }
  }
  const std::vector<Vec> mart = martingale_residual(path, model);

  ResidualSeries series;
  series.grid = fms.grid;
  const std::size_t n_grid = fms.grid.size();
  series.g_total.assign(n_grid, Vec(k, 0.0));
  series.martingale.assign(n_grid, Vec(k, 0.0));
  series.g1.assign(n_grid, Vec(k, 0.0));
  series.g2.assign(n_grid, Vec(k, 0.0));
  series.g3.assign(n_grid, Vec(k, 0.0));

  for (std::size_t j = 0; j < n_grid; ++j) {
    const double t = fms.grid[j];
    const std::uint64_t n = detail::slot_index(R, t);
    if (n > n_slots)
      throw GridMismatch("residual grid extends beyond the simulated horizon");
    const double floor_t = static_cast<double>(n) / R;
    const double frac = t - floor_t;
    const Vec m_now = drift_direction_m(to_vec(path.states[n]), model.lambda());
    for (int i = 0; i < k; ++i) {
      const double w_scaled = static_cast<double>(path.states[n][i]) / R;
      const double int_m = pref_m[n][i] / R + frac * m_now[i];
      const double int_w = pref_w[n][i] / (R * R) + frac * w_scaled;
      const double int_hm_floor = pref_hm[n][i] / R;
      const double lambda_i = model.lambda()[i];
      const double p_i = model.p()[i];

      series.g_total[j][i] = w_scaled - static_cast<double>(path.initial[i]) / R -
                             t * lambda_i + kInvE * int_m + p_i * int_w;
      series.martingale[j][i] = mart[n][i] / R;
      series.g1[j][i] = (floor_t - t) * lambda_i;
      series.g2[j][i] = kInvE * int_m - (1.0 - p_i / R) * int_hm_floor;
      series.g3[j][i] = p_i * frac * w_scaled;
    }
  }
  return series;
}

/// Minimum of |path(t)|_1 over the grid window [delta, Delta], one value per
/// path. Probes the bounded-away-from-zero behaviour of rescaled paths.
inline Vec positivity_probe(const std::vector<FluidTrajectory>& paths, double delta,
                            double big_delta) {
  if (!(0.0 < delta && delta < big_delta))
    throw DomainError("positivity probe needs 0 < delta < Delta");
  Vec minima;
  minima.reserve(paths.size());
  for (const auto& path : paths) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < path.grid.size(); ++j)
      if (path.grid[j] >= delta && path.grid[j] <= big_delta)
        lo = std::min(lo, l1_norm(path.values[j]));
    minima.push_back(lo);
  }
  return minima;
}

struct StabilityRow {
  Vec z0;
  double terminal_distance = 0.0;  // sup-norm distance of z(t_max) to z_e
  bool v_monotone = false;         // Lyapunov value non-increasing along the grid
};

/// Integrates each initial state and reports the terminal distance to the
/// equilibrium plus whether the Lyapunov value decreased monotonically
/// (within 1e-8 slack).
inline std::vector<StabilityRow> stability_experiment(const ValidatedModel& model,
                                                      const std::vector<Vec>& z0_list,
                                                      double t_max, double dt) {
  const EquilibriumResult eq = equilibrium(model);
  std::vector<StabilityRow> rows;
  rows.reserve(z0_list.size());
  for (const Vec& z0 : z0_list) {
    const FluidTrajectory traj = integrate_fms(z0, model, t_max, dt);
    StabilityRow row;
    row.z0 = z0;
    row.terminal_distance = sup_dist(traj.values.back(), eq.z_e);
    row.v_monotone = true;
    double prev = lyapunov_value(traj.values.front(), eq.z_e);
    for (std::size_t j = 1; j < traj.values.size(); ++j) {
      const double v = lyapunov_value(traj.values[j], eq.z_e);
      if (v > prev + 1e-8) {
        row.v_monotone = false;
        break;
      }
      prev = v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace aloha
