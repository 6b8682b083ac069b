#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/fluid.hpp"
#include "aloha/model.hpp"
#include "aloha/rng.hpp"
#include "aloha/vec.hpp"

namespace aloha {

/// Everything that happened in one slot: arrivals added at the end of the
/// slot, the successful class if any (0 = collision or empty system), and
/// the per-class reneging counts.
struct SlotEvent {
  IntegerState arrivals;
  int success_class = 0;  // 1-based; 0 when no transmission succeeded
  IntegerState reneged;
};

/// One realization of the workload chain at scaling index R.
/// states.size() == events.size() + 1 and for every n
/// states[n+1] = states[n] + events[n].arrivals - T(n) - events[n].reneged.
struct SimPath {
  double R = 1.0;
  IntegerState initial;
  std::vector<IntegerState> states;
  std::vector<SlotEvent> events;
};

/// The uniform streams that drive one replication.
struct StreamSet {
  rng::StreamKey arrivals;
  rng::StreamKey transmission;
  rng::StreamKey reneging;
  rng::StreamKey reneging_binomial;
};

inline StreamSet make_streams(std::uint64_t master_seed, std::uint64_t replication) {
  return StreamSet{
      rng::derive_stream(master_seed, replication, rng::Purpose::arrivals),
      rng::derive_stream(master_seed, replication, rng::Purpose::transmission),
      rng::derive_stream(master_seed, replication, rng::Purpose::reneging),
      rng::derive_stream(master_seed, replication, rng::Purpose::reneging_binomial),
  };
}

/// Reneging sampler choice. PerCustomer spends one uniform per surviving
/// customer, which is what the coupling constructions share; Binomial is the
/// equal-in-law fast path for plain runs.
enum class RenegingMode { PerCustomer, Binomial };

namespace detail {

/// Class whose transmission succeeds in a slot, given the one uniform u;
/// 0 when the system is empty or the slot collides. The total-success test
/// is exactly u < h(|x|_1), and class i is picked when u falls under the
/// cumulative h(|x|_1) * (x_1+...+x_i)/|x|_1; the last cumulative equals
/// h(|x|_1) bit-for-bit, which the single-class coupling relies on.
inline int draw_success_class(const IntegerState& x, double u) {
  const std::int64_t n = l1_norm(x);
  if (n == 0) return 0;
  const double h = throughput_h(n);
  if (!(u < h)) return 0;
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cum += x[i];
    if (u < h * (static_cast<double>(cum) / static_cast<double>(n)))
      return static_cast<int>(i) + 1;
  }
  return static_cast<int>(x.size());
}

inline IntegerState draw_arrivals(const ValidatedModel& model, const StreamSet& streams,
                                  std::uint64_t slot) {
  IntegerState a(model.k(), 0);
  if (const auto* poisson = std::get_if<IndependentPoisson>(&model.arrival())) {
    for (int i = 0; i < model.k(); ++i)
      a[i] = rng::poisson_inverse(poisson->rates[i],
                                  rng::uniform01(streams.arrivals, slot, i));
  } else {
    const auto& cat = std::get<Categorical>(model.arrival());
    const double u = rng::uniform01(streams.arrivals, slot, 0);
    double cum = 0.0;
    std::size_t pick = cat.support.size() - 1;
    for (std::size_t o = 0; o < cat.support.size(); ++o) {
      cum += cat.probs[o];
      if (u < cum) {
        pick = o;
        break;
      }
    }
    a = cat.support[pick];
  }
  return a;
}

}  // namespace detail

/// Advances the chain by one slot. Transmissions resolve on the pre-arrival
/// population by testing one uniform against the cumulative success
/// probabilities; each survivor of class i then reneges with probability
/// p_i/R (uniforms indexed by the survivor's position in the class-ordered
/// enumeration, so couplings can share them); arrivals are appended last.
inline std::pair<IntegerState, SlotEvent> step(const IntegerState& state,
                                               const ValidatedModel& model, double R,
                                               const StreamSet& streams, std::uint64_t slot,
                                               RenegingMode mode = RenegingMode::PerCustomer) {
  if (R < model.p_max())
    throw ScalingTooSmall("scaling index R must be at least max_i p_i");
  const int k = model.k();

  SlotEvent ev;
  ev.reneged.assign(k, 0);

  IntegerState transmitted(k, 0);
  const double u = rng::uniform01(streams.transmission, slot, 0);
  ev.success_class = detail::draw_success_class(state, u);
  if (ev.success_class > 0) transmitted[ev.success_class - 1] = 1;

  std::uint64_t position = 0;  // global survivor index shared with couplings
  for (int i = 0; i < k; ++i) {
    const std::int64_t survivors = state[i] - transmitted[i];
    const double q = model.p()[i] / R;
    if (mode == RenegingMode::PerCustomer) {
      for (std::int64_t j = 0; j < survivors; ++j) {
        ++position;
        if (rng::uniform01(streams.reneging, slot, position) <= q) ++ev.reneged[i];
      }
    } else {
      ev.reneged[i] = rng::binomial_inverse(survivors, q,
                                            rng::uniform01(streams.reneging_binomial, slot, i));
    }
  }

  ev.arrivals = detail::draw_arrivals(model, streams, slot);

  IntegerState next(k);
  for (int i = 0; i < k; ++i)
    next[i] = state[i] + ev.arrivals[i] - transmitted[i] - ev.reneged[i];
  return {std::move(next), std::move(ev)};
}

/// Runs the chain for `horizon_slots` slots. Deterministic in
/// (model, R, horizon, initial, seed, replication, mode).
inline SimPath run_path(const ValidatedModel& model, double R, std::uint64_t horizon_slots,
                        const IntegerState& initial, std::uint64_t seed,
                        std::uint64_t replication = 0,
                        RenegingMode mode = RenegingMode::PerCustomer) {
  if (initial.size() != static_cast<std::size_t>(model.k()))
    throw DimensionMismatch("initial state dimension does not match model");
  for (auto v : initial)
    if (v < 0) throw DomainError("initial state must be nonnegative");
  const StreamSet streams = make_streams(seed, replication);
  SimPath path;
  path.R = R;
  path.initial = initial;
  path.states.reserve(horizon_slots + 1);
  path.events.reserve(horizon_slots);
  path.states.push_back(initial);
  IntegerState state = initial;
  for (std::uint64_t n = 0; n < horizon_slots; ++n) {
    auto [next, ev] = step(state, model, R, streams, n, mode);
    state = std::move(next);
    path.states.push_back(state);
    path.events.push_back(std::move(ev));
  }
  return path;
}

namespace detail {

/// Slot index for fluid time t: floor(R t), nudged so that a t equal to the
/// double rounding of n/R lands on slot n even when R*t rounds just below n.
inline std::uint64_t slot_index(double R, double t) {
  const double scaled = R * t;
  auto idx = static_cast<std::uint64_t>(std::floor(scaled));
  if (static_cast<double>(idx + 1) / R <= t) ++idx;
  return idx;
}

}  // namespace detail

/// Law-of-large-numbers rescaling of a path: value at grid time t is
/// states[floor(R t)]/R, piecewise constant, no interpolation.
inline FluidTrajectory scaled_path(const SimPath& path, const Vec& grid) {
  FluidTrajectory traj;
  traj.grid = grid;
  traj.values.reserve(grid.size());
  for (double t : grid) {
    const std::uint64_t idx = detail::slot_index(path.R, t);
    if (t < 0.0 || idx >= path.states.size())
      throw GridOutOfRange("grid time exceeds the simulated horizon");
    Vec v = to_vec(path.states[idx]);
    for (double& x : v) x /= path.R;
    traj.values.push_back(std::move(v));
  }
  return traj;
}

/// Centered residual of the stored path:
/// M(n) = W(n) - W(0) - n*lambda + sum_{i<n} h(|W(i)|_1) m(W(i))
///        + (p/R) * sum_{i<n} (W(i) - h(|W(i)|_1) m(W(i))),
/// a zero-mean martingale in n. M(0) = 0.
inline std::vector<Vec> martingale_residual(const SimPath& path, const ValidatedModel& model) {
  const int k = model.k();
  std::vector<Vec> m_series;
  m_series.reserve(path.states.size());
  m_series.emplace_back(k, 0.0);
  Vec sum_hm(k, 0.0);   // sum of h*m over past slots
  Vec sum_w(k, 0.0);    // sum of workloads over past slots
  for (std::size_t n = 1; n < path.states.size(); ++n) {
    const IntegerState& prev = path.states[n - 1];
    const Vec hm_prev = success_probabilities(prev);
    for (int i = 0; i < k; ++i) {
      sum_hm[i] += hm_prev[i];
      sum_w[i] += static_cast<double>(prev[i]);
    }
    Vec m(k);
    for (int i = 0; i < k; ++i) {
      m[i] = static_cast<double>(path.states[n][i]) - static_cast<double>(path.initial[i]) -
             static_cast<double>(n) * model.lambda()[i] + sum_hm[i] +
             model.p()[i] / path.R * (sum_w[i] - sum_hm[i]);
    }
    m_series.push_back(std::move(m));
  }
  return m_series;
}

/// Single-class transition on shared randomness: success iff U(n) < h(count),
/// then each survivor reneges iff U(n,j) <= p_tilde/R with j running from 1.
/// Exposed so coupling and monotonicity checks can drive it directly.
inline std::int64_t single_class_update(std::int64_t count, std::int64_t arrivals_total,
                                        double p_tilde, double R, const StreamSet& streams,
                                        std::uint64_t slot) {
  const double u = rng::uniform01(streams.transmission, slot, 0);
  const std::int64_t transmitted = (count > 0 && u < throughput_h(count)) ? 1 : 0;
  const std::int64_t survivors = count - transmitted;
  const double q = p_tilde / R;
  std::int64_t reneged = 0;
  for (std::int64_t j = 1; j <= survivors; ++j)
    if (rng::uniform01(streams.reneging, slot, static_cast<std::uint64_t>(j)) <= q) ++reneged;
  return count + arrivals_total - transmitted - reneged;
}

struct CoupledPaths {
  SimPath multiclass;
  std::vector<std::int64_t> single_class;  // totals, one per slot boundary
};

/// Runs the multiclass chain and the bounding single-class chain on the SAME
/// uniforms. The single-class chain starts from |W(0)|_1, sees arrivals
/// |A(n)|_1 and reneging parameter max_i p_i, and stays <= |W(n)|_1 at every
/// slot, exactly.
inline CoupledPaths coupled_single_class_bound(const ValidatedModel& model, double R,
                                               std::uint64_t horizon_slots,
                                               const IntegerState& initial, std::uint64_t seed,
                                               std::uint64_t replication = 0) {
  CoupledPaths out;
  out.multiclass.R = R;
  out.multiclass.initial = initial;
  out.multiclass.states.push_back(initial);
  out.single_class.push_back(l1_norm(initial));

  const StreamSet streams = make_streams(seed, replication);
  const double p_tilde = model.p_max();
  IntegerState state = initial;
  std::int64_t single = l1_norm(initial);
  for (std::uint64_t n = 0; n < horizon_slots; ++n) {
    auto [next, ev] = step(state, model, R, streams, n, RenegingMode::PerCustomer);
    single = single_class_update(single, l1_norm(ev.arrivals), p_tilde, R, streams, n);
    state = std::move(next);
    out.multiclass.states.push_back(state);
    out.multiclass.events.push_back(std::move(ev));
    out.single_class.push_back(single);
  }
  return out;
}

/// Monte Carlo estimate of the per-class success probabilities at a fixed
/// state: frequency of each success class over independent single-slot draws.
inline Vec empirical_success_rate(const ValidatedModel& model, const IntegerState& x,
                                  std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("empirical_success_rate needs at least one trial");
  const auto key = rng::derive_stream(seed, 0, rng::Purpose::transmission);
  Vec freq(model.k(), 0.0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const int cls = detail::draw_success_class(x, rng::uniform01(key, t, 0));
    if (cls > 0) freq[cls - 1] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(trials);
  return freq;
}

}  // namespace aloha
