#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/vec.hpp"

namespace aloha {

/// 1/e, the slotted-ALOHA throughput limit and the stability threshold of the
/// model without impatience.
inline constexpr double kInvE = 0.36787944117144233;

/// Independent Poisson arrivals per class.
struct IndependentPoisson {
  Vec rates;
};

/// Finite-support joint arrival distribution; coordinates may be dependent.
struct Categorical {
  std::vector<IntegerState> support;
  Vec probs;
};

using ArrivalSpec = std::variant<IndependentPoisson, Categorical>;

/// Raw, unvalidated model parameters.
struct ModelParams {
  Vec lambda;  // mean arrivals per slot per class
  Vec p;       // geometric impatience parameters, one per class
  ArrivalSpec arrival = IndependentPoisson{};
};

/// Immutable handle returned by validate_params(); every other module takes
/// one of these, so downstream code never re-checks the assumptions.
class ValidatedModel {
public:
  int k() const { return static_cast<int>(lambda_.size()); }
  const Vec& lambda() const { return lambda_; }
  const Vec& p() const { return p_; }
  const ArrivalSpec& arrival() const { return arrival_; }
  double lambda_sum() const { return lambda_sum_; }
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }

  /// Canonical text form; used as the report fingerprint.
  std::string fingerprint() const;

  friend ValidatedModel validate_params(const ModelParams& raw);

private:
  ValidatedModel() = default;

  Vec lambda_;
  Vec p_;
  ArrivalSpec arrival_;
  double lambda_sum_ = 0.0;
  double p_min_ = 0.0;
  double p_max_ = 0.0;
};

namespace detail {

inline Vec categorical_mean(const Categorical& cat) {
  const std::size_t k = cat.support.empty() ? 0 : cat.support[0].size();
  Vec mean(k, 0.0);
  for (std::size_t o = 0; o < cat.support.size(); ++o)
    for (std::size_t i = 0; i < k; ++i)
      mean[i] += cat.probs[o] * static_cast<double>(cat.support[o][i]);
  return mean;
}

}  // namespace detail

/// Checks every ModelParams invariant (dimensions, probability ranges,
/// Assumptions 1 and 2) and returns the immutable handle.
inline ValidatedModel validate_params(const ModelParams& raw) {
  std::size_t k = raw.lambda.size();
  if (k == 0) {
    // lambda may be omitted for categorical specs; the class count then
    // comes from the support vectors.
    if (const auto* cat = std::get_if<Categorical>(&raw.arrival); cat && !cat->support.empty())
      k = cat->support[0].size();
  }
  if (k < 1) throw DimensionMismatch("model needs at least one class");
  if (raw.p.size() != k)
    throw DimensionMismatch("model has " + std::to_string(k) + " classes but p has " +
                            std::to_string(raw.p.size()) + " entries");

  Vec lambda = raw.lambda;

  if (const auto* poisson = std::get_if<IndependentPoisson>(&raw.arrival)) {
    if (poisson->rates.size() != k)
      throw DimensionMismatch("poisson rates dimension does not match lambda");
    for (std::size_t i = 0; i < k; ++i)
      if (poisson->rates[i] != lambda[i])
        throw DomainError("poisson rates must equal lambda exactly");
  } else {
    const auto& cat = std::get<Categorical>(raw.arrival);
    if (cat.support.empty()) throw DomainError("categorical arrival spec has empty support");
    if (cat.probs.size() != cat.support.size())
      throw DimensionMismatch("categorical probs and support sizes differ");
    double prob_sum = 0.0;
    for (double q : cat.probs) {
      if (!(q >= 0.0)) throw InvalidProbability("categorical probabilities must be >= 0");
      prob_sum += q;
    }
    if (std::abs(prob_sum - 1.0) > 1e-12)
      throw InvalidProbability("categorical probabilities must sum to 1");
    bool nontrivial = false;
    for (std::size_t o = 0; o < cat.support.size(); ++o) {
      if (cat.support[o].size() != k)
        throw DimensionMismatch("categorical support vector dimension does not match model");
      std::int64_t total = 0;
      for (auto v : cat.support[o]) {
        if (v < 0) throw DomainError("categorical support vectors must be nonnegative");
        total += v;
      }
      if (total >= 2 && cat.probs[o] > 0.0) nontrivial = true;
    }
    if (!nontrivial)
      throw AssumptionViolated(1,
                               "the input process is trivial: no arrival batch of size >= 2 "
                               "has positive probability");
    // lambda comes from the distribution itself, never from the caller.
    lambda = detail::categorical_mean(cat);
    if (!raw.lambda.empty()) {
      if (raw.lambda.size() != k)
        throw DimensionMismatch("lambda dimension does not match categorical support");
      for (std::size_t i = 0; i < k; ++i)
        if (std::abs(raw.lambda[i] - lambda[i]) > 1e-12)
          throw DomainError("supplied lambda disagrees with the categorical arrival mean");
    }
  }

  double lambda_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i]))
      throw DomainError("lambda_" + std::to_string(i + 1) + " must be a positive real");
    lambda_sum += lambda[i];
  }
  double p_min = 1.0, p_max = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(raw.p[i] > 0.0 && raw.p[i] <= 1.0))
      throw InvalidProbability("p_" + std::to_string(i + 1) + " must lie in (0,1]");
    p_min = std::min(p_min, raw.p[i]);
    p_max = std::max(p_max, raw.p[i]);
  }
  if (!(lambda_sum > kInvE)) {
    std::ostringstream msg;
    msg << "total mean arrival rate " << lambda_sum
        << " never exceeds the stability threshold e^-1 = " << kInvE;
    throw AssumptionViolated(2, msg.str());
  }

  ValidatedModel m;
  m.lambda_ = lambda;
  m.p_ = raw.p;
  m.arrival_ = raw.arrival;
  m.lambda_sum_ = lambda_sum;
  m.p_min_ = p_min;
  m.p_max_ = p_max;
  return m;
}

inline std::string ValidatedModel::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "K=" << k() << ";lambda=";
  for (double v : lambda_) os << v << ",";
  os << ";p=";
  for (double v : p_) os << v << ",";
  if (std::holds_alternative<IndependentPoisson>(arrival_)) {
    os << ";arrival=poisson";
  } else {
    const auto& cat = std::get<Categorical>(arrival_);
    os << ";arrival=categorical[";
    for (std::size_t o = 0; o < cat.support.size(); ++o) {
      os << "(";
      for (auto v : cat.support[o]) os << v << " ";
      os << ")*" << cat.probs[o];
    }
    os << "]";
  }
  return os.str();
}

/// Probability that exactly one of n customers transmits when each transmits
/// with probability 1/n. Equals 0 at n=0, 1 at n=1, (1-1/n)^(n-1) for n >= 2;
/// strictly decreasing for n >= 1 with limit 1/e.
inline double throughput_h(std::int64_t n) {
  if (n <= 0) return 0.0;
  if (n == 1) return 1.0;
  return std::exp(static_cast<double>(n - 1) * std::log1p(-1.0 / static_cast<double>(n)));
}

/// Drift direction x/|x|_1, extended to lambda/|lambda|_1 at the origin.
/// The output is renormalized so its coordinates sum to 1 exactly.
inline Vec drift_direction_m(const Vec& x, const Vec& lambda) {
  const Vec& src = (l1_norm(x) > 0.0) ? x : lambda;
  const double s = l1_norm(src);
  Vec out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i] / s;
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

/// Per-class probability that slot's single successful transmission comes
/// from class i: h(|x|_1) * x_i/|x|_1, and the zero vector at x = 0.
inline Vec success_probabilities(const IntegerState& x) {
  const std::int64_t n = l1_norm(x);
  Vec out(x.size(), 0.0);
  if (n == 0) return out;
  const double h = throughput_h(n);
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = h * (static_cast<double>(x[i]) / static_cast<double>(n));
  return out;
}

}  // namespace aloha
