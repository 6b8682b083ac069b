#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace aloha {

using Vec = std::vector<double>;

/// Per-class customer counts; the Markov-chain state.
using IntegerState = std::vector<std::int64_t>;

inline double l1_norm(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline std::int64_t l1_norm(const IntegerState& x) {
  std::int64_t s = 0;
  for (auto v : x) s += v;
  return s;
}

/// max_i |x_i|
inline double sup_norm(const Vec& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

/// max_i |x_i - y_i|
inline double sup_dist(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s = std::max(s, std::abs(x[i] - y[i]));
  return s;
}

inline Vec to_vec(const IntegerState& x) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(x[i]);
  return out;
}

}  // namespace aloha
