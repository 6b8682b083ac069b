#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aloha/errors.hpp"
#include "aloha/model.hpp"

namespace aloha {

inline constexpr std::uint64_t kDefaultSeed = 123456789;

struct SimulateCfg {
  double R = 1.0;
  std::optional<std::uint64_t> horizon;  // slots; alternative to t_max
  std::optional<double> t_max;
  Vec z0;
  std::optional<std::uint64_t> seed;
};

struct FluidCfg {
  Vec z0;
  double t_max = 10.0;
  double dt = 1e-3;
};

struct EquilibriumCfg {};

struct ConvergeCfg {
  Vec r_ladder;
  int reps = 1;
  double t_max = 5.0;
  double grid_step = 0.01;
  Vec z0;
  std::optional<std::uint64_t> seed;
};

struct ValidateCfg {};

using ExperimentCfg =
    std::variant<SimulateCfg, FluidCfg, EquilibriumCfg, ConvergeCfg, ValidateCfg>;

struct RunConfig {
  ModelParams model;
  ExperimentCfg experiment;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& name,
                                           const std::string& context) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError("missing field: " + context + "." + name);
  return *it;
}

inline Vec parse_real_vector(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of numbers");
  Vec out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(what + " must contain only numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(what + " must contain only finite numbers");
    out.push_back(x);
  }
  return out;
}

inline ArrivalSpec parse_arrival(const nlohmann::json& j, const Vec& lambda) {
  if (j.is_null()) return IndependentPoisson{lambda};
  const std::string type = require_field(j, "type", "model.arrival").get<std::string>();
  if (type == "poisson") {
    if (j.contains("rates")) return IndependentPoisson{parse_real_vector(j["rates"], "rates")};
    return IndependentPoisson{lambda};
  }
  if (type == "categorical") {
    Categorical cat;
    const auto& support = require_field(j, "support", "model.arrival");
    if (!support.is_array()) throw ParseError("model.arrival.support must be an array");
    for (const auto& vec : support) {
      IntegerState s;
      for (const auto& v : vec) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
          throw ParseError("categorical support entries must be nonnegative integers");
        s.push_back(v.get<std::int64_t>());
      }
      cat.support.push_back(std::move(s));
    }
    cat.probs = parse_real_vector(require_field(j, "probs", "model.arrival"), "probs");
    return cat;
  }
  throw ParseError("unknown arrival type: " + type);
}

inline std::optional<std::uint64_t> parse_seed_field(const nlohmann::json& j) {
  if (!j.contains("seed")) return std::nullopt;
  if (!j["seed"].is_number_unsigned()) throw ParseError("seed must be a nonnegative integer");
  return j["seed"].get<std::uint64_t>();
}

}  // namespace detail

namespace detail {
RunConfig parse_config_impl(const nlohmann::json& j);
}

/// Parses and validates a JSON run configuration. Model assumptions are
/// checked here, so a returned RunConfig always carries a valid model.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return detail::parse_config_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config field has the wrong type: ") + e.what());
  }
}

inline RunConfig detail::parse_config_impl(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config root must be an object");

  const auto& jm = detail::require_field(j, "model", "config");
  RunConfig cfg;
  const bool categorical = jm.contains("arrival") && jm["arrival"].contains("type") &&
                           jm["arrival"]["type"] == "categorical";
  if (jm.contains("lambda"))
    cfg.model.lambda = detail::parse_real_vector(jm["lambda"], "model.lambda");
  else if (!categorical)
    throw ParseError("missing field: model.lambda");
  cfg.model.p = detail::parse_real_vector(detail::require_field(jm, "p", "model"), "model.p");
  cfg.model.arrival = detail::parse_arrival(jm.contains("arrival") ? jm["arrival"] : nlohmann::json(),
                                            cfg.model.lambda);
  if (categorical && cfg.model.lambda.empty()) {
    // lambda derives from the categorical spec
    cfg.model.lambda = detail::categorical_mean(std::get<Categorical>(cfg.model.arrival));
  }

  validate_params(cfg.model);  // throws AssumptionViolated / dimension errors

  int blocks = 0;
  for (const char* name : {"simulate", "fluid", "equilibrium", "converge", "validate"})
    if (j.contains(name)) ++blocks;
  if (blocks != 1)
    throw ParseError("config must contain exactly one experiment block "
                     "(simulate | fluid | equilibrium | converge | validate)");

  if (j.contains("simulate")) {
    const auto& je = j["simulate"];
    SimulateCfg e;
    e.R = detail::require_field(je, "R", "simulate").get<double>();
    if (je.contains("horizon")) {
      if (!je["horizon"].is_number_unsigned())
        throw ParseError("simulate.horizon must be a nonnegative integer");
      e.horizon = je["horizon"].get<std::uint64_t>();
    }
    if (je.contains("t_max")) e.t_max = je["t_max"].get<double>();
    if (!e.horizon && !e.t_max) throw ParseError("simulate needs horizon or t_max");
    e.z0 = detail::parse_real_vector(detail::require_field(je, "z0", "simulate"), "simulate.z0");
    e.seed = detail::parse_seed_field(je);
    cfg.experiment = e;
  } else if (j.contains("fluid")) {
    const auto& je = j["fluid"];
    FluidCfg e;
    e.z0 = detail::parse_real_vector(detail::require_field(je, "z0", "fluid"), "fluid.z0");
    e.t_max = detail::require_field(je, "t_max", "fluid").get<double>();
    e.dt = je.contains("dt") ? je["dt"].get<double>() : 1e-3;
    if (!(e.dt > 0.0) || !(e.t_max > 0.0)) throw ParseError("fluid needs t_max > 0 and dt > 0");
    cfg.experiment = e;
  } else if (j.contains("equilibrium")) {
    cfg.experiment = EquilibriumCfg{};
  } else if (j.contains("converge")) {
    const auto& je = j["converge"];
    ConvergeCfg e;
    e.r_ladder = detail::parse_real_vector(detail::require_field(je, "R_ladder", "converge"),
                                           "converge.R_ladder");
    e.reps = detail::require_field(je, "reps", "converge").get<int>();
    e.t_max = detail::require_field(je, "t_max", "converge").get<double>();
    e.grid_step = je.contains("grid_step") ? je["grid_step"].get<double>() : 0.01;
    e.z0 = detail::parse_real_vector(detail::require_field(je, "z0", "converge"), "converge.z0");
    e.seed = detail::parse_seed_field(je);
    if (e.reps < 1) throw ParseError("converge.reps must be >= 1");
    if (!(e.grid_step > 0.0) || !(e.t_max > 0.0))
      throw ParseError("converge needs t_max > 0 and grid_step > 0");
    cfg.experiment = e;
  } else {
    cfg.experiment = ValidateCfg{};
  }
  return cfg;
}

}  // namespace aloha
