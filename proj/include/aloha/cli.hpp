#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "aloha/config.hpp"
#include "aloha/errors.hpp"
#include "aloha/harness.hpp"
#include "aloha/io.hpp"
#include "aloha/picard.hpp"
#include "aloha/simulator.hpp"

namespace aloha {

namespace detail {

inline std::string run_validation_suites(const ValidatedModel& model) {
  std::ostringstream os;
  bool all_ok = true;
  auto suite = [&](const std::string& name, bool ok) {
    os << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
    all_ok = all_ok && ok;
  };

  suite("parameter-assumptions", true);  // validate_params already passed

  bool h_ok = throughput_h(0) == 0.0 && throughput_h(1) == 1.0;
  double prev = throughput_h(1);
  for (std::int64_t n = 2; n <= 4096; ++n) {
    const double h = throughput_h(n);
    h_ok = h_ok && h < prev && h > kInvE;
    prev = h;
  }
  suite("throughput-kernel", h_ok);

  bool m_ok = true;
  const Vec m_zero = drift_direction_m(Vec(model.k(), 0.0), model.lambda());
  double sum = 0.0;
  for (double v : m_zero) sum += v;
  m_ok = m_ok && std::abs(sum - 1.0) <= 1e-14;
  suite("drift-direction", m_ok);

  bool s_ok = true;
  IntegerState probe(model.k(), 1);
  probe[0] = 3;
  const Vec probs = success_probabilities(probe);
  double psum = 0.0;
  for (double v : probs) psum += v;
  s_ok = std::abs(psum - throughput_h(l1_norm(probe))) <= 1e-14;
  suite("success-probabilities", s_ok);

  bool eq_ok = true;
  try {
    eq_ok = equilibrium(model).residual <= 1e-9;
  } catch (const Error&) {
    eq_ok = false;
  }
  suite("equilibrium-residual", eq_ok);

  os << (all_ok ? "ALL PASS" : "FAILURES PRESENT") << "\n";
  if (!all_ok) throw NumericFailure("model validation suites failed");
  return os.str();
}

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& override_seed,
                                  const std::optional<std::uint64_t>& config_seed) {
  if (override_seed) return *override_seed;
  if (config_seed) return *config_seed;
  return kDefaultSeed;
}

}  // namespace detail

/// Runs the configured experiment and writes its artifact (fixed filename
/// per experiment) into out_dir. Returns the process exit code.
inline int dispatch(const RunConfig& cfg, const std::filesystem::path& out_dir,
                    std::optional<std::uint64_t> seed_override = std::nullopt,
                    std::ostream& err = std::cerr) {
  try {
    const ValidatedModel model = validate_params(cfg.model);

    if (const auto* sim = std::get_if<SimulateCfg>(&cfg.experiment)) {
      const double R = sim->R;
      std::uint64_t horizon = sim->horizon
                                  ? *sim->horizon
                                  : static_cast<std::uint64_t>(std::ceil(R * *sim->t_max));
      if (sim->z0.size() != static_cast<std::size_t>(model.k()))
        throw DimensionMismatch("simulate.z0 dimension does not match model");
      IntegerState initial(model.k());
      for (int i = 0; i < model.k(); ++i) initial[i] = std::llround(R * sim->z0[i]);
      const std::uint64_t seed = detail::resolve_seed(seed_override, sim->seed);
      const SimPath path = run_path(model, R, horizon, initial, seed);
      write_atomic(out_dir / "path.csv", sim_path_csv(path));
    } else if (const auto* fl = std::get_if<FluidCfg>(&cfg.experiment)) {
      if (fl->z0.size() != static_cast<std::size_t>(model.k()))
        throw DimensionMismatch("fluid.z0 dimension does not match model");
      const FluidTrajectory traj = integrate_fms(fl->z0, model, fl->t_max, fl->dt);
      write_atomic(out_dir / "fluid.csv", trajectory_csv(traj));
    } else if (std::get_if<EquilibriumCfg>(&cfg.experiment)) {
      write_atomic(out_dir / "equilibrium.json", equilibrium_json(equilibrium(model)));
    } else if (const auto* cv = std::get_if<ConvergeCfg>(&cfg.experiment)) {
      const std::uint64_t seed = detail::resolve_seed(seed_override, cv->seed);
      const ConvergenceReport report = convergence_experiment(
          model, cv->z0, cv->r_ladder, cv->reps, cv->t_max, cv->grid_step, seed);
      write_atomic(out_dir / "converge.csv", convergence_csv(report));
    } else {
      write_atomic(out_dir / "validate.txt", detail::run_validation_suites(model));
    }
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace aloha
