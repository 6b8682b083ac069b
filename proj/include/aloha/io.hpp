#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aloha/errors.hpp"
#include "aloha/fluid.hpp"
#include "aloha/harness.hpp"
#include "aloha/simulator.hpp"

namespace aloha {

/// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // drop digits while the value still reads back identically
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

/// Writes content to a temporary file in the target directory and renames it
/// into place, so readers never observe a partial artifact.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  const auto dir = path.parent_path().empty() ? "." : path.parent_path();
  std::filesystem::create_directories(dir, ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " into place: " + ec.message());
}

inline std::string sim_path_csv(const SimPath& path) {
  const std::size_t k = path.initial.size();
  std::ostringstream os;
  os << "slot";
  for (std::size_t i = 1; i <= k; ++i) os << ",w_" << i;
  os << ",success_class";
  for (std::size_t i = 1; i <= k; ++i) os << ",reneged_" << i;
  for (std::size_t i = 1; i <= k; ++i) os << ",arrivals_" << i;
  os << "\n";
  for (std::size_t n = 0; n < path.states.size(); ++n) {
    os << n;
    for (std::size_t i = 0; i < k; ++i) os << "," << path.states[n][i];
    if (n == 0) {
      os << ",0";
      for (std::size_t i = 0; i < 2 * k; ++i) os << ",0";
    } else {
      const SlotEvent& ev = path.events[n - 1];
      os << "," << ev.success_class;
      for (std::size_t i = 0; i < k; ++i) os << "," << ev.reneged[i];
      for (std::size_t i = 0; i < k; ++i) os << "," << ev.arrivals[i];
    }
    os << "\n";
  }
  return os.str();
}

inline std::string trajectory_csv(const FluidTrajectory& traj) {
  const std::size_t k = traj.values.empty() ? 0 : traj.values[0].size();
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 1; i <= k; ++i) os << ",z_" << i;
  os << "\n";
  for (std::size_t j = 0; j < traj.grid.size(); ++j) {
    os << fmt_double(traj.grid[j]);
    for (std::size_t i = 0; i < k; ++i) os << "," << fmt_double(traj.values[j][i]);
    os << "\n";
  }
  return os.str();
}

inline std::string equilibrium_json(const EquilibriumResult& eq) {
  nlohmann::json j;
  j["z_e"] = eq.z_e;
  j["x_root"] = eq.x_root;
  j["residual"] = eq.residual;
  return j.dump(2) + "\n";
}

inline std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "R,reps,mean_sup_dist,max_sup_dist,std_sup_dist\n";
  for (const LadderEntry& e : report.entries) {
    os << fmt_double(e.R) << "," << e.reps << "," << fmt_double(e.mean_sup_dist) << ","
       << fmt_double(e.max_sup_dist) << "," << fmt_double(e.std_sup_dist) << "\n";
  }
  return os.str();
}

/// Parses the table written by convergence_csv (used for round-trip checks
/// and external tooling).
inline std::vector<LadderEntry> parse_convergence_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "R,reps,mean_sup_dist,max_sup_dist,std_sup_dist")
    throw ParseError("unexpected convergence CSV header");
  std::vector<LadderEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    LadderEntry e;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    e.R = std::strtod(field.c_str(), nullptr);
    std::getline(row, field, ',');
    e.reps = static_cast<int>(std::strtol(field.c_str(), nullptr, 10));
    std::getline(row, field, ',');
    e.mean_sup_dist = std::strtod(field.c_str(), nullptr);
    std::getline(row, field, ',');
    e.max_sup_dist = std::strtod(field.c_str(), nullptr);
    std::getline(row, field, ',');
    e.std_sup_dist = std::strtod(field.c_str(), nullptr);
    out.push_back(e);
  }
  return out;
}

inline std::string residual_csv(const ResidualSeries& series) {
  const std::size_t k = series.g_total.empty() ? 0 : series.g_total[0].size();
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 1; i <= k; ++i)
    os << ",g_total_" << i << ",m_" << i << ",g1_" << i << ",g2_" << i << ",g3_" << i;
  os << "\n";
  for (std::size_t j = 0; j < series.grid.size(); ++j) {
    os << fmt_double(series.grid[j]);
    for (std::size_t i = 0; i < k; ++i) {
      os << "," << fmt_double(series.g_total[j][i]) << "," << fmt_double(series.martingale[j][i])
         << "," << fmt_double(series.g1[j][i]) << "," << fmt_double(series.g2[j][i]) << ","
         << fmt_double(series.g3[j][i]);
    }
    os << "\n";
  }
  return os.str();
}

inline void report_write(const ConvergenceReport& report, const std::filesystem::path& path) {
  write_atomic(path, convergence_csv(report));
}

}  // namespace aloha
