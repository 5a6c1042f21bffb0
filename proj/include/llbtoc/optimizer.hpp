#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "llbtoc/objective.hpp"

namespace llbtoc {

enum class OptimizeMode { reduced, penalty };

struct AdmissibleSet {
  enum class Kind { whole_space, ball };
  Kind kind = Kind::whole_space;
  double radius = 0.0;
};

/// Identity on the whole space; u·min(1, R/‖u‖_𝒰) for the centred ball.
ControlTrajectory project_Uad(const ControlTrajectory& u, const AdmissibleSet& set, const SobolevMetric& metric);

struct ProbeConfig {
  int count = 8;
  std::uint64_t seed = 12345;
  /// Spatial and temporal cosine modes per probe.
  int space_modes = 3;
  int time_modes = 3;
  double y_tol = 1e-8;
};

struct OptimizeConfig {
  OptimizeMode mode = OptimizeMode::reduced;
  int max_iters = 200;
  double c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double initial_step = 1.0;
  /// 𝒰-norm of the gradient (whole space) or of u − Π(u − g) (ball).
  double grad_tol = 1e-6;
  AdmissibleSet uad;

  // Augmented-Lagrangian (penalty) mode.
  double mu0 = 10.0;
  double mu_growth = 10.0;
  double mu_max = 1e10;
  int outer_iters = 30;
  int inner_iters = 200;
  int lbfgs_memory = 8;
  double inner_tol = 1e-8;
  /// Target for |‖m(T) − m_Ω‖² − δ²|.
  double feasibility_tol = 1e-8;
  /// Starting final time; ≤ 0 picks the hitting time of u_init (or half the horizon if it misses).
  double initial_T = 0.0;

  ProbeConfig probes;
  bool report = true;
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double time_term = 0.0;
  double control_term = 0.0;
  double grad_norm = 0.0;
  double T = 0.0;
  double constraint_violation = 0.0;
};

struct ProbeResult {
  std::string kind;  // "feasible", "descent" or "critical"
  double Y = 0.0;
  double D = 0.0;
  double G = 0.0;
  double Q = 0.0;
};

struct OptimalityReport {
  double t_hit = 0.0;
  double horizon = 0.0;
  double J = 0.0;
  double grad_norm = 0.0;
  TransversalityCheck transversality;
  bool con1 = false;
  std::vector<ProbeResult> probes;
  double min_Y = 0.0;
  double min_Q = 0.0;
  bool y_ok = false;
  bool q_ok = false;
  bool verdict = false;
};

struct OptimizeResult {
  ControlTrajectory u;
  double T = 0.0;
  std::vector<IterationRecord> history;
  bool converged = false;
  std::string message;
  OptimalityReport report;
  bool has_report = false;
};

/// Throws initial_control_misses_tube (reduced mode), line_search_failure, diverged.
OptimizeResult optimize(const Problem& problem, const ControlTrajectory& u_init, const OptimizeConfig& config);

/// Low-frequency cosine probes of unit 𝒰-norm, reproducible from the seed.
std::vector<ControlTrajectory> smooth_probes(const ControlTrajectory& shape, const SobolevMetric& metric,
                                             const ProbeConfig& config);

OptimalityReport check_optimality(const ControlTrajectory& u, const Problem& problem, const OptimizeConfig& config);

nlohmann::json to_json(const OptimalityReport& report);
nlohmann::json to_json(const TransversalityCheck& check);

/// Columns: iter, J, time_term, control_term, grad_norm, T, constraint_violation.
void write_iteration_log(const std::filesystem::path& path, const std::vector<IterationRecord>& history);
std::string iteration_log_csv(const std::vector<IterationRecord>& history);

}  // namespace llbtoc
