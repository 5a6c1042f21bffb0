#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llbtoc/optimizer.hpp"
#include "llbtoc/validation.hpp"

namespace llbtoc {

inline constexpr const char* kVersion = "0.1.0";

struct TaylorSettings {
  double rho_max = 1e-1;
  int count = 8;
  std::vector<SweepKind> kinds{SweepKind::state1, SweepKind::state2, SweepKind::time1, SweepKind::time2,
                               SweepKind::gradient};
};

/// Everything a CLI run needs, resolved from one JSON document.
struct RunConfig {
  /// The document after preset expansion and seed override; this is what gets hashed.
  nlohmann::json document;
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
  /// Files read while resolving the document.
  std::vector<std::filesystem::path> inputs;

  Grid grid;
  VectorField m0;
  TargetSpec target;
  SolverConfig solver;
  AdjointMode mode = AdjointMode::discrete;
  double transversality_eps = 1e-8;
  double gram_tol = 1e-12;
  ControlTrajectory control;
  /// Perturbation direction for adjoint, grad-check and taylor.
  ControlTrajectory direction;
  OptimizeConfig optimizer;
  TaylorSettings taylor;
  EnergyOptions energy;
  /// Snapshot every `stride`-th frame.
  std::size_t stride = 100;

  Problem problem() const;
};

/// Named starting points: "radial", "smooth-1d", "smooth-2d".
nlohmann::json preset_document(const std::string& name);

/// Expands "preset" (a top-level key naming a preset document, merged under the remaining keys),
/// applies `seed_override`, and resolves every field, control and setting.
/// Throws parse on malformed JSON or wrong types, invalid_argument on violated invariants,
/// io for missing input files and grid_mismatch for files on a different grid.
/// `patch` is merged into the document (JSON merge-patch) before anything else.
RunConfig parse_run_config(const nlohmann::json& document, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt,
                           const nlohmann::json& patch = nlohmann::json::object());

/// Reads a config file. A manifest written by a previous run is accepted as well; its recorded
/// config, base directory and seed are used.
RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt,
                          const nlohmann::json& patch = nlohmann::json::object());

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a of the compact dump of the document.
std::string config_hash(const nlohmann::json& document);

/// 1 io/other, 2 parse or invalid input, 3 unreachable target, 4 transversality, 5 diverged,
/// 6 non-convergence, 7 trivial case.
int exit_code(ErrorKind kind) noexcept;
inline constexpr int kExitVerificationFailed = 8;

}  // namespace llbtoc
