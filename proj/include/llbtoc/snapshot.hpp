#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "llbtoc/control.hpp"
#include "llbtoc/field.hpp"

namespace llbtoc {

enum class SnapshotRole : std::uint32_t { state = 0, adjoint = 1, control = 2, linearized = 3, second_variation = 4 };

struct Snapshot {
  VectorField field;
  SnapshotRole role = SnapshotRole::state;
};

/// Binary layout, all little-endian:
///   "LLBF" | u32 version (1) | u32 role | u32 dim | u32 cells[dim] | f64 extent[dim]
///   | f64 values, xyz-interleaved, cells in storage order (axis 0 fastest).
void write_snapshot(const std::filesystem::path& path, const VectorField& field,
                    SnapshotRole role = SnapshotRole::state);
Snapshot read_snapshot(const std::filesystem::path& path);

std::string encode_snapshot(const VectorField& field, SnapshotRole role = SnapshotRole::state);
Snapshot decode_snapshot(const std::string& bytes);

/// Control file: JSON {"times": [...], "frames": ["frame_0000.llbf", ...]} with frame paths
/// relative to the JSON file.
void write_control(const std::filesystem::path& json_path, const ControlTrajectory& u);
ControlTrajectory read_control(const std::filesystem::path& json_path);

}  // namespace llbtoc
