#pragma once

#include <cstdint>
#include <filesystem>

#include "mtvloop/mpi.hpp"
#include "mtvloop/mtv.hpp"

namespace mtvloop {

// Binary formats are little-endian; see docs/formats.md for the byte layout.
inline constexpr uint32_t kStage1CheckpointVersion = 1;
inline constexpr uint32_t kMtvCheckpointVersion = 1;

struct Stage1Checkpoint {
  Mpi mpi;
  LoopableVolume loopable;
};

void save_stage1_checkpoint(const std::filesystem::path& path, const Mpi& mpi, const LoopableVolume& loopable);
Stage1Checkpoint load_stage1_checkpoint(const std::filesystem::path& path);

void save_mtv(const std::filesystem::path& path, const Mtv& mtv);
Mtv load_mtv(const std::filesystem::path& path);

// Rounds every parameter through float32, matching what a save/load round-trip yields.
void quantize_to_f32(Mpi& mpi, LoopableVolume& loopable);
void quantize_to_f32(Mtv& mtv);

}  // namespace mtvloop
