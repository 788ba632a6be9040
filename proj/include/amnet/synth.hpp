#pragma once

// Seeded synthetic tracking sequences: value-noise background, a textured
// square target with near-constant velocity, optional camera shake and
// occlusion windows.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "amnet/sequence.hpp"

namespace amnet {

struct SynthConfig {
  std::size_t frame_width = 128, frame_height = 96;
  std::size_t target_size = 16;
  std::size_t num_frames = 100;
  /// Speed range in px/frame; direction is uniform. Ignored when `velocity` is set.
  double speed_min = 0.5, speed_max = 2.0;
  std::optional<std::array<double, 2>> velocity;
  /// Starting top-left corner; random when unset.
  std::optional<std::array<double, 2>> start;
  /// Std-dev of the per-frame Gaussian position noise (px).
  double position_jitter = 0.3;
  /// Global shift drawn uniformly from [-J, J] per frame and axis.
  int camera_jitter = 0;
  /// Occlusion windows: `occlusion_count` runs of `occlusion_length` frames
  /// in which the target is not drawn.
  std::size_t occlusion_length = 0, occlusion_count = 0;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct SynthSequence {
  SequenceRecord record;  ///< in-memory frames
  std::vector<std::array<int, 2>> camera_shift;  ///< content shift (dx, dy) per frame
  std::vector<bool> occluded;
};

SynthSequence synth_sequence(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace amnet
