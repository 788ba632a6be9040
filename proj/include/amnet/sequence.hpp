#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amnet/bbox.hpp"
#include "amnet/image.hpp"

namespace amnet {

/// A tracking sequence with one ground-truth box per frame. Frames live
/// either in memory or on disk (loaded on access).
struct SequenceRecord {
  std::string name;
  std::vector<BBox> gt;
  std::vector<Image> frames;
  std::vector<std::filesystem::path> frame_paths;

  [[nodiscard]] std::size_t size() const { return frames.empty() ? frame_paths.size() : frames.size(); }
  /// Throws DataError if a frame file cannot be read, std::out_of_range past the end.
  [[nodiscard]] Image frame(std::size_t i) const;
  /// Throws DataError unless frame and box counts agree and every box is valid.
  void validate() const;
};

}  // namespace amnet
