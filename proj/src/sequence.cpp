#include "amnet/sequence.hpp"

#include <stdexcept>

#include "amnet/errors.hpp"

namespace amnet {

Image SequenceRecord::frame(std::size_t i) const {
  if (i >= size()) {
    throw std::out_of_range(name + ": frame " + std::to_string(i) + " of " + std::to_string(size()));
  }
  return frames.empty() ? load_image(frame_paths[i]) : frames[i];
}

void SequenceRecord::validate() const {
  if (!frames.empty() && !frame_paths.empty()) {
    throw DataError(name + ": both in-memory frames and frame paths set");
  }
  if (gt.size() != size()) {
    throw DataError(name + ": " + std::to_string(size()) + " frames but " + std::to_string(gt.size()) +
                    " ground-truth boxes");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].valid()) throw DataError(name + ": invalid ground-truth box at frame " + std::to_string(i));
  }
}

}  // namespace amnet
