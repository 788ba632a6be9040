#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amnet/autodiff.hpp"
#include "amnet/params.hpp"

namespace amnet {

/// Architecture hyperparameters shared by both streams and the head.
struct ModelConfig {
  std::size_t template_size = 64;
  std::size_t roi_size = 192;
  std::vector<std::size_t> spotlight_kernels{3, 5, 7};
  std::vector<std::size_t> contrast_kernels{7, 5, 3};
  std::vector<std::size_t> pool_kernels{3, 5, 7};
  double gt_sigma_factor = 0.1;
  /// Feed the motion stream luminance (replicated to 3 channels) instead of RGB.
  bool mnet_luminance = false;

  /// Structural checks (odd non-empty kernel lists, minimum sizes, ROI
  /// divisible by the pooling cascade). Throws std::invalid_argument.
  void validate() const;
};

/// Binds parameters from a store onto a tape, either trainable (gradients
/// flow into the store) or frozen (inference).
template <typename T>
class NetContext {
 public:
  NetContext(Tape<T>& tape, ParamStore<T>& store) : tape_(tape), store_(&store), frozen_(nullptr) {}
  NetContext(Tape<T>& tape, const ParamStore<T>& store) : tape_(tape), store_(nullptr), frozen_(&store) {}

  [[nodiscard]] Tape<T>& tape() const { return tape_; }
  [[nodiscard]] Var param(const std::string& name) const {
    return store_ ? tape_.param(*store_, name) : tape_.param(*frozen_, name);
  }
  [[nodiscard]] const ParamStore<T>& store() const { return store_ ? *store_ : *frozen_; }

 private:
  Tape<T>& tape_;
  ParamStore<T>* store_;
  const ParamStore<T>* frozen_;
};

/// Name and dims of one parameter tensor.
struct ParamSpec {
  std::string name;
  Dims dims;
};

}  // namespace amnet
