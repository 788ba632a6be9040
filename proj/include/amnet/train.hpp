#pragma once

// Triplet sampling, minibatch Adam training and the learning-rate schedule.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "amnet/network.hpp"
#include "amnet/sequence.hpp"

namespace amnet {

struct TrainConfig {
  std::size_t batch_size = 16;
  double lr_start = 1e-3;
  double lr_end = 1e-5;
  std::size_t lr_step = 2000;  ///< steps between x0.1 drops
  double weight_decay = 0.005;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t steps = 200;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument.
  void validate() const;
  /// max(lr_end, lr_start * 0.1^floor(step / lr_step))
  [[nodiscard]] double lr_at(std::uint64_t step) const;
};

/// One training example: two ROIs cropped at the same geometry, the template
/// from the earlier frame, and the target's location at the later frame in
/// ROI map coordinates.
struct Triplet {
  Tensor<float> roi_t, roi_prev, tmpl;
  double peak_r = 0, peak_c = 0;
  double box_w = 0, box_h = 0;
};

/// Crops around the ground-truth box of frame t-1, with the ROI center moved
/// by (dx, dy) ROI pixels. Throws std::out_of_range unless 1 <= t < size and
/// DataError when the target at t falls outside the ROI.
Triplet make_triplet(const SequenceRecord& seq, std::size_t t, const ModelConfig& cfg, double dx,
                     double dy);
/// Random shift of up to roi_size / 12 ROI pixels per axis.
Triplet sample_triplet(const SequenceRecord& seq, std::size_t t, const ModelConfig& cfg,
                       std::mt19937_64& rng);

/// Leaves sum over samples / batch size of each per-sample gradient in the
/// store's grad tensors (reduced in sample order) and returns the mean loss.
/// Throws NumericError on a non-finite loss.
double batch_gradient(ParamStore<float>& params, const ModelConfig& cfg, std::span<const Triplet> batch);

/// batch_gradient followed by one Adam update at lr_at(step_count()).
double train_step(ParamStore<float>& params, const ModelConfig& cfg, const TrainConfig& tcfg,
                  std::span<const Triplet> batch);

struct TrainRecord {
  std::uint64_t step = 0;  ///< optimizer step index (0-based)
  double lr = 0;
  double loss = 0;
};

/// Runs tcfg.steps minibatch updates, sampling sequences and frames uniformly
/// from the corpus. Continues from params.step_count(). Throws NumericError
/// naming the step on a non-finite loss.
std::vector<TrainRecord> train(ParamStore<float>& params, const ModelConfig& cfg,
                               const TrainConfig& tcfg, std::span<const SequenceRecord> corpus,
                               const std::function<void(const TrainRecord&)>& on_step = {});

}  // namespace amnet
