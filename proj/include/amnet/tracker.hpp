#pragma once

// Frame-by-frame inference: crop, one forward pass, argmax, re-center.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "amnet/bbox.hpp"
#include "amnet/image.hpp"
#include "amnet/network.hpp"
#include "amnet/params.hpp"

namespace amnet {

/// Anything that turns (ROI_t, ROI_{t-1}, template) into a response map.
class ResponseNetwork {
 public:
  virtual ~ResponseNetwork() = default;
  [[nodiscard]] virtual std::size_t template_size() const = 0;
  [[nodiscard]] virtual std::size_t roi_size() const = 0;
  /// Returns a 1x1xRxR map over the ROI, R = roi_size(). Counts calls.
  Tensor<float> forward(const Tensor<float>& roi_t, const Tensor<float>& roi_prev,
                        const Tensor<float>& tmpl);
  [[nodiscard]] std::uint64_t forward_calls() const { return calls_; }
  /// Wall-clock seconds spent inside forward() so far.
  [[nodiscard]] double forward_seconds() const { return seconds_; }

 protected:
  virtual Tensor<float> run(const Tensor<float>& roi_t, const Tensor<float>& roi_prev,
                            const Tensor<float>& tmpl) = 0;

 private:
  std::uint64_t calls_ = 0;
  double seconds_ = 0.0;
};

/// The trained two-stream network in inference mode. Responds with the
/// fusion logits: same argmax as O_AM, but no ties where the sigmoid
/// saturates in float.
class AmnetResponse : public ResponseNetwork {
 public:
  /// Checks the parameter layout against `cfg` (std::invalid_argument).
  AmnetResponse(ModelConfig cfg, const ParamStore<float>& params);
  [[nodiscard]] std::size_t template_size() const override { return cfg_.template_size; }
  [[nodiscard]] std::size_t roi_size() const override { return cfg_.roi_size; }
  [[nodiscard]] const ModelConfig& config() const { return cfg_; }

 protected:
  Tensor<float> run(const Tensor<float>& roi_t, const Tensor<float>& roi_prev,
                    const Tensor<float>& tmpl) override;

 private:
  ModelConfig cfg_;
  const ParamStore<float>& params_;
};

struct TrackState {
  BBox bbox;
  Tensor<float> template_patch;  ///< 1x3xTxT
  Tensor<float> prev_roi_patch;  ///< 1x3xRxR
  SquareCrop roi;                ///< geometry of the last ROI crop
};

/// Crop geometry for a box: template side max(w, h), ROI side scaled by
/// roi_size / template_size.
SquareCrop template_crop(const BBox& box);
SquareCrop roi_crop(const BBox& box, const ResponseNetwork& net);

/// Map index q (row or column) of an N-sample crop to the image coordinate it
/// localizes, and back. Index N/2 maps to the crop center.
double map_to_image(double q, double origin, double side, std::size_t n);
double image_to_map(double p, double origin, double side, std::size_t n);

/// First maximum in row-major order (smallest row, then column).
std::pair<std::size_t, std::size_t> argmax2d(const Tensor<float>& map);

/// Throws std::invalid_argument for a degenerate box.
TrackState track_init(const ResponseNetwork& net, const Image& frame0, const BBox& bbox0);
/// Advances one frame; returns the new box (also stored in `state`).
BBox track_step(ResponseNetwork& net, TrackState& state, const Image& frame);

struct TrackResult {
  std::vector<BBox> boxes;
  double fps = 0.0;                 ///< frames 1..N over wall-clock time
  double mean_forward_ms = 0.0;     ///< network forward latency per frame
  std::uint64_t forward_calls = 0;  ///< for this sequence only
};

/// Runs from the given initial box; frame 0's output is bbox0 verbatim.
/// `frame(i)` supplies frame i of `count`. Throws std::invalid_argument when
/// count is 0.
TrackResult track_sequence(ResponseNetwork& net, std::size_t count,
                           const std::function<Image(std::size_t)>& frame, const BBox& bbox0);
TrackResult track_sequence(ResponseNetwork& net, std::span<const Image> frames, const BBox& bbox0);

}  // namespace amnet
