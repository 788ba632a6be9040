#include "amnet/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "amnet/model.hpp"

namespace amnet {

Tensor<float> ResponseNetwork::forward(const Tensor<float>& roi_t, const Tensor<float>& roi_prev,
                                       const Tensor<float>& tmpl) {
  const auto t0 = std::chrono::steady_clock::now();
  Tensor<float> out = run(roi_t, roi_prev, tmpl);
  seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++calls_;
  return out;
}

AmnetResponse::AmnetResponse(ModelConfig cfg, const ParamStore<float>& params)
    : cfg_(std::move(cfg)), params_(params) {
  cfg_.validate();
  check_layout(params_, cfg_);
}

Tensor<float> AmnetResponse::run(const Tensor<float>& roi_t, const Tensor<float>& roi_prev,
                                 const Tensor<float>& tmpl) {
  Tape<float> tape(false);
  const NetContext<float> ctx(tape, params_);
  const ForwardVars f = amnet_forward(ctx, cfg_, tape.constant(roi_t), tape.constant(roi_prev),
                                      tape.constant(tmpl));
  return tape.value(f.logits);
}

SquareCrop template_crop(const BBox& box) {
  return {box.cx(), box.cy(), std::max(box.w, box.h)};
}

SquareCrop roi_crop(const BBox& box, const ResponseNetwork& net) {
  const double ratio = static_cast<double>(net.roi_size()) / static_cast<double>(net.template_size());
  return {box.cx(), box.cy(), ratio * std::max(box.w, box.h)};
}

double map_to_image(double q, double origin, double side, std::size_t n) {
  return origin + q * side / static_cast<double>(n);
}

double image_to_map(double p, double origin, double side, std::size_t n) {
  return (p - origin) * static_cast<double>(n) / side;
}

std::pair<std::size_t, std::size_t> argmax2d(const Tensor<float>& map) {
  const Dims d = map.dims();
  if (d.n != 1 || d.c != 1 || d.h == 0 || d.w == 0) {
    throw ShapeError("argmax2d: expected a 1x1xHxW map, got " + to_string(d));
  }
  std::size_t best = 0;
  const auto v = map.data();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return {best / d.w, best % d.w};
}

namespace {

void check_box(const BBox& b, const char* what) {
  if (!b.valid()) {
    throw std::invalid_argument(std::string(what) + ": degenerate box (" + std::to_string(b.x) + ", " +
                                std::to_string(b.y) + ", " + std::to_string(b.w) + ", " +
                                std::to_string(b.h) + ")");
  }
}

}  // namespace

TrackState track_init(const ResponseNetwork& net, const Image& frame0, const BBox& bbox0) {
  check_box(bbox0, "track_init");
  if (frame0.empty()) throw std::invalid_argument("track_init: empty frame");
  const auto mean = channel_mean(frame0);
  TrackState s;
  s.bbox = bbox0;
  s.template_patch = crop_resize(frame0, mean, template_crop(bbox0), net.template_size());
  s.roi = roi_crop(bbox0, net);
  s.prev_roi_patch = crop_resize(frame0, mean, s.roi, net.roi_size());
  return s;
}

BBox track_step(ResponseNetwork& net, TrackState& state, const Image& frame) {
  const auto mean = channel_mean(frame);
  const std::size_t n = net.roi_size();
  const Tensor<float> roi_t = crop_resize(frame, mean, state.roi, n);
  const Tensor<float> response = net.forward(roi_t, state.prev_roi_patch, state.template_patch);
  if (response.dims() != Dims{1, 1, n, n}) {
    throw ShapeError("track_step: response " + to_string(response.dims()) + ", expected " +
                     to_string(Dims{1, 1, n, n}));
  }
  const auto [r, c] = argmax2d(response);
  const double left = state.roi.cx - state.roi.side / 2.0;
  const double top = state.roi.cy - state.roi.side / 2.0;
  const double cx = map_to_image(static_cast<double>(c), left, state.roi.side, n);
  const double cy = map_to_image(static_cast<double>(r), top, state.roi.side, n);
  state.bbox = BBox::centered(cx, cy, state.bbox.w, state.bbox.h);
  state.template_patch = crop_resize(frame, mean, template_crop(state.bbox), net.template_size());
  state.roi = roi_crop(state.bbox, net);
  state.prev_roi_patch = crop_resize(frame, mean, state.roi, n);
  return state.bbox;
}

TrackResult track_sequence(ResponseNetwork& net, std::size_t count,
                           const std::function<Image(std::size_t)>& frame, const BBox& bbox0) {
  if (count == 0) throw std::invalid_argument("track_sequence: empty sequence");
  using clock = std::chrono::steady_clock;
  TrackResult out;
  out.boxes.reserve(count);
  const std::uint64_t calls0 = net.forward_calls();
  const double fwd0 = net.forward_seconds();
  TrackState state = track_init(net, frame(0), bbox0);
  out.boxes.push_back(bbox0);
  const auto t0 = clock::now();
  for (std::size_t i = 1; i < count; ++i) {
    const Image img = frame(i);
    out.boxes.push_back(track_step(net, state, img));
  }
  const double secs = std::chrono::duration<double>(clock::now() - t0).count();
  out.forward_calls = net.forward_calls() - calls0;
  if (count > 1) {
    if (secs > 0) out.fps = static_cast<double>(count - 1) / secs;
    out.mean_forward_ms = 1000.0 * (net.forward_seconds() - fwd0) / static_cast<double>(out.forward_calls);
  }
  return out;
}

TrackResult track_sequence(ResponseNetwork& net, std::span<const Image> frames, const BBox& bbox0) {
  return track_sequence(net, frames.size(), [&](std::size_t i) { return frames[i]; }, bbox0);
}

}  // namespace amnet
