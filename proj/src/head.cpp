#include "amnet/head.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amnet::head {

std::vector<ParamSpec> param_layout() {
  return {{std::string(kFuse) + ".weight", Dims{1, 2, 1, 1}},
          {std::string(kFuse) + ".bias", Dims{1, 1, 1, 1}}};
}

template <typename T>
Var fuse_logits(const NetContext<T>& ctx, Var o_a, Var o_m) {
  Tape<T>& tape = ctx.tape();
  const Dims da = tape.value(o_a).dims();
  const Dims dm = tape.value(o_m).dims();
  if (da.c != 1 || dm.c != 1 || da.n != dm.n) {
    throw ShapeError("fuse: expected single-channel maps, got " + to_string(da) + " and " + to_string(dm));
  }
  if (da.h > dm.h || da.w > dm.w) {
    throw ShapeError("fuse: appearance map " + to_string(da) + " larger than motion map " + to_string(dm));
  }
  // Correlation index i places the template center at ROI pixel i + T/2 with
  // T = roi - (out - 1); padding by T/2 before and the rest after aligns the
  // two maps pixel for pixel.
  const std::size_t th = dm.h - da.h + 1, tw = dm.w - da.w + 1;
  const Var a = ad::pad2d(tape, ad::standardize(tape, o_a), th / 2, dm.h - da.h - th / 2, tw / 2,
                          dm.w - da.w - tw / 2);
  const std::array<Var, 2> parts{ad::subtract_max(tape, a),
                                 ad::subtract_max(tape, ad::standardize(tape, o_m))};
  const Var stacked = ad::concat_depth<T>(tape, parts);
  const std::string name(kFuse);
  return ad::conv2d(tape, stacked, ctx.param(name + ".weight"), ctx.param(name + ".bias"),
                    ConvSpec::same(1, 2, 1));
}

template <typename T>
Var fuse(const NetContext<T>& ctx, Var o_a, Var o_m) {
  return ad::sigmoid(ctx.tape(), fuse_logits(ctx, o_a, o_m));
}

template <typename T>
Tensor<T> gaussian_gt(std::size_t h, std::size_t w, double peak_r, double peak_c, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_gt: sigma must be positive");
  if (!(peak_r >= 0.0 && peak_r < static_cast<double>(h) && peak_c >= 0.0 &&
        peak_c < static_cast<double>(w))) {
    throw std::invalid_argument("gaussian_gt: peak (" + std::to_string(peak_r) + ", " +
                                std::to_string(peak_c) + ") outside " + std::to_string(h) + "x" +
                                std::to_string(w) + " map");
  }
  Tensor<T> out(1, 1, h, w);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t r = 0; r < h; ++r) {
    const double dr = static_cast<double>(r) - peak_r;
    for (std::size_t c = 0; c < w; ++c) {
      const double dc = static_cast<double>(c) - peak_c;
      out.at(0, 0, r, c) = static_cast<T>(std::exp(-(dr * dr + dc * dc) / denom));
    }
  }
  return out;
}

double gt_sigma(const ModelConfig& cfg, double box_w, double box_h) {
  return cfg.gt_sigma_factor * std::sqrt(box_w * box_h);
}

template <typename T>
Var ridge_loss(Tape<T>& tape, Var o_am, Var gt) {
  return ad::mean_squared_error(tape, o_am, gt);
}

template Var fuse_logits(const NetContext<float>&, Var, Var);
template Var fuse_logits(const NetContext<double>&, Var, Var);
template Var fuse(const NetContext<float>&, Var, Var);
template Var fuse(const NetContext<double>&, Var, Var);
template Tensor<float> gaussian_gt(std::size_t, std::size_t, double, double, double);
template Tensor<double> gaussian_gt(std::size_t, std::size_t, double, double, double);
template Var ridge_loss(Tape<float>&, Var, Var);
template Var ridge_loss(Tape<double>&, Var, Var);

}  // namespace amnet::head
