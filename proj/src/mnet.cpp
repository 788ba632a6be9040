#include "amnet/mnet.hpp"

#include <string>

namespace amnet::mnet {
namespace {

std::string contrast_name(std::size_t i) { return "mnet.contrast" + std::to_string(i + 1); }
std::string spot_name(std::size_t k) { return "mnet.spot_k" + std::to_string(k); }
const std::string kSpotFuse = "mnet.spot_fuse";

PoolSpec cascade_pool(std::size_t k) { return PoolSpec{k, 2, (k - 1) / 2}; }

}  // namespace

std::vector<ParamSpec> param_layout(const ModelConfig& cfg) {
  std::vector<ParamSpec> out;
  for (std::size_t i = 0; i < cfg.contrast_kernels.size(); ++i) {
    const std::size_t k = cfg.contrast_kernels[i];
    out.push_back({contrast_name(i) + ".weight", Dims{3, 3, k, k}});
    out.push_back({contrast_name(i) + ".bias", Dims{1, 3, 1, 1}});
  }
  for (std::size_t k : cfg.spotlight_kernels) out.push_back({spot_name(k) + ".weight", Dims{1, 3, k, k}});
  out.push_back({kSpotFuse + ".weight", Dims{1, cfg.spotlight_kernels.size(), 1, 1}});
  out.push_back({kSpotFuse + ".bias", Dims{1, 1, 1, 1}});
  return out;
}

template <typename T>
Var contrast(const NetContext<T>& ctx, const ModelConfig& cfg, Var patch) {
  Tape<T>& tape = ctx.tape();
  const Dims d = tape.value(patch).dims();
  if (d.c != 3) throw ShapeError("mnet contrast: expected 3 channels, got " + to_string(d));
  Var x = patch;
  for (std::size_t i = 0; i < cfg.contrast_kernels.size(); ++i) {
    const std::string name = contrast_name(i);
    x = ad::relu(tape, ad::conv2d(tape, x, ctx.param(name + ".weight"), ctx.param(name + ".bias"),
                                  ConvSpec::same(cfg.contrast_kernels[i], 3, 3)));
  }
  return x;
}

template <typename T>
Var spotlight(const NetContext<T>& ctx, const ModelConfig& cfg, Var zc_t, Var zc_prev) {
  Tape<T>& tape = ctx.tape();
  const Var diff = ad::subtract(tape, zc_t, zc_prev);
  std::vector<Var> branches;
  for (std::size_t k : cfg.spotlight_kernels) {
    branches.push_back(ad::conv2d(tape, diff, ctx.param(spot_name(k) + ".weight"), Var{},
                                  ConvSpec::same(k, 3, 1)));
  }
  const Var stacked = ad::concat_depth<T>(tape, branches);
  return ad::conv2d(tape, stacked, ctx.param(kSpotFuse + ".weight"), ctx.param(kSpotFuse + ".bias"),
                    ConvSpec::same(1, branches.size(), 1));
}

std::size_t bsfe_downsample(const ModelConfig& cfg) {
  return std::size_t{1} << cfg.pool_kernels.size();
}

template <typename T>
Var bsfe(Tape<T>& tape, const ModelConfig& cfg, Var o_sf) {
  const Dims d = tape.value(o_sf).dims();
  if (d.c != 1) throw ShapeError("bsfe: expected a single-channel map, got " + to_string(d));
  Var enhanced = o_sf;
  Var suppressed = o_sf;
  for (std::size_t k : cfg.pool_kernels) {
    enhanced = ad::max_pool2d(tape, enhanced, cascade_pool(k));
    suppressed = ad::avg_pool2d(tape, suppressed, cascade_pool(k));
  }
  return ad::bilinear_resize(tape, ad::subtract(tape, enhanced, suppressed), d.h, d.w);
}

template <typename T>
Var forward(const NetContext<T>& ctx, const ModelConfig& cfg, Var roi_t, Var roi_prev) {
  const Var zc_t = contrast(ctx, cfg, roi_t);
  const Var zc_prev = contrast(ctx, cfg, roi_prev);
  return bsfe(ctx.tape(), cfg, spotlight(ctx, cfg, zc_t, zc_prev));
}

template <typename T>
Tensor<T> to_luminance(const Tensor<T>& rgb) {
  const Dims d = rgb.dims();
  if (d.c != 3) throw ShapeError("to_luminance: expected 3 channels, got " + to_string(d));
  Tensor<T> out(d);
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* r = rgb.plane(n, 0);
    const T* g = rgb.plane(n, 1);
    const T* b = rgb.plane(n, 2);
    for (std::size_t i = 0; i < d.plane(); ++i) {
      const T y = static_cast<T>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
      out.plane(n, 0)[i] = out.plane(n, 1)[i] = out.plane(n, 2)[i] = y;
    }
  }
  return out;
}

#define AMNET_INSTANTIATE_MNET(T)                                                    \
  template Var contrast(const NetContext<T>&, const ModelConfig&, Var);              \
  template Var spotlight(const NetContext<T>&, const ModelConfig&, Var, Var);        \
  template Var bsfe(Tape<T>&, const ModelConfig&, Var);                              \
  template Var forward(const NetContext<T>&, const ModelConfig&, Var, Var);          \
  template Tensor<T> to_luminance(const Tensor<T>&);

AMNET_INSTANTIATE_MNET(float)
AMNET_INSTANTIATE_MNET(double)

}  // namespace amnet::mnet
