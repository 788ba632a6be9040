#include "amnet/anet.hpp"

namespace amnet::anet {

ConvSpec layer_spec(const LayerDef& layer) {
  return ConvSpec::same(layer.kernel, layer.in_channels, layer.out_channels, layer.dilation);
}

std::vector<ParamSpec> param_layout() {
  std::vector<ParamSpec> out;
  for (const LayerDef& l : kLayers) {
    out.push_back({std::string(l.name) + ".weight", Dims{l.out_channels, l.in_channels, l.kernel, l.kernel}});
    out.push_back({std::string(l.name) + ".bias", Dims{1, l.out_channels, 1, 1}});
  }
  out.push_back({std::string(kFuse) + ".weight", Dims{1, kLevels.size(), 1, 1}});
  out.push_back({std::string(kFuse) + ".bias", Dims{1, 1, 1, 1}});
  return out;
}

template <typename T>
FeaturePyramid embed(const NetContext<T>& ctx, Var patch) {
  Tape<T>& tape = ctx.tape();
  const Dims d = tape.value(patch).dims();
  if (d.c != 3) throw ShapeError("anet embed: expected 3 input channels, got " + to_string(d));
  if (d.h < 16 || d.w < 16) throw ShapeError("anet embed: patch smaller than 16x16: " + to_string(d));
  std::array<Var, kLayers.size()> outs;
  Var x = patch;
  for (std::size_t i = 0; i < kLayers.size(); ++i) {
    const LayerDef& l = kLayers[i];
    const std::string name(l.name);
    x = ad::relu(tape, ad::conv2d(tape, x, ctx.param(name + ".weight"), ctx.param(name + ".bias"),
                                  layer_spec(l)));
    outs[i] = x;
  }
  FeaturePyramid p;
  for (std::size_t l = 0; l < kLevels.size(); ++l) {
    const std::array<Var, 2> pair{outs[kLevels[l][0]], outs[kLevels[l][1]]};
    p.levels[l] = ad::concat_depth<T>(tape, pair);
  }
  return p;
}

template <typename T>
std::array<Var, 3> level_scores(const NetContext<T>& ctx, const FeaturePyramid& roi,
                                const FeaturePyramid& tmpl) {
  Tape<T>& tape = ctx.tape();
  std::array<Var, 3> scores;
  for (std::size_t l = 0; l < kLevels.size(); ++l) {
    const Var x = ad::standardize(tape, tmpl.levels[l]);
    scores[l] = ad::standardize(tape, ad::xcorr(tape, roi.levels[l], x));
  }
  return scores;
}

template <typename T>
Var forward(const NetContext<T>& ctx, Var roi, Var tmpl) {
  Tape<T>& tape = ctx.tape();
  const FeaturePyramid z = embed(ctx, roi);
  const FeaturePyramid x = embed(ctx, tmpl);
  const std::array<Var, 3> scores = level_scores(ctx, z, x);
  const Var stacked = ad::concat_depth<T>(tape, scores);
  const std::string fuse(kFuse);
  return ad::conv2d(tape, stacked, ctx.param(fuse + ".weight"), ctx.param(fuse + ".bias"),
                    ConvSpec::same(1, kLevels.size(), 1));
}

template FeaturePyramid embed(const NetContext<float>&, Var);
template FeaturePyramid embed(const NetContext<double>&, Var);
template std::array<Var, 3> level_scores(const NetContext<float>&, const FeaturePyramid&,
                                         const FeaturePyramid&);
template std::array<Var, 3> level_scores(const NetContext<double>&, const FeaturePyramid&,
                                         const FeaturePyramid&);
template Var forward(const NetContext<float>&, Var, Var);
template Var forward(const NetContext<double>&, Var, Var);

}  // namespace amnet::anet
