#include "amnet/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "amnet/anet.hpp"
#include "amnet/head.hpp"
#include "amnet/mnet.hpp"

namespace amnet {

void ModelConfig::validate() const {
  auto check_kernels = [](const std::vector<std::size_t>& ks, const char* field) {
    if (ks.empty()) throw std::invalid_argument(std::string(field) + ": must be non-empty");
    for (std::size_t k : ks) {
      if (k == 0 || k % 2 == 0) {
        throw std::invalid_argument(std::string(field) + ": kernel sizes must be odd, got " +
                                    std::to_string(k));
      }
    }
  };
  check_kernels(spotlight_kernels, "spotlight_kernels");
  check_kernels(contrast_kernels, "contrast_kernels");
  check_kernels(pool_kernels, "pool_kernels");
  if (template_size < 16) throw std::invalid_argument("template_size: must be >= 16");
  if (roi_size < template_size) throw std::invalid_argument("roi_size: must be >= template_size");
  const std::size_t down = std::size_t{1} << pool_kernels.size();
  if (roi_size % down != 0) {
    throw std::invalid_argument("roi_size: must be divisible by " + std::to_string(down) +
                                " (pooling cascade)");
  }
  if (!(gt_sigma_factor > 0.0)) throw std::invalid_argument("gt_sigma_factor: must be positive");
}

std::vector<ParamSpec> param_layout(const ModelConfig& cfg) {
  std::vector<ParamSpec> all = anet::param_layout();
  for (auto& p : mnet::param_layout(cfg)) all.push_back(std::move(p));
  for (auto& p : head::param_layout()) all.push_back(std::move(p));
  std::sort(all.begin(), all.end(), [](const ParamSpec& a, const ParamSpec& b) { return a.name < b.name; });
  return all;
}

template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore<T> store;
  std::uint64_t index = 0;
  for (const ParamSpec& p : param_layout(cfg)) {
    const bool is_bias = p.name.size() > 5 && p.name.compare(p.name.size() - 5, 5, ".bias") == 0;
    const bool is_fusion = p.name == std::string(anet::kFuse) + ".weight" ||
                           p.name == std::string(head::kFuse) + ".weight";
    if (is_bias) {
      store.add(p.name, Tensor<T>(p.dims));
      continue;
    }
    const std::uint64_t stream = seed * 0x9E3779B97F4A7C15ULL + (++index);
    if (is_fusion) {
      // 1x1 fusion layers start as a plain average of their inputs.
      store.add(p.name, Tensor<T>(p.dims, T(1) / static_cast<T>(p.dims.c)));
    } else {
      store.add(p.name, xavier_init<T>(p.dims, stream));
    }
  }
  return store;
}

template <typename T>
void check_layout(const ParamStore<T>& store, const ModelConfig& cfg) {
  const auto layout = param_layout(cfg);
  for (const ParamSpec& p : layout) {
    if (!store.contains(p.name)) throw std::invalid_argument("missing parameter " + p.name);
    const Dims d = store.value(p.name).dims();
    if (d != p.dims) {
      throw std::invalid_argument("parameter " + p.name + ": expected dims " + to_string(p.dims) +
                                  ", found " + to_string(d));
    }
  }
  if (store.size() != layout.size()) {
    for (const auto& name : store.names()) {
      if (std::none_of(layout.begin(), layout.end(), [&](const ParamSpec& p) { return p.name == name; })) {
        throw std::invalid_argument("unexpected parameter " + name);
      }
    }
  }
}

template <typename T>
ForwardVars amnet_forward(const NetContext<T>& ctx, const ModelConfig& cfg, Var roi_t,
                          Var roi_prev, Var tmpl) {
  Tape<T>& tape = ctx.tape();
  ForwardVars out;
  out.o_a = anet::forward(ctx, roi_t, tmpl);
  Var m_t = roi_t, m_prev = roi_prev;
  if (cfg.mnet_luminance) {
    m_t = tape.constant(mnet::to_luminance(tape.value(roi_t)));
    m_prev = tape.constant(mnet::to_luminance(tape.value(roi_prev)));
  }
  out.o_m = mnet::forward(ctx, cfg, m_t, m_prev);
  out.logits = head::fuse_logits(ctx, out.o_a, out.o_m);
  out.o_am = ad::sigmoid(tape, out.logits);
  return out;
}

template <typename T>
void ablate_motion(ParamStore<T>& store) {
  store.value(std::string(head::kFuse) + ".weight")[head::kMotionChannel] = T(0);
}

#define AMNET_INSTANTIATE_MODEL(T)                                                          \
  template ParamStore<T> init_params(const ModelConfig&, std::uint64_t);                   \
  template void check_layout(const ParamStore<T>&, const ModelConfig&);                    \
  template ForwardVars amnet_forward(const NetContext<T>&, const ModelConfig&, Var, Var, Var); \
  template void ablate_motion(ParamStore<T>&);

AMNET_INSTANTIATE_MODEL(float)
AMNET_INSTANTIATE_MODEL(double)

}  // namespace amnet
