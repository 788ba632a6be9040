#include "amnet/autodiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "amnet/kernels.hpp"
#include "amnet/ops.hpp"

namespace amnet {

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw UsageError("invalid tape variable");
  return nodes_[v.id];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw UsageError("invalid tape variable");
  return nodes_[v.id];
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::param(ParamStore<T>& store, const std::string& name) {
  if (auto it = bound_params_.find(name); it != bound_params_.end()) return Var{it->second};
  ParamEntry<T>& e = store.entry(name);
  Node n;
  n.value = e.value;
  n.requires_grad = record_grad_;
  n.param = &e;
  nodes_.push_back(std::move(n));
  bound_params_.emplace(name, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::param(const ParamStore<T>& store, const std::string& name) {
  if (auto it = bound_params_.find(name); it != bound_params_.end()) return Var{it->second};
  Node n;
  n.value = store.value(name);
  nodes_.push_back(std::move(n));
  bound_params_.emplace(name, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::record(Tensor<T> value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (record_grad_) {
    for (Var in : inputs) {
      if (in.valid() && node(in).requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
void Tape<T>::add_grad(Var v, const Tensor<T>& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (g.dims() != n.value.dims()) {
    throw ShapeError("gradient " + to_string(g.dims()) + " does not match value " +
                     to_string(n.value.dims()));
  }
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

template <typename T>
void Tape<T>::backward(Var loss, bool accumulate_params) {
  if (nodes_.empty() || !loss.valid() || loss.id >= nodes_.size()) {
    throw UsageError("backward called without a recorded forward graph");
  }
  if (backward_done_) throw UsageError("backward already ran on this tape");
  Node& l = nodes_[loss.id];
  if (l.value.size() != 1) throw UsageError("backward requires a scalar loss, got " + to_string(l.value.dims()));
  if (!l.requires_grad) throw UsageError("loss does not depend on any trainable parameter");
  backward_done_ = true;
  l.grad = Tensor<T>(l.value.dims(), T(1));
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    // Closures only touch gradients of earlier nodes; no reallocation happens
    // during the sweep, so passing the reference is safe.
    n.backward(*this, n.grad);
  }
  if (accumulate_params) accumulate_param_grads();
}

template <typename T>
void Tape<T>::accumulate_param_grads() const {
  for (const Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    auto& dst = n.param->grad;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
  }
}

template <typename T>
void Tape<T>::mix_kink(std::uint64_t h) {
  kink_hash_ ^= h + 0x9e3779b97f4a7c15ULL + (kink_hash_ << 6) + (kink_hash_ >> 2);
}

template class Tape<float>;
template class Tape<double>;

namespace ad {
namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < bytes; ++i) h = (h ^ p[i]) * 1099511628211ULL;
  return h;
}

template <std::size_t N>
std::span<const Var> inputs(const std::array<Var, N>& a) {
  return std::span<const Var>(a.data(), a.size());
}

}  // namespace

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var weight, Var bias, const ConvSpec& spec) {
  const Tensor<T>* b = bias.valid() ? &tape.value(bias) : nullptr;
  Tensor<T> out = ops::conv2d(tape.value(input), tape.value(weight), b, spec);
  const std::array<Var, 3> in{input, weight, bias};
  return tape.record(std::move(out), inputs(in),
                     [input, weight, bias, spec](Tape<T>& t, const Tensor<T>& g) {
                       if (t.requires_grad(input)) {
                         t.add_grad(input, ops::conv2d_grad_input(g, t.value(weight), spec,
                                                                  t.value(input).dims()));
                       }
                       if (t.requires_grad(weight)) {
                         t.add_grad(weight, ops::conv2d_grad_weight(g, t.value(input), spec));
                       }
                       if (bias.valid() && t.requires_grad(bias)) {
                         Tensor<T> gb = ops::conv2d_grad_bias(g);
                         t.add_grad(bias, Tensor<T>(t.value(bias).dims(),
                                                    std::vector<T>(gb.data().begin(),
                                                                   gb.data().end())));
                       }
                     });
}

template <typename T>
Var relu(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  if (tape.track_kinks()) {
    std::vector<unsigned char> mask(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) mask[i] = xv[i] > T(0);
    tape.mix_kink(fnv1a(mask.data(), mask.size()));
  }
  const std::array<Var, 1> in{x};
  return tape.record(ops::relu(xv), inputs(in), [x](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gin(g.dims());
    kernels::table<T>().relu_backward(gin.raw(), g.raw(), t.value(x).raw(), g.size());
    t.add_grad(x, gin);
  });
}

template <typename T>
Var sigmoid(Tape<T>& tape, Var x) {
  const std::array<Var, 1> in{x};
  const std::size_t self = tape.size();
  return tape.record(ops::sigmoid(tape.value(x)), inputs(in),
                     [x, self](Tape<T>& t, const Tensor<T>& g) {
                       const Tensor<T>& s = t.value(Var{self});
                       Tensor<T> gin(g.dims());
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         const double si = s[i];
                         gin[i] = static_cast<T>(static_cast<double>(g[i]) * si * (1.0 - si));
                       }
                       t.add_grad(x, gin);
                     });
}

template <typename T>
Var avg_pool2d(Tape<T>& tape, Var x, const PoolSpec& spec) {
  const std::array<Var, 1> in{x};
  return tape.record(ops::avg_pool2d(tape.value(x), spec), inputs(in),
                     [x, spec](Tape<T>& t, const Tensor<T>& g) {
                       t.add_grad(x, ops::avg_pool2d_grad(g, t.value(x).dims(), spec));
                     });
}

template <typename T>
Var max_pool2d(Tape<T>& tape, Var x, const PoolSpec& spec) {
  std::vector<std::uint32_t> argmax;
  Tensor<T> out = ops::max_pool2d(tape.value(x), spec, &argmax);
  if (tape.track_kinks()) tape.mix_kink(fnv1a(argmax.data(), argmax.size() * sizeof(std::uint32_t)));
  const std::array<Var, 1> in{x};
  return tape.record(std::move(out), inputs(in),
                     [x, argmax = std::move(argmax)](Tape<T>& t, const Tensor<T>& g) {
                       t.add_grad(x, ops::max_pool2d_grad(g, t.value(x).dims(), argmax));
                     });
}

template <typename T>
Var concat_depth(Tape<T>& tape, std::span<const Var> parts) {
  std::vector<const Tensor<T>*> values;
  values.reserve(parts.size());
  for (Var p : parts) values.push_back(&tape.value(p));
  Tensor<T> out = ops::concat_depth<T>(values);
  std::vector<Var> ids(parts.begin(), parts.end());
  return tape.record(std::move(out), parts, [ids](Tape<T>& t, const Tensor<T>& g) {
    const Dims gd = g.dims();
    std::size_t c0 = 0;
    for (Var p : ids) {
      const Dims pd = t.value(p).dims();
      if (t.requires_grad(p)) {
        Tensor<T> gp(pd);
        for (std::size_t n = 0; n < gd.n; ++n) {
          std::copy(g.plane(n, c0), g.plane(n, c0) + pd.c * pd.plane(), gp.plane(n, 0));
        }
        t.add_grad(p, gp);
      }
      c0 += pd.c;
    }
  });
}

template <typename T>
Var subtract(Tape<T>& tape, Var a, Var b) {
  const std::array<Var, 2> in{a, b};
  return tape.record(ops::subtract(tape.value(a), tape.value(b)), inputs(in),
                     [a, b](Tape<T>& t, const Tensor<T>& g) {
                       t.add_grad(a, g);
                       if (t.requires_grad(b)) {
                         Tensor<T> neg(g.dims());
                         for (std::size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
                         t.add_grad(b, neg);
                       }
                     });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  if (av.dims() != bv.dims()) throw ShapeError("add: " + to_string(av.dims()) + " vs " + to_string(bv.dims()));
  Tensor<T> out(av.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const std::array<Var, 2> in{a, b};
  return tape.record(std::move(out), inputs(in), [a, b](Tape<T>& t, const Tensor<T>& g) {
    t.add_grad(a, g);
    t.add_grad(b, g);
  });
}

template <typename T>
Var scale(Tape<T>& tape, Var x, double factor) {
  const Tensor<T>& xv = tape.value(x);
  Tensor<T> out(xv.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(xv[i] * factor);
  const std::array<Var, 1> in{x};
  return tape.record(std::move(out), inputs(in), [x, factor](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gin(g.dims());
    for (std::size_t i = 0; i < g.size(); ++i) gin[i] = static_cast<T>(g[i] * factor);
    t.add_grad(x, gin);
  });
}

template <typename T>
Var bilinear_resize(Tape<T>& tape, Var x, std::size_t out_h, std::size_t out_w) {
  const std::array<Var, 1> in{x};
  return tape.record(ops::bilinear_resize(tape.value(x), out_h, out_w), inputs(in),
                     [x](Tape<T>& t, const Tensor<T>& g) {
                       t.add_grad(x, ops::bilinear_resize_grad(g, t.value(x).dims()));
                     });
}

template <typename T>
Var xcorr(Tape<T>& tape, Var roi, Var tmpl) {
  const std::array<Var, 2> in{roi, tmpl};
  return tape.record(ops::xcorr(tape.value(roi), tape.value(tmpl)), inputs(in),
                     [roi, tmpl](Tape<T>& t, const Tensor<T>& g) {
                       if (t.requires_grad(roi)) {
                         t.add_grad(roi, ops::xcorr_grad_roi(g, t.value(tmpl), t.value(roi).dims()));
                       }
                       if (t.requires_grad(tmpl)) {
                         t.add_grad(tmpl, ops::xcorr_grad_tmpl(g, t.value(roi), t.value(tmpl).dims()));
                       }
                     });
}

template <typename T>
Var pad2d(Tape<T>& tape, Var x, std::size_t top, std::size_t bottom, std::size_t left, std::size_t right) {
  const Tensor<T>& xv = tape.value(x);
  const Dims d = xv.dims();
  const Dims o{d.n, d.c, d.h + top + bottom, d.w + left + right};
  Tensor<T> out(o);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (std::size_t y = 0; y < d.h; ++y) {
        std::copy_n(&xv.at(n, c, y, 0), d.w, &out.at(n, c, y + top, left));
      }
  const std::array<Var, 1> in{x};
  return tape.record(std::move(out), inputs(in), [x, d, top, left](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gin(d);
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t c = 0; c < d.c; ++c)
        for (std::size_t y = 0; y < d.h; ++y) {
          std::copy_n(&g.at(n, c, y + top, left), d.w, &gin.at(n, c, y, 0));
        }
    t.add_grad(x, gin);
  });
}

template <typename T>
Var subtract_max(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  const std::size_t hw = xv.dims().plane();
  const std::size_t planes = hw == 0 ? 0 : xv.size() / hw;
  std::vector<std::uint32_t> argmax(planes);
  Tensor<T> out(xv.dims());
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = xv.raw() + p * hw;
    std::size_t best = 0;
    for (std::size_t i = 1; i < hw; ++i) {
      if (src[i] > src[best]) best = i;
    }
    argmax[p] = static_cast<std::uint32_t>(best);
    T* dst = out.raw() + p * hw;
    for (std::size_t i = 0; i < hw; ++i) dst[i] = src[i] - src[best];
  }
  if (tape.track_kinks()) tape.mix_kink(fnv1a(argmax.data(), argmax.size() * sizeof(std::uint32_t)));
  const std::array<Var, 1> in{x};
  return tape.record(std::move(out), inputs(in),
                     [x, hw, argmax = std::move(argmax)](Tape<T>& t, const Tensor<T>& g) {
                       Tensor<T> gin = g;
                       for (std::size_t p = 0; p < argmax.size(); ++p) {
                         const T* gp = g.raw() + p * hw;
                         double total = 0.0;
                         for (std::size_t i = 0; i < hw; ++i) total += gp[i];
                         gin.raw()[p * hw + argmax[p]] -= static_cast<T>(total);
                       }
                       t.add_grad(x, gin);
                     });
}

template <typename T>
Var standardize(Tape<T>& tape, Var x, double eps) {
  const Tensor<T>& xv = tape.value(x);
  const Dims d = xv.dims();
  const std::size_t np = d.n * d.c;
  const std::size_t hw = d.plane();
  Tensor<T> out(d);
  std::vector<double> inv_sd(np);
  for (std::size_t p = 0; p < np; ++p) {
    const T* src = xv.raw() + p * hw;
    double mean = 0.0;
    for (std::size_t i = 0; i < hw; ++i) mean += src[i];
    mean /= static_cast<double>(hw);
    double var = 0.0;
    for (std::size_t i = 0; i < hw; ++i) var += (src[i] - mean) * (src[i] - mean);
    var /= static_cast<double>(hw);
    inv_sd[p] = 1.0 / std::sqrt(var + eps);
    T* dst = out.raw() + p * hw;
    for (std::size_t i = 0; i < hw; ++i) dst[i] = static_cast<T>((src[i] - mean) * inv_sd[p]);
  }
  const std::array<Var, 1> in{x};
  const std::size_t self = tape.size();
  return tape.record(std::move(out), inputs(in),
                     [x, self, hw, inv_sd = std::move(inv_sd)](Tape<T>& t, const Tensor<T>& g) {
                       const Tensor<T>& y = t.value(Var{self});
                       Tensor<T> gin(g.dims());
                       for (std::size_t p = 0; p < inv_sd.size(); ++p) {
                         const T* gp = g.raw() + p * hw;
                         const T* yp = y.raw() + p * hw;
                         double gm = 0.0, gy = 0.0;
                         for (std::size_t i = 0; i < hw; ++i) {
                           gm += gp[i];
                           gy += static_cast<double>(gp[i]) * yp[i];
                         }
                         gm /= static_cast<double>(hw);
                         gy /= static_cast<double>(hw);
                         T* dst = gin.raw() + p * hw;
                         for (std::size_t i = 0; i < hw; ++i) {
                           dst[i] = static_cast<T>(inv_sd[p] * (gp[i] - gm - yp[i] * gy));
                         }
                       }
                       t.add_grad(x, gin);
                     });
}

template <typename T>
Var sum(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  double s = 0.0;
  for (T v : xv.data()) s += static_cast<double>(v);
  const std::array<Var, 1> in{x};
  return tape.record(Tensor<T>(1, 1, 1, 1, static_cast<T>(s)), inputs(in),
                     [x](Tape<T>& t, const Tensor<T>& g) {
                       t.add_grad(x, Tensor<T>(t.value(x).dims(), g[0]));
                     });
}

template <typename T>
Var mean_squared_error(Tape<T>& tape, Var prediction, Var target) {
  const Tensor<T>& p = tape.value(prediction);
  const Tensor<T>& q = tape.value(target);
  if (p.dims() != q.dims()) {
    throw ShapeError("mean_squared_error: " + to_string(p.dims()) + " vs " + to_string(q.dims()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(q[i]);
    s += d * d;
  }
  const auto count = static_cast<double>(p.size());
  const std::array<Var, 2> in{prediction, target};
  return tape.record(Tensor<T>(1, 1, 1, 1, static_cast<T>(s / count)), inputs(in),
                     [prediction, target, count](Tape<T>& t, const Tensor<T>& g) {
                       const Tensor<T>& pv = t.value(prediction);
                       const Tensor<T>& qv = t.value(target);
                       const double k = 2.0 * static_cast<double>(g[0]) / count;
                       Tensor<T> gp(pv.dims());
                       for (std::size_t i = 0; i < pv.size(); ++i) {
                         gp[i] = static_cast<T>(k * (static_cast<double>(pv[i]) - qv[i]));
                       }
                       t.add_grad(prediction, gp);
                       if (t.requires_grad(target)) {
                         for (auto& v : gp.data()) v = -v;
                         t.add_grad(target, gp);
                       }
                     });
}

#define AMNET_INSTANTIATE_AD(T)                                                  \
  template Var conv2d(Tape<T>&, Var, Var, Var, const ConvSpec&);                \
  template Var relu(Tape<T>&, Var);                                             \
  template Var sigmoid(Tape<T>&, Var);                                          \
  template Var avg_pool2d(Tape<T>&, Var, const PoolSpec&);                      \
  template Var max_pool2d(Tape<T>&, Var, const PoolSpec&);                      \
  template Var concat_depth(Tape<T>&, std::span<const Var>);                    \
  template Var subtract(Tape<T>&, Var, Var);                                    \
  template Var add(Tape<T>&, Var, Var);                                         \
  template Var scale(Tape<T>&, Var, double);                                    \
  template Var bilinear_resize(Tape<T>&, Var, std::size_t, std::size_t);        \
  template Var xcorr(Tape<T>&, Var, Var);                                       \
  template Var standardize(Tape<T>&, Var, double);                              \
  template Var subtract_max(Tape<T>&, Var);                                           \
  template Var pad2d(Tape<T>&, Var, std::size_t, std::size_t, std::size_t, std::size_t); \
  template Var sum(Tape<T>&, Var);                                              \
  template Var mean_squared_error(Tape<T>&, Var, Var);

AMNET_INSTANTIATE_AD(float)
AMNET_INSTANTIATE_AD(double)

}  // namespace ad
}  // namespace amnet
