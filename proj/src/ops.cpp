#include "amnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amnet/kernels.hpp"

namespace amnet::ops {
namespace {

std::string dims_pair(const char* a_name, const Dims& a, const char* b_name, const Dims& b) {
  return std::string(a_name) + " " + to_string(a) + " vs " + b_name + " " + to_string(b);
}

/// Zero-pads (positive) or crops (negative) every plane.
template <typename T>
Tensor<T> pad_planes(const Tensor<T>& in, long top, long bottom, long left, long right) {
  const Dims d = in.dims();
  const long h = static_cast<long>(d.h) + top + bottom;
  const long w = static_cast<long>(d.w) + left + right;
  if (h <= 0 || w <= 0) throw ShapeError("padding leaves an empty plane");
  Tensor<T> out(d.n, d.c, static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t c = 0; c < d.c; ++c) {
      const T* src = in.plane(n, c);
      T* dst = out.plane(n, c);
      for (long y = 0; y < h; ++y) {
        const long sy = y - top;
        if (sy < 0 || sy >= static_cast<long>(d.h)) continue;
        const long x0 = std::max(0L, left);
        const long x1 = std::min(w, static_cast<long>(d.w) + left);
        if (x1 <= x0) continue;
        std::copy(src + sy * static_cast<long>(d.w) + (x0 - left),
                  src + sy * static_cast<long>(d.w) + (x1 - left), dst + y * w + x0);
      }
    }
  }
  return out;
}

template <typename T>
std::vector<double> to_double(std::span<const T> v) {
  return std::vector<double>(v.begin(), v.end());
}

/// out[oc] = bias[oc] + sum_ic correlate(xp[ic], w[oc][ic]); planes are
/// contiguous per channel. Summation order per output: ic, ky, kx.
template <typename T>
void correlate_planes(const T* xp, std::size_t in_ch, std::size_t wp, const double* w,
                      std::size_t out_ch, std::size_t kh, std::size_t kw, std::size_t dilation,
                      std::size_t stride, const double* bias, T* out, std::size_t ho,
                      std::size_t wo, std::size_t hp) {
  const auto& k = kernels::table<T>();
  constexpr std::size_t kRows = kernels::kMaxRows;
  kernels::Window win;
  win.channels = in_ch;
  win.kernel_h = kh;
  win.kernel_w = kw;
  win.dilation = dilation;
  win.stride = stride;
  win.row_stride = wp;
  win.plane_stride = hp * wp;
  std::vector<double> acc(kRows * wo);
  double* accs[kRows];
  const double* taps[kRows];
  for (std::size_t oc0 = 0; oc0 < out_ch; oc0 += kRows) {
    const std::size_t rows = std::min(kRows, out_ch - oc0);
    for (std::size_t j = 0; j < rows; ++j) {
      accs[j] = acc.data() + j * wo;
      taps[j] = w + (oc0 + j) * in_ch * kh * kw;
    }
    for (std::size_t y = 0; y < ho; ++y) {
      std::fill(acc.begin(), acc.end(), 0.0);
      k.correlate_rows(accs, taps, rows, xp + y * stride * wp, win, wo);
      for (std::size_t j = 0; j < rows; ++j) {
        const std::size_t oc = oc0 + j;
        k.store(out + (oc * ho + y) * wo, accs[j], bias ? bias[oc] : 0.0, wo);
      }
    }
  }
}

/// gw[oc][ic][ky][kx] += sum over the output plane of g[oc] times the input
/// window shifted by (ky*d, kx*d); stride 1 only.
template <typename T>
void accumulate_weight_grad(const T* g, std::size_t out_ch, std::size_t ho, std::size_t wo,
                            const T* xp, std::size_t in_ch, std::size_t hp, std::size_t wp,
                            std::size_t kh, std::size_t kw, std::size_t dilation, double* gw) {
  const auto& k = kernels::table<T>();
  for (std::size_t oc = 0; oc < out_ch; ++oc) {
    const T* gplane = g + oc * ho * wo;
    for (std::size_t ic = 0; ic < in_ch; ++ic) {
      const T* plane = xp + ic * hp * wp;
      double* gk = gw + (oc * in_ch + ic) * kh * kw;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        k.dot_taps(gk + ky * kw, gplane, wo, plane + ky * dilation * wp, wp, kw, dilation, ho, wo);
      }
    }
  }
}

template <typename T>
void check_conv(const Dims& in, const Tensor<T>& weight, const Tensor<T>* bias,
                const ConvSpec& spec) {
  const Dims wd = weight.dims();
  const Dims expect{spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w};
  if (wd != expect) throw ShapeError("conv2d weight " + dims_pair("got", wd, "expected", expect));
  if (in.c != spec.in_channels) {
    throw ShapeError("conv2d: " + dims_pair("input", in, "weight", wd));
  }
  if (bias && bias->size() != spec.out_channels) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias->size()) + " vs " +
                     std::to_string(spec.out_channels) + " output channels");
  }
  spec.validate(in.h, in.w);
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                 const ConvSpec& spec) {
  const Dims d = input.dims();
  check_conv(d, weight, bias, spec);
  const std::size_t ho = spec.out_h(d.h), wo = spec.out_w(d.w);
  const bool padded = spec.pad_top || spec.pad_bottom || spec.pad_left || spec.pad_right;
  Tensor<T> tmp;
  if (padded) {
    tmp = pad_planes(input, static_cast<long>(spec.pad_top), static_cast<long>(spec.pad_bottom),
                     static_cast<long>(spec.pad_left), static_cast<long>(spec.pad_right));
  }
  const Tensor<T>& xp = padded ? tmp : input;
  const auto w = to_double(weight.data());
  std::vector<double> b;
  if (bias) b = to_double(bias->data());
  Tensor<T> out(d.n, spec.out_channels, ho, wo);
  for (std::size_t n = 0; n < d.n; ++n) {
    correlate_planes(xp.plane(n, 0), d.c, xp.dims().w, w.data(), spec.out_channels,
                     spec.kernel_h, spec.kernel_w, spec.dilation, spec.stride,
                     bias ? b.data() : nullptr, out.plane(n, 0), ho, wo, xp.dims().h);
  }
  return out;
}

template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& weight,
                            const ConvSpec& spec, const Dims& input_dims) {
  const Dims g = grad_out.dims();
  const std::size_t kh = spec.kernel_h, kw = spec.kernel_w, dil = spec.dilation;
  if (g.c != spec.out_channels || g.h != spec.out_h(input_dims.h) ||
      g.w != spec.out_w(input_dims.w) || g.n != input_dims.n) {
    throw ShapeError("conv2d backward: " + dims_pair("grad", g, "input", input_dims));
  }
  if (spec.stride == 1) {
    // Transposed correlation: pad the gradient and correlate with the
    // spatially flipped, channel-transposed kernel.
    const long ext_h = static_cast<long>(dil * (kh - 1));
    const long ext_w = static_cast<long>(dil * (kw - 1));
    const Tensor<T> gp = pad_planes(grad_out, ext_h - static_cast<long>(spec.pad_top),
                                    ext_h - static_cast<long>(spec.pad_bottom),
                                    ext_w - static_cast<long>(spec.pad_left),
                                    ext_w - static_cast<long>(spec.pad_right));
    std::vector<double> wt(weight.size());
    for (std::size_t oc = 0; oc < spec.out_channels; ++oc)
      for (std::size_t ic = 0; ic < spec.in_channels; ++ic)
        for (std::size_t ky = 0; ky < kh; ++ky)
          for (std::size_t kx = 0; kx < kw; ++kx)
            wt[((ic * spec.out_channels + oc) * kh + ky) * kw + kx] =
                weight.at(oc, ic, kh - 1 - ky, kw - 1 - kx);
    Tensor<T> out(input_dims);
    for (std::size_t n = 0; n < g.n; ++n) {
      correlate_planes(gp.plane(n, 0), g.c, gp.dims().w, wt.data(), spec.in_channels, kh, kw,
                       dil, 1, nullptr, out.plane(n, 0), input_dims.h, input_dims.w,
                       gp.dims().h);
    }
    return out;
  }
  // Strided scatter.
  std::vector<double> acc(input_dims.count(), 0.0);
  const long ih = static_cast<long>(input_dims.h), iw = static_cast<long>(input_dims.w);
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t oc = 0; oc < g.c; ++oc)
      for (std::size_t y = 0; y < g.h; ++y)
        for (std::size_t x = 0; x < g.w; ++x) {
          const double gv = grad_out.at(n, oc, y, x);
          for (std::size_t ic = 0; ic < spec.in_channels; ++ic)
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const long sy = static_cast<long>(y * spec.stride + ky * dil) -
                              static_cast<long>(spec.pad_top);
              if (sy < 0 || sy >= ih) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const long sx = static_cast<long>(x * spec.stride + kx * dil) -
                                static_cast<long>(spec.pad_left);
                if (sx < 0 || sx >= iw) continue;
                acc[((n * input_dims.c + ic) * input_dims.h + sy) * input_dims.w + sx] +=
                    gv * static_cast<double>(weight.at(oc, ic, ky, kx));
              }
            }
        }
  Tensor<T> out(input_dims);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
  return out;
}

template <typename T>
Tensor<T> conv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& input,
                             const ConvSpec& spec) {
  const Dims d = input.dims();
  const Dims g = grad_out.dims();
  if (g.c != spec.out_channels || g.h != spec.out_h(d.h) || g.w != spec.out_w(d.w) || g.n != d.n) {
    throw ShapeError("conv2d weight backward: " + dims_pair("grad", g, "input", d));
  }
  const std::size_t kh = spec.kernel_h, kw = spec.kernel_w, dil = spec.dilation;
  const Dims wd{spec.out_channels, spec.in_channels, kh, kw};
  std::vector<double> gw(wd.count(), 0.0);
  const Tensor<T> xp = pad_planes(input, static_cast<long>(spec.pad_top),
                                  static_cast<long>(spec.pad_bottom),
                                  static_cast<long>(spec.pad_left),
                                  static_cast<long>(spec.pad_right));
  if (spec.stride == 1) {
    for (std::size_t n = 0; n < d.n; ++n) {
      accumulate_weight_grad(grad_out.plane(n, 0), g.c, g.h, g.w, xp.plane(n, 0), d.c,
                             xp.dims().h, xp.dims().w, kh, kw, dil, gw.data());
    }
  } else {
    for (std::size_t n = 0; n < d.n; ++n)
      for (std::size_t oc = 0; oc < g.c; ++oc)
        for (std::size_t ic = 0; ic < d.c; ++ic)
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx) {
              double s = gw[((oc * d.c + ic) * kh + ky) * kw + kx];
              for (std::size_t y = 0; y < g.h; ++y)
                for (std::size_t x = 0; x < g.w; ++x)
                  s += static_cast<double>(grad_out.at(n, oc, y, x)) *
                       static_cast<double>(
                           xp.at(n, ic, y * spec.stride + ky * dil, x * spec.stride + kx * dil));
              gw[((oc * d.c + ic) * kh + ky) * kw + kx] = s;
            }
  }
  Tensor<T> out(wd);
  for (std::size_t i = 0; i < gw.size(); ++i) out[i] = static_cast<T>(gw[i]);
  return out;
}

template <typename T>
Tensor<T> conv2d_grad_bias(const Tensor<T>& grad_out) {
  const Dims g = grad_out.dims();
  Tensor<T> out(1, g.c, 1, 1);
  for (std::size_t c = 0; c < g.c; ++c) {
    double s = 0.0;
    for (std::size_t n = 0; n < g.n; ++n) {
      const T* p = grad_out.plane(n, c);
      for (std::size_t i = 0; i < g.plane(); ++i) s += static_cast<double>(p[i]);
    }
    out[c] = static_cast<T>(s);
  }
  return out;
}

namespace {

struct Window {
  std::size_t y0, y1, x0, x1;  // half-open, clamped to the input
};

Window pool_window(const PoolSpec& spec, std::size_t oy, std::size_t ox, std::size_t h,
                   std::size_t w) {
  const long sy = static_cast<long>(oy * spec.stride) - static_cast<long>(spec.padding);
  const long sx = static_cast<long>(ox * spec.stride) - static_cast<long>(spec.padding);
  const long k = static_cast<long>(spec.kernel);
  return Window{static_cast<std::size_t>(std::max(0L, sy)),
                static_cast<std::size_t>(std::min(static_cast<long>(h), sy + k)),
                static_cast<std::size_t>(std::max(0L, sx)),
                static_cast<std::size_t>(std::min(static_cast<long>(w), sx + k))};
}

Dims pool_out_dims(const Dims& d, const PoolSpec& spec) {
  if (spec.kernel == 0 || spec.stride == 0) throw ShapeError("pool: kernel and stride must be >= 1");
  if (spec.padding >= spec.kernel) throw ShapeError("pool: padding must be smaller than kernel");
  const Dims out{d.n, d.c, spec.out_size(d.h), spec.out_size(d.w)};
  if (out.h == 0 || out.w == 0) throw ShapeError("pool: window larger than input " + to_string(d));
  return out;
}

}  // namespace

template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& input, const PoolSpec& spec) {
  const Dims d = input.dims();
  Tensor<T> out(pool_out_dims(d, spec));
  const Dims o = out.dims();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t oy = 0; oy < o.h; ++oy)
        for (std::size_t ox = 0; ox < o.w; ++ox) {
          const Window win = pool_window(spec, oy, ox, d.h, d.w);
          double s = 0.0;
          for (std::size_t y = win.y0; y < win.y1; ++y)
            for (std::size_t x = win.x0; x < win.x1; ++x) s += static_cast<double>(src[y * d.w + x]);
          const auto count = static_cast<double>((win.y1 - win.y0) * (win.x1 - win.x0));
          dst[oy * o.w + ox] = static_cast<T>(s / count);
        }
    }
  return out;
}

template <typename T>
Tensor<T> avg_pool2d_grad(const Tensor<T>& grad_out, const Dims& input_dims,
                          const PoolSpec& spec) {
  const Dims o = pool_out_dims(input_dims, spec);
  if (grad_out.dims() != o) throw ShapeError("avg_pool backward: " + dims_pair("grad", grad_out.dims(), "expected", o));
  std::vector<double> acc(input_dims.count(), 0.0);
  for (std::size_t n = 0; n < o.n; ++n)
    for (std::size_t c = 0; c < o.c; ++c) {
      const T* g = grad_out.plane(n, c);
      double* dst = acc.data() + (n * o.c + c) * input_dims.plane();
      for (std::size_t oy = 0; oy < o.h; ++oy)
        for (std::size_t ox = 0; ox < o.w; ++ox) {
          const Window win = pool_window(spec, oy, ox, input_dims.h, input_dims.w);
          const auto count = static_cast<double>((win.y1 - win.y0) * (win.x1 - win.x0));
          const double share = static_cast<double>(g[oy * o.w + ox]) / count;
          for (std::size_t y = win.y0; y < win.y1; ++y)
            for (std::size_t x = win.x0; x < win.x1; ++x) dst[y * input_dims.w + x] += share;
        }
    }
  Tensor<T> out(input_dims);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
  return out;
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& input, const PoolSpec& spec,
                     std::vector<std::uint32_t>* argmax) {
  const Dims d = input.dims();
  Tensor<T> out(pool_out_dims(d, spec));
  const Dims o = out.dims();
  if (argmax) argmax->assign(o.count(), 0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t oy = 0; oy < o.h; ++oy)
        for (std::size_t ox = 0; ox < o.w; ++ox) {
          const Window win = pool_window(spec, oy, ox, d.h, d.w);
          std::size_t best = win.y0 * d.w + win.x0;
          for (std::size_t y = win.y0; y < win.y1; ++y)
            for (std::size_t x = win.x0; x < win.x1; ++x)
              if (src[y * d.w + x] > src[best]) best = y * d.w + x;
          dst[oy * o.w + ox] = src[best];
          if (argmax) (*argmax)[out.offset(n, c, oy, ox)] = static_cast<std::uint32_t>(best);
        }
    }
  return out;
}

template <typename T>
Tensor<T> max_pool2d_grad(const Tensor<T>& grad_out, const Dims& input_dims,
                          std::span<const std::uint32_t> argmax) {
  const Dims o = grad_out.dims();
  if (argmax.size() != o.count() || o.n != input_dims.n || o.c != input_dims.c) {
    throw ShapeError("max_pool backward: " + dims_pair("grad", o, "input", input_dims));
  }
  std::vector<double> acc(input_dims.count(), 0.0);
  for (std::size_t n = 0; n < o.n; ++n)
    for (std::size_t c = 0; c < o.c; ++c) {
      const std::size_t base_in = (n * o.c + c) * input_dims.plane();
      const std::size_t base_out = (n * o.c + c) * o.plane();
      for (std::size_t i = 0; i < o.plane(); ++i) {
        acc[base_in + argmax[base_out + i]] += static_cast<double>(grad_out[base_out + i]);
      }
    }
  Tensor<T> out(input_dims);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& t) {
  Tensor<T> out(t.dims());
  kernels::table<T>().relu(out.raw(), t.raw(), t.size());
  return out;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& t) {
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  Tensor<T> out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(t[i])));
    out[i] = std::clamp(static_cast<T>(s), lo, hi);
  }
  return out;
}

template <typename T>
Tensor<T> subtract(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dims() != b.dims()) throw ShapeError("subtract: " + dims_pair("a", a.dims(), "b", b.dims()));
  Tensor<T> out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <typename T>
Tensor<T> concat_depth(std::span<const Tensor<T>* const> parts) {
  if (parts.empty()) throw ShapeError("concat_depth: no inputs");
  const Dims first = parts.front()->dims();
  std::size_t channels = 0;
  for (const Tensor<T>* p : parts) {
    const Dims d = p->dims();
    if (d.n != first.n || d.h != first.h || d.w != first.w) {
      throw ShapeError("concat_depth: " + dims_pair("first", first, "other", d));
    }
    channels += d.c;
  }
  Tensor<T> out(first.n, channels, first.h, first.w);
  for (std::size_t n = 0; n < first.n; ++n) {
    std::size_t c0 = 0;
    for (const Tensor<T>* p : parts) {
      const std::size_t len = p->dims().c * first.plane();
      std::copy(p->plane(n, 0), p->plane(n, 0) + len, out.plane(n, c0));
      c0 += p->dims().c;
    }
  }
  return out;
}

namespace {

struct Tap {
  std::size_t i0, i1;
  double frac;
};

std::vector<Tap> resize_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::size_t>(src);
    taps[o] = Tap{i0, std::min(i0 + 1, in - 1), src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, std::size_t out_h, std::size_t out_w) {
  const Dims d = input.dims();
  if (out_h == 0 || out_w == 0) throw ShapeError("bilinear_resize: output size must be >= 1");
  if (d.h == 0 || d.w == 0) throw ShapeError("bilinear_resize: empty input");
  const auto ty = resize_taps(d.h, out_h);
  const auto tx = resize_taps(d.w, out_w);
  Tensor<T> out(d.n, d.c, out_h, out_w);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t c = 0; c < d.c; ++c) {
      const T* src = input.plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t y = 0; y < out_h; ++y) {
        const T* r0 = src + ty[y].i0 * d.w;
        const T* r1 = src + ty[y].i1 * d.w;
        for (std::size_t x = 0; x < out_w; ++x) {
          const Tap& t = tx[x];
          const double a = r0[t.i0], b = r0[t.i1], cc = r1[t.i0], e = r1[t.i1];
          const double top = a + t.frac * (b - a);
          const double bot = cc + t.frac * (e - cc);
          dst[y * out_w + x] = static_cast<T>(top + ty[y].frac * (bot - top));
        }
      }
    }
  return out;
}

template <typename T>
Tensor<T> bilinear_resize_grad(const Tensor<T>& grad_out, const Dims& input_dims) {
  const Dims g = grad_out.dims();
  const auto ty = resize_taps(input_dims.h, g.h);
  const auto tx = resize_taps(input_dims.w, g.w);
  std::vector<double> acc(input_dims.count(), 0.0);
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t c = 0; c < g.c; ++c) {
      const T* src = grad_out.plane(n, c);
      double* dst = acc.data() + (n * g.c + c) * input_dims.plane();
      for (std::size_t y = 0; y < g.h; ++y) {
        const double fy = ty[y].frac;
        for (std::size_t x = 0; x < g.w; ++x) {
          const double v = src[y * g.w + x];
          const double fx = tx[x].frac;
          dst[ty[y].i0 * input_dims.w + tx[x].i0] += v * (1 - fy) * (1 - fx);
          dst[ty[y].i0 * input_dims.w + tx[x].i1] += v * (1 - fy) * fx;
          dst[ty[y].i1 * input_dims.w + tx[x].i0] += v * fy * (1 - fx);
          dst[ty[y].i1 * input_dims.w + tx[x].i1] += v * fy * fx;
        }
      }
    }
  Tensor<T> out(input_dims);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
  return out;
}

namespace {
void check_xcorr(const Dims& z, const Dims& x) {
  if (z.n != x.n || z.c != x.c) throw ShapeError("xcorr: " + dims_pair("roi", z, "template", x));
  if (x.h > z.h || x.w > z.w || x.h == 0 || x.w == 0) {
    throw ShapeError("xcorr: template larger than roi features: " +
                     dims_pair("roi", z, "template", x));
  }
}
}  // namespace

template <typename T>
Tensor<T> xcorr(const Tensor<T>& roi, const Tensor<T>& tmpl) {
  const Dims z = roi.dims(), x = tmpl.dims();
  check_xcorr(z, x);
  const std::size_t ho = z.h - x.h + 1, wo = z.w - x.w + 1;
  Tensor<T> out(z.n, 1, ho, wo);
  for (std::size_t n = 0; n < z.n; ++n) {
    const auto w = to_double(std::span<const T>(tmpl.plane(n, 0), x.c * x.plane()));
    correlate_planes(roi.plane(n, 0), z.c, z.w, w.data(), 1, x.h, x.w, 1, 1, nullptr,
                     out.plane(n, 0), ho, wo, z.h);
  }
  return out;
}

template <typename T>
Tensor<T> xcorr_grad_roi(const Tensor<T>& grad_out, const Tensor<T>& tmpl, const Dims& roi_dims) {
  const Dims x = tmpl.dims(), g = grad_out.dims();
  check_xcorr(roi_dims, x);
  if (g.n != roi_dims.n || g.c != 1 || g.h != roi_dims.h - x.h + 1 || g.w != roi_dims.w - x.w + 1) {
    throw ShapeError("xcorr backward: " + dims_pair("grad", g, "roi", roi_dims));
  }
  const Tensor<T> gp = pad_planes(grad_out, static_cast<long>(x.h - 1), static_cast<long>(x.h - 1),
                                  static_cast<long>(x.w - 1), static_cast<long>(x.w - 1));
  Tensor<T> out(roi_dims);
  std::vector<double> flipped(x.c * x.plane());
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t c = 0; c < x.c; ++c)
      for (std::size_t u = 0; u < x.h; ++u)
        for (std::size_t v = 0; v < x.w; ++v)
          flipped[(c * x.h + u) * x.w + v] = tmpl.at(n, c, x.h - 1 - u, x.w - 1 - v);
    correlate_planes(gp.plane(n, 0), 1, gp.dims().w, flipped.data(), x.c, x.h, x.w, 1, 1,
                     nullptr, out.plane(n, 0), roi_dims.h, roi_dims.w, gp.dims().h);
  }
  return out;
}

template <typename T>
Tensor<T> xcorr_grad_tmpl(const Tensor<T>& grad_out, const Tensor<T>& roi, const Dims& tmpl_dims) {
  const Dims z = roi.dims(), g = grad_out.dims();
  check_xcorr(z, tmpl_dims);
  if (g.n != z.n || g.c != 1 || g.h != z.h - tmpl_dims.h + 1 || g.w != z.w - tmpl_dims.w + 1) {
    throw ShapeError("xcorr backward: " + dims_pair("grad", g, "roi", z));
  }
  Tensor<T> out(tmpl_dims);
  std::vector<double> acc(z.c * tmpl_dims.plane());
  for (std::size_t n = 0; n < z.n; ++n) {
    std::fill(acc.begin(), acc.end(), 0.0);
    accumulate_weight_grad(grad_out.plane(n, 0), 1, g.h, g.w, roi.plane(n, 0), z.c, z.h, z.w,
                           tmpl_dims.h, tmpl_dims.w, 1, acc.data());
    T* dst = out.plane(n, 0);
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<T>(acc[i]);
  }
  return out;
}

#define AMNET_INSTANTIATE_OPS(T)                                                                \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>*,             \
                            const ConvSpec&);                                                  \
  template Tensor<T> conv2d_grad_input(const Tensor<T>&, const Tensor<T>&, const ConvSpec&,   \
                                       const Dims&);                                           \
  template Tensor<T> conv2d_grad_weight(const Tensor<T>&, const Tensor<T>&, const ConvSpec&); \
  template Tensor<T> conv2d_grad_bias(const Tensor<T>&);                                       \
  template Tensor<T> avg_pool2d(const Tensor<T>&, const PoolSpec&);                            \
  template Tensor<T> avg_pool2d_grad(const Tensor<T>&, const Dims&, const PoolSpec&);          \
  template Tensor<T> max_pool2d(const Tensor<T>&, const PoolSpec&,                             \
                                std::vector<std::uint32_t>*);                                  \
  template Tensor<T> max_pool2d_grad(const Tensor<T>&, const Dims&,                            \
                                     std::span<const std::uint32_t>);                          \
  template Tensor<T> relu(const Tensor<T>&);                                                   \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                \
  template Tensor<T> subtract(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> concat_depth(std::span<const Tensor<T>* const>);                          \
  template Tensor<T> bilinear_resize(const Tensor<T>&, std::size_t, std::size_t);             \
  template Tensor<T> bilinear_resize_grad(const Tensor<T>&, const Dims&);                      \
  template Tensor<T> xcorr(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> xcorr_grad_roi(const Tensor<T>&, const Tensor<T>&, const Dims&);          \
  template Tensor<T> xcorr_grad_tmpl(const Tensor<T>&, const Tensor<T>&, const Dims&);

AMNET_INSTANTIATE_OPS(float)
AMNET_INSTANTIATE_OPS(double)

}  // namespace amnet::ops
