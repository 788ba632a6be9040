#include "amnet/kernels.hpp"

namespace amnet::kernels {
namespace {

template <typename T>
void correlate_rows(double* const* acc, const double* const* taps, std::size_t rows, const T* x,
                    const Window& win, std::size_t n) {
  const std::size_t kh = win.kernel_h, kw = win.kernel_w, d = win.dilation;
  for (std::size_t j = 0; j < rows; ++j) {
    double* a = acc[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double* w = taps[j];
      double s = a[i];
      for (std::size_t c = 0; c < win.channels; ++c) {
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const T* base = x + c * win.plane_stride + ky * d * win.row_stride + i * win.stride;
          for (std::size_t kx = 0; kx < kw; ++kx) s = s + *w++ * static_cast<double>(base[kx * d]);
        }
      }
      a[i] = s;
    }
  }
}

template <typename T>
void dot_taps(double* out, const T* a, std::size_t a_stride, const T* x, std::size_t x_stride,
              std::size_t ntaps, std::size_t dilation, std::size_t m, std::size_t n) {
  const std::size_t full = n - n % kDotLanes;
  for (std::size_t k = 0; k < ntaps; ++k) {
    double lane[kDotLanes] = {};
    double tail = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      const T* ar = a + y * a_stride;
      const T* xr = x + y * x_stride + k * dilation;
      for (std::size_t i = 0; i < full; i += kDotLanes) {
        for (std::size_t j = 0; j < kDotLanes; ++j) {
          lane[j] = lane[j] + static_cast<double>(ar[i + j]) * static_cast<double>(xr[i + j]);
        }
      }
      for (std::size_t i = full; i < n; ++i) {
        tail = tail + static_cast<double>(ar[i]) * static_cast<double>(xr[i]);
      }
    }
    // Mirrors the vector reduction: the two 4-lane halves added, then a
    // pairwise horizontal sum.
    double t[4];
    for (std::size_t j = 0; j < 4; ++j) t[j] = lane[j] + lane[j + 4];
    out[k] = out[k] + (((t[0] + t[1]) + (t[2] + t[3])) + tail);
  }
}

template <typename T>
void store(T* out, const double* acc, double bias, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(acc[i] + bias);
}

template <typename T>
void relu(T* out, const T* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <typename T>
void relu_backward(T* gin, const T* gout, const T* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) gin[i] = gin[i] + (in[i] > T(0) ? gout[i] : T(0));
}

}  // namespace

template <typename T>
const Table<T>& scalar_table() {
  static const Table<T> t{&correlate_rows<T>, &dot_taps<T>, &store<T>, &relu<T>, &relu_backward<T>};
  return t;
}

template const Table<float>& scalar_table<float>();
template const Table<double>& scalar_table<double>();

}  // namespace amnet::kernels
