// Compiled with -mavx2 -mfma; only reached through runtime dispatch.

#include <immintrin.h>

#include <type_traits>

#include "amnet/kernels.hpp"

namespace amnet::kernels {
namespace {

inline __m256d load4(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }
inline __m256d load4(const double* p) { return _mm256_loadu_pd(p); }

// For float inputs the product of two widened floats is exact in double, so a
// fused multiply-add rounds exactly like the scalar multiply-then-add. Double
// inputs keep the two separate operations.
template <typename T>
inline __m256d madd(__m256d acc, __m256d w, __m256d x) {
  if constexpr (std::is_same_v<T, float>) {
    return _mm256_fmadd_pd(w, x, acc);
  } else {
    return _mm256_add_pd(acc, _mm256_mul_pd(w, x));
  }
}

template <typename T, int R, int V>
void correlate_block(double* const* acc, const double* const* taps, const T* x, const Window& win,
                     std::size_t& i, std::size_t n) {
  const std::size_t d = win.dilation;
  for (; i + 4 * V <= n; i += 4 * V) {
    __m256d a[R][V];
    for (int j = 0; j < R; ++j)
      for (int v = 0; v < V; ++v) a[j][v] = _mm256_loadu_pd(acc[j] + i + 4 * v);
    std::size_t t = 0;
    for (std::size_t c = 0; c < win.channels; ++c) {
      for (std::size_t ky = 0; ky < win.kernel_h; ++ky) {
        const T* base = x + c * win.plane_stride + ky * d * win.row_stride + i;
        for (std::size_t kx = 0; kx < win.kernel_w; ++kx, ++t) {
          const T* p = base + kx * d;
          __m256d xv[V];
          for (int v = 0; v < V; ++v) xv[v] = load4(p + 4 * v);
          for (int j = 0; j < R; ++j) {
            const __m256d w = _mm256_broadcast_sd(taps[j] + t);
            for (int v = 0; v < V; ++v) a[j][v] = madd<T>(a[j][v], w, xv[v]);
          }
        }
      }
    }
    for (int j = 0; j < R; ++j)
      for (int v = 0; v < V; ++v) _mm256_storeu_pd(acc[j] + i + 4 * v, a[j][v]);
  }
}

template <typename T, int R>
void correlate_fixed(double* const* acc, const double* const* taps, const T* x, const Window& win,
                     std::size_t n) {
  std::size_t i = 0;
  correlate_block<T, R, (R == 1 ? 4 : 2)>(acc, taps, x, win, i, n);
  correlate_block<T, R, 1>(acc, taps, x, win, i, n);
  if (i < n) {
    double* tail_acc[R];
    for (int j = 0; j < R; ++j) tail_acc[j] = acc[j] + i;
    scalar_table<T>().correlate_rows(tail_acc, taps, R, x + i, win, n - i);
  }
}

template <typename T>
void correlate_rows(double* const* acc, const double* const* taps, std::size_t rows, const T* x,
                    const Window& win, std::size_t n) {
  if (win.stride != 1) {
    scalar_table<T>().correlate_rows(acc, taps, rows, x, win, n);
    return;
  }
  while (rows > 0) {
    const std::size_t r = rows < kMaxRows ? rows : kMaxRows;
    switch (r) {
      case 1: correlate_fixed<T, 1>(acc, taps, x, win, n); break;
      case 2: correlate_fixed<T, 2>(acc, taps, x, win, n); break;
      case 3: correlate_fixed<T, 3>(acc, taps, x, win, n); break;
      default: correlate_fixed<T, 4>(acc, taps, x, win, n); break;
    }
    acc += r;
    taps += r;
    rows -= r;
  }
}

// C taps at once, each with the two 4-lane halves of an 8-lane striped dot.
template <typename T, int C>
void dot_chunk(double* out, const T* a, std::size_t a_stride, const T* x, std::size_t x_stride,
               std::size_t dilation, std::size_t m, std::size_t n) {
  static_assert(kDotLanes == 8);
  __m256d lo[C], hi[C];
  for (int c = 0; c < C; ++c) lo[c] = hi[c] = _mm256_setzero_pd();
  const std::size_t full = n - n % kDotLanes;
  for (std::size_t y = 0; y < m; ++y) {
    const T* ar = a + y * a_stride;
    const T* xr = x + y * x_stride;
    for (std::size_t i = 0; i < full; i += kDotLanes) {
      const __m256d a0 = load4(ar + i), a1 = load4(ar + i + 4);
      for (int c = 0; c < C; ++c) {
        const T* p = xr + c * dilation + i;
        lo[c] = madd<T>(lo[c], a0, load4(p));
        hi[c] = madd<T>(hi[c], a1, load4(p + 4));
      }
    }
  }
  for (int c = 0; c < C; ++c) {
    double tail = 0.0;
    if (full < n) {
      for (std::size_t y = 0; y < m; ++y) {
        const T* ar = a + y * a_stride;
        const T* xr = x + y * x_stride + c * dilation;
        for (std::size_t i = full; i < n; ++i) {
          tail = tail + static_cast<double>(ar[i]) * static_cast<double>(xr[i]);
        }
      }
    }
    alignas(32) double t[4];
    _mm256_store_pd(t, _mm256_add_pd(lo[c], hi[c]));
    out[c] = out[c] + (((t[0] + t[1]) + (t[2] + t[3])) + tail);
  }
}

template <typename T>
void dot_taps(double* out, const T* a, std::size_t a_stride, const T* x, std::size_t x_stride,
              std::size_t ntaps, std::size_t dilation, std::size_t m, std::size_t n) {
  while (ntaps > 0) {
    const std::size_t c = ntaps < 5 ? ntaps : 5;
    switch (c) {
      case 1: dot_chunk<T, 1>(out, a, a_stride, x, x_stride, dilation, m, n); break;
      case 2: dot_chunk<T, 2>(out, a, a_stride, x, x_stride, dilation, m, n); break;
      case 3: dot_chunk<T, 3>(out, a, a_stride, x, x_stride, dilation, m, n); break;
      case 4: dot_chunk<T, 4>(out, a, a_stride, x, x_stride, dilation, m, n); break;
      default: dot_chunk<T, 5>(out, a, a_stride, x, x_stride, dilation, m, n); break;
    }
    out += c;
    x += c * dilation;
    ntaps -= c;
  }
}

void store(float* out, const double* acc, double bias, std::size_t n) {
  const __m256d b = _mm256_set1_pd(bias);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm_storeu_ps(out + i, _mm256_cvtpd_ps(_mm256_add_pd(_mm256_loadu_pd(acc + i), b)));
  }
  for (; i < n; ++i) out[i] = static_cast<float>(acc[i] + bias);
}

void store(double* out, const double* acc, double bias, std::size_t n) {
  const __m256d b = _mm256_set1_pd(bias);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), b));
  for (; i < n; ++i) out[i] = acc[i] + bias;
}

void relu(float* out, const float* in, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(out + i, _mm256_max_ps(_mm256_loadu_ps(in + i), zero));
  for (; i < n; ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
}

void relu(double* out, const double* in, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(in + i), zero));
  for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(float* gin, const float* gout, const float* in, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(in + i), zero, _CMP_GT_OQ);
    const __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(gout + i));
    _mm256_storeu_ps(gin + i, _mm256_add_ps(_mm256_loadu_ps(gin + i), g));
  }
  for (; i < n; ++i) gin[i] = gin[i] + (in[i] > 0.0f ? gout[i] : 0.0f);
}

void relu_backward(double* gin, const double* gout, const double* in, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(in + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(gout + i));
    _mm256_storeu_pd(gin + i, _mm256_add_pd(_mm256_loadu_pd(gin + i), g));
  }
  for (; i < n; ++i) gin[i] = gin[i] + (in[i] > 0.0 ? gout[i] : 0.0);
}

}  // namespace

template <typename T>
const Table<T>& avx2_table() {
  static const Table<T> t{
      &correlate_rows<T>,
      &dot_taps<T>,
      static_cast<void (*)(T*, const double*, double, std::size_t)>(&store),
      static_cast<void (*)(T*, const T*, std::size_t)>(&relu),
      static_cast<void (*)(T*, const T*, const T*, std::size_t)>(&relu_backward)};
  return t;
}

template const Table<float>& avx2_table<float>();
template const Table<double>& avx2_table<double>();

}  // namespace amnet::kernels
