#pragma once

// Row-level arithmetic kernels behind every heavy tensor op.
//
// Each kernel has a portable scalar reference and an AVX2 variant. The AVX2
// variants vectorize across independent outputs (or across fixed lanes of a
// striped reduction that the scalar reference reproduces), so both paths are
// bit-identical for the same inputs. All accumulation happens in double.

#include <cstddef>
#include <string_view>

namespace amnet::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by the running CPU (and compiled in). The avx2 variant
/// also requires FMA.
Isa detected_isa();

/// ISA used by tensor ops. Defaults to detected_isa(), or to the value of
/// the AMNET_ISA environment variable ("scalar" / "avx2") when set.
Isa active_isa();

/// Overrides the active ISA. Throws std::runtime_error if unsupported.
void set_active_isa(Isa isa);

/// Lane count of the striped dot-product reduction.
inline constexpr std::size_t kDotLanes = 8;

/// Maximum number of accumulator rows handled by one correlate_rows call.
inline constexpr std::size_t kMaxRows = 4;

/// Shape of a multi-channel 2-D kernel window over a padded input.
struct Window {
  std::size_t channels = 1;
  std::size_t kernel_h = 1, kernel_w = 1;
  std::size_t dilation = 1, stride = 1;
  std::size_t row_stride = 0;    ///< elements between input rows
  std::size_t plane_stride = 0;  ///< elements between input channels
};

template <typename T>
struct Table {
  /// For j < rows and i < n:
  ///   acc[j][i] += sum_{c,ky,kx} taps[j][(c*kh + ky)*kw + kx]
  ///                * x[c*plane_stride + ky*dilation*row_stride + kx*dilation + i*stride]
  /// with terms added in (c, ky, kx) order. All rows read the same input.
  void (*correlate_rows)(double* const* acc, const double* const* taps, std::size_t rows,
                         const T* x, const Window& win, std::size_t n);
  /// For k < ntaps:
  ///   out[k] = out[k] + sum_{y<m, i<n} a[y*a_stride + i] * x[y*x_stride + k*dilation + i]
  /// Striped order: over full 8-element blocks of each row, element i goes to
  /// lane i % kDotLanes; the lanes then reduce pairwise. Leftover elements of
  /// every row go to a separate sum in row-major order, added last.
  void (*dot_taps)(double* out, const T* a, std::size_t a_stride, const T* x,
                   std::size_t x_stride, std::size_t ntaps, std::size_t dilation, std::size_t m,
                   std::size_t n);
  /// out[i] = T(acc[i] + bias)
  void (*store)(T* out, const double* acc, double bias, std::size_t n);
  /// out[i] = max(in[i], 0)
  void (*relu)(T* out, const T* in, std::size_t n);
  /// gin[i] += in[i] > 0 ? gout[i] : 0
  void (*relu_backward)(T* gin, const T* gout, const T* in, std::size_t n);
};

template <typename T>
const Table<T>& table(Isa isa);

template <typename T>
const Table<T>& table() {
  return table<T>(active_isa());
}

// Per-ISA tables, defined in the kernel translation units.
template <typename T>
const Table<T>& scalar_table();
#if defined(AMNET_HAVE_AVX2)
template <typename T>
const Table<T>& avx2_table();
#endif

}  // namespace amnet::kernels
