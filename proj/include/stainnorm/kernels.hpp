#pragma once

// Per-pixel inner loops of the stain pipeline. Every kernel has a scalar
// reference implementation and optional SIMD variants; all variants of a kernel
// produce bit-identical output for the same input, so the dispatch choice never
// changes results. Pixel data is structure-of-arrays (one plane per channel).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace stainnorm::kernels {

enum class Isa { Scalar, Sse2, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;

  // od[c][i] = lut[rgb[3 i + c]]
  void (*od_from_rgb)(const std::uint8_t* rgb, std::size_t n, const double* lut,
                      double* r, double* g, double* b);

  // mask[i] = r[i] > beta && g[i] > beta && b[i] > beta
  void (*tissue_mask)(const double* r, const double* g, const double* b, std::size_t n,
                      double beta, std::uint8_t* mask);

  // Row-major 2x3 pseudo-inverse applied per pixel.
  void (*deconvolve)(const double* r, const double* g, const double* b, std::size_t n,
                     const double* pinv, double* s0, double* s1);

  // od_c = v[c][0] * max(s0 * k0, 0) + v[c][1] * max(s1 * k1, 0), v row-major 3x2.
  void (*reconstruct_od)(const double* s0, const double* s1, std::size_t n, double k0, double k1,
                         const double* v, double* r, double* g, double* b);

  // x = e1 . od, y = e2 . od
  void (*project)(const double* r, const double* g, const double* b, std::size_t n,
                  const double* e1, const double* e2, double* x, double* y);

  // Upper triangle of sum(od od^T). Summation uses four interleaved partial sums
  // (pixel i goes to lane i % 4) combined as (l0 + l1) + (l2 + l3).
  void (*scatter)(const double* r, const double* g, const double* b, std::size_t n, double* out6);
};

const KernelTable& scalar_table() noexcept;

// Tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

// The table used by the library. Defaults to the widest supported ISA.
const KernelTable& active() noexcept;

// Pin the active table; returns false if the ISA is not supported here.
bool select(Isa isa) noexcept;

namespace detail {
#if defined(STAINNORM_HAVE_X86_KERNELS)
const KernelTable& sse2_table() noexcept;
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace stainnorm::kernels
