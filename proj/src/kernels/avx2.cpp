// Compiled with -mavx2 only; reached through the dispatch table after a cpuid check.

#include <immintrin.h>

#include "kernel_common.hpp"
#include "stainnorm/kernels.hpp"

namespace stainnorm::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

void od_from_rgb(const std::uint8_t* rgb, std::size_t n, const double* lut, double* r, double* g,
                 double* b) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const std::uint8_t* p = rgb + 3 * i;
    const __m128i ir = _mm_setr_epi32(p[0], p[3], p[6], p[9]);
    const __m128i ig = _mm_setr_epi32(p[1], p[4], p[7], p[10]);
    const __m128i ib = _mm_setr_epi32(p[2], p[5], p[8], p[11]);
    _mm256_storeu_pd(r + i, _mm256_i32gather_pd(lut, ir, 8));
    _mm256_storeu_pd(g + i, _mm256_i32gather_pd(lut, ig, 8));
    _mm256_storeu_pd(b + i, _mm256_i32gather_pd(lut, ib, 8));
  }
  scalar_table().od_from_rgb(rgb + 3 * i, n - i, lut, r + i, g + i, b + i);
}

void tissue_mask(const double* r, const double* g, const double* b, std::size_t n, double beta,
                 std::uint8_t* mask) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d m = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(_mm256_loadu_pd(r + i), vb, _CMP_GT_OQ),
                      _mm256_cmp_pd(_mm256_loadu_pd(g + i), vb, _CMP_GT_OQ)),
        _mm256_cmp_pd(_mm256_loadu_pd(b + i), vb, _CMP_GT_OQ));
    const int bits = _mm256_movemask_pd(m);
    mask[i] = bits & 1;
    mask[i + 1] = (bits >> 1) & 1;
    mask[i + 2] = (bits >> 2) & 1;
    mask[i + 3] = (bits >> 3) & 1;
  }
  scalar_table().tissue_mask(r + i, g + i, b + i, n - i, beta, mask + i);
}

void deconvolve(const double* r, const double* g, const double* b, std::size_t n,
                const double* pinv, double* s0, double* s1) {
  const __m256d p0 = _mm256_set1_pd(pinv[0]), p1 = _mm256_set1_pd(pinv[1]),
                p2 = _mm256_set1_pd(pinv[2]), p3 = _mm256_set1_pd(pinv[3]),
                p4 = _mm256_set1_pd(pinv[4]), p5 = _mm256_set1_pd(pinv[5]);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vr = _mm256_loadu_pd(r + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(s0 + i, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(p0, vr), _mm256_mul_pd(p1, vg)),
                                           _mm256_mul_pd(p2, vb)));
    _mm256_storeu_pd(s1 + i, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(p3, vr), _mm256_mul_pd(p4, vg)),
                                           _mm256_mul_pd(p5, vb)));
  }
  scalar_table().deconvolve(r + i, g + i, b + i, n - i, pinv, s0 + i, s1 + i);
}

void reconstruct_od(const double* s0, const double* s1, std::size_t n, double k0, double k1,
                    const double* v, double* r, double* g, double* b) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vk0 = _mm256_set1_pd(k0), vk1 = _mm256_set1_pd(k1);
  const __m256d v0 = _mm256_set1_pd(v[0]), v1 = _mm256_set1_pd(v[1]), v2 = _mm256_set1_pd(v[2]),
                v3 = _mm256_set1_pd(v[3]), v4 = _mm256_set1_pd(v[4]), v5 = _mm256_set1_pd(v[5]);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d c0 = _mm256_max_pd(_mm256_mul_pd(_mm256_loadu_pd(s0 + i), vk0), zero);
    const __m256d c1 = _mm256_max_pd(_mm256_mul_pd(_mm256_loadu_pd(s1 + i), vk1), zero);
    _mm256_storeu_pd(r + i, _mm256_add_pd(_mm256_mul_pd(v0, c0), _mm256_mul_pd(v1, c1)));
    _mm256_storeu_pd(g + i, _mm256_add_pd(_mm256_mul_pd(v2, c0), _mm256_mul_pd(v3, c1)));
    _mm256_storeu_pd(b + i, _mm256_add_pd(_mm256_mul_pd(v4, c0), _mm256_mul_pd(v5, c1)));
  }
  scalar_table().reconstruct_od(s0 + i, s1 + i, n - i, k0, k1, v, r + i, g + i, b + i);
}

void project(const double* r, const double* g, const double* b, std::size_t n, const double* e1,
             const double* e2, double* x, double* y) {
  const __m256d a0 = _mm256_set1_pd(e1[0]), a1 = _mm256_set1_pd(e1[1]), a2 = _mm256_set1_pd(e1[2]);
  const __m256d c0 = _mm256_set1_pd(e2[0]), c1 = _mm256_set1_pd(e2[1]), c2 = _mm256_set1_pd(e2[2]);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vr = _mm256_loadu_pd(r + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a0, vr), _mm256_mul_pd(a1, vg)),
                                          _mm256_mul_pd(a2, vb)));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(c0, vr), _mm256_mul_pd(c1, vg)),
                                          _mm256_mul_pd(c2, vb)));
  }
  scalar_table().project(r + i, g + i, b + i, n - i, e1, e2, x + i, y + i);
}

void scatter(const double* r, const double* g, const double* b, std::size_t n, double* out6) {
  __m256d xx = _mm256_setzero_pd(), xy = xx, xz = xx, yy = xx, yz = xx, zz = xx;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vr = _mm256_loadu_pd(r + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(vr, vr));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(vr, vg));
    xz = _mm256_add_pd(xz, _mm256_mul_pd(vr, vb));
    yy = _mm256_add_pd(yy, _mm256_mul_pd(vg, vg));
    yz = _mm256_add_pd(yz, _mm256_mul_pd(vg, vb));
    zz = _mm256_add_pd(zz, _mm256_mul_pd(vb, vb));
  }
  ScatterLanes lanes;
  _mm256_storeu_pd(lanes.xx, xx);
  _mm256_storeu_pd(lanes.xy, xy);
  _mm256_storeu_pd(lanes.xz, xz);
  _mm256_storeu_pd(lanes.yy, yy);
  _mm256_storeu_pd(lanes.yz, yz);
  _mm256_storeu_pd(lanes.zz, zz);
  for (; i < n; ++i) lanes.add(i % kLanes, r[i], g[i], b[i]);
  lanes.finish(out6);
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{Isa::Avx2, od_from_rgb, tissue_mask, deconvolve,
                                 reconstruct_od, project, scatter};
  return table;
}

}  // namespace stainnorm::kernels::detail
