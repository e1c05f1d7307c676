// Two-lane variant for x86-64 baseline machines.

#include <emmintrin.h>

#include "kernel_common.hpp"
#include "stainnorm/kernels.hpp"

namespace stainnorm::kernels::detail {
namespace {

constexpr std::size_t kLanes = 2;

void od_from_rgb(const std::uint8_t* rgb, std::size_t n, const double* lut, double* r, double* g,
                 double* b) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const std::uint8_t* p = rgb + 3 * i;
    _mm_storeu_pd(r + i, _mm_setr_pd(lut[p[0]], lut[p[3]]));
    _mm_storeu_pd(g + i, _mm_setr_pd(lut[p[1]], lut[p[4]]));
    _mm_storeu_pd(b + i, _mm_setr_pd(lut[p[2]], lut[p[5]]));
  }
  scalar_table().od_from_rgb(rgb + 3 * i, n - i, lut, r + i, g + i, b + i);
}

void tissue_mask(const double* r, const double* g, const double* b, std::size_t n, double beta,
                 std::uint8_t* mask) {
  const __m128d vb = _mm_set1_pd(beta);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m128d m = _mm_and_pd(_mm_and_pd(_mm_cmpgt_pd(_mm_loadu_pd(r + i), vb),
                                            _mm_cmpgt_pd(_mm_loadu_pd(g + i), vb)),
                                 _mm_cmpgt_pd(_mm_loadu_pd(b + i), vb));
    const int bits = _mm_movemask_pd(m);
    mask[i] = bits & 1;
    mask[i + 1] = (bits >> 1) & 1;
  }
  scalar_table().tissue_mask(r + i, g + i, b + i, n - i, beta, mask + i);
}

inline __m128d dot3(__m128d a0, __m128d a1, __m128d a2, __m128d x, __m128d y, __m128d z) {
  return _mm_add_pd(_mm_add_pd(_mm_mul_pd(a0, x), _mm_mul_pd(a1, y)), _mm_mul_pd(a2, z));
}

void deconvolve(const double* r, const double* g, const double* b, std::size_t n,
                const double* pinv, double* s0, double* s1) {
  const __m128d p0 = _mm_set1_pd(pinv[0]), p1 = _mm_set1_pd(pinv[1]), p2 = _mm_set1_pd(pinv[2]),
                p3 = _mm_set1_pd(pinv[3]), p4 = _mm_set1_pd(pinv[4]), p5 = _mm_set1_pd(pinv[5]);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m128d vr = _mm_loadu_pd(r + i);
    const __m128d vg = _mm_loadu_pd(g + i);
    const __m128d vb = _mm_loadu_pd(b + i);
    _mm_storeu_pd(s0 + i, dot3(p0, p1, p2, vr, vg, vb));
    _mm_storeu_pd(s1 + i, dot3(p3, p4, p5, vr, vg, vb));
  }
  scalar_table().deconvolve(r + i, g + i, b + i, n - i, pinv, s0 + i, s1 + i);
}

void reconstruct_od(const double* s0, const double* s1, std::size_t n, double k0, double k1,
                    const double* v, double* r, double* g, double* b) {
  const __m128d zero = _mm_setzero_pd();
  const __m128d vk0 = _mm_set1_pd(k0), vk1 = _mm_set1_pd(k1);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m128d c0 = _mm_max_pd(_mm_mul_pd(_mm_loadu_pd(s0 + i), vk0), zero);
    const __m128d c1 = _mm_max_pd(_mm_mul_pd(_mm_loadu_pd(s1 + i), vk1), zero);
    _mm_storeu_pd(r + i, _mm_add_pd(_mm_mul_pd(_mm_set1_pd(v[0]), c0), _mm_mul_pd(_mm_set1_pd(v[1]), c1)));
    _mm_storeu_pd(g + i, _mm_add_pd(_mm_mul_pd(_mm_set1_pd(v[2]), c0), _mm_mul_pd(_mm_set1_pd(v[3]), c1)));
    _mm_storeu_pd(b + i, _mm_add_pd(_mm_mul_pd(_mm_set1_pd(v[4]), c0), _mm_mul_pd(_mm_set1_pd(v[5]), c1)));
  }
  scalar_table().reconstruct_od(s0 + i, s1 + i, n - i, k0, k1, v, r + i, g + i, b + i);
}

void project(const double* r, const double* g, const double* b, std::size_t n, const double* e1,
             const double* e2, double* x, double* y) {
  const __m128d a0 = _mm_set1_pd(e1[0]), a1 = _mm_set1_pd(e1[1]), a2 = _mm_set1_pd(e1[2]);
  const __m128d c0 = _mm_set1_pd(e2[0]), c1 = _mm_set1_pd(e2[1]), c2 = _mm_set1_pd(e2[2]);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m128d vr = _mm_loadu_pd(r + i);
    const __m128d vg = _mm_loadu_pd(g + i);
    const __m128d vb = _mm_loadu_pd(b + i);
    _mm_storeu_pd(x + i, dot3(a0, a1, a2, vr, vg, vb));
    _mm_storeu_pd(y + i, dot3(c0, c1, c2, vr, vg, vb));
  }
  scalar_table().project(r + i, g + i, b + i, n - i, e1, e2, x + i, y + i);
}

// Lanes 0-1 live in the *_lo registers, lanes 2-3 in *_hi.
void scatter(const double* r, const double* g, const double* b, std::size_t n, double* out6) {
  __m128d acc[2][6] = {};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int half = 0; half < 2; ++half) {
      const __m128d vr = _mm_loadu_pd(r + i + 2 * half);
      const __m128d vg = _mm_loadu_pd(g + i + 2 * half);
      const __m128d vb = _mm_loadu_pd(b + i + 2 * half);
      __m128d* a = acc[half];
      a[0] = _mm_add_pd(a[0], _mm_mul_pd(vr, vr));
      a[1] = _mm_add_pd(a[1], _mm_mul_pd(vr, vg));
      a[2] = _mm_add_pd(a[2], _mm_mul_pd(vr, vb));
      a[3] = _mm_add_pd(a[3], _mm_mul_pd(vg, vg));
      a[4] = _mm_add_pd(a[4], _mm_mul_pd(vg, vb));
      a[5] = _mm_add_pd(a[5], _mm_mul_pd(vb, vb));
    }
  }
  ScatterLanes lanes;
  double* dst[6] = {lanes.xx, lanes.xy, lanes.xz, lanes.yy, lanes.yz, lanes.zz};
  for (int k = 0; k < 6; ++k) {
    _mm_storeu_pd(dst[k], acc[0][k]);
    _mm_storeu_pd(dst[k] + 2, acc[1][k]);
  }
  for (; i < n; ++i) lanes.add(i % 4, r[i], g[i], b[i]);
  lanes.finish(out6);
}

}  // namespace

const KernelTable& sse2_table() noexcept {
  static const KernelTable table{Isa::Sse2, od_from_rgb, tissue_mask, deconvolve,
                                 reconstruct_od, project, scatter};
  return table;
}

}  // namespace stainnorm::kernels::detail
