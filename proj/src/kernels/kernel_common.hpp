#pragma once

#include <cstddef>

namespace stainnorm::kernels::detail {

// Matches _mm_max_pd(x, 0) / _mm256_max_pd(x, 0): the second operand wins on
// ties and NaN, so -0.0 and NaN both map to +0.0.
inline double clamp_zero(double x) { return x > 0.0 ? x : 0.0; }

// Four-lane partial sums for the scatter kernel. SIMD variants keep the same
// lanes in registers and spill them here for the remainder and final combine.
struct ScatterLanes {
  double xx[4] = {}, xy[4] = {}, xz[4] = {}, yy[4] = {}, yz[4] = {}, zz[4] = {};

  void add(std::size_t lane, double r, double g, double b) {
    xx[lane] += r * r;
    xy[lane] += r * g;
    xz[lane] += r * b;
    yy[lane] += g * g;
    yz[lane] += g * b;
    zz[lane] += b * b;
  }

  static double combine(const double* l) { return (l[0] + l[1]) + (l[2] + l[3]); }

  void finish(double* out6) const {
    out6[0] = combine(xx);
    out6[1] = combine(xy);
    out6[2] = combine(xz);
    out6[3] = combine(yy);
    out6[4] = combine(yz);
    out6[5] = combine(zz);
  }
};

}  // namespace stainnorm::kernels::detail
