#include "stainnorm/kernels.hpp"

#include "kernel_common.hpp"

namespace stainnorm::kernels {
namespace {

void od_from_rgb(const std::uint8_t* rgb, std::size_t n, const double* lut, double* r, double* g,
                 double* b) {
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = lut[rgb[3 * i]];
    g[i] = lut[rgb[3 * i + 1]];
    b[i] = lut[rgb[3 * i + 2]];
  }
}

void tissue_mask(const double* r, const double* g, const double* b, std::size_t n, double beta,
                 std::uint8_t* mask) {
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = (r[i] > beta && g[i] > beta && b[i] > beta) ? 1 : 0;
  }
}

void deconvolve(const double* r, const double* g, const double* b, std::size_t n,
                const double* pinv, double* s0, double* s1) {
  for (std::size_t i = 0; i < n; ++i) {
    s0[i] = (pinv[0] * r[i] + pinv[1] * g[i]) + pinv[2] * b[i];
    s1[i] = (pinv[3] * r[i] + pinv[4] * g[i]) + pinv[5] * b[i];
  }
}

void reconstruct_od(const double* s0, const double* s1, std::size_t n, double k0, double k1,
                    const double* v, double* r, double* g, double* b) {
  for (std::size_t i = 0; i < n; ++i) {
    const double c0 = detail::clamp_zero(s0[i] * k0);
    const double c1 = detail::clamp_zero(s1[i] * k1);
    r[i] = v[0] * c0 + v[1] * c1;
    g[i] = v[2] * c0 + v[3] * c1;
    b[i] = v[4] * c0 + v[5] * c1;
  }
}

void project(const double* r, const double* g, const double* b, std::size_t n, const double* e1,
             const double* e2, double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (e1[0] * r[i] + e1[1] * g[i]) + e1[2] * b[i];
    y[i] = (e2[0] * r[i] + e2[1] * g[i]) + e2[2] * b[i];
  }
}

void scatter(const double* r, const double* g, const double* b, std::size_t n, double* out6) {
  detail::ScatterLanes lanes;
  for (std::size_t i = 0; i < n; ++i) lanes.add(i % 4, r[i], g[i], b[i]);
  lanes.finish(out6);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::Scalar, od_from_rgb, tissue_mask, deconvolve,
                                 reconstruct_od, project, scatter};
  return table;
}

}  // namespace stainnorm::kernels
