#include "stainnorm/linalg.hpp"

#include <algorithm>

namespace stainnorm {

SymmetricEigen eigen_symmetric(const Sym3& m) {
  double a[3][3] = {{m[0], m[1], m[2]}, {m[1], m[3], m[4]}, {m[2], m[4], m[5]}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off == 0.0 || off <= 1e-36 * diag) break;

    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });

  SymmetricEigen out{};
  for (int k = 0; k < 3; ++k) {
    const int c = order[k];
    out.values[k] = a[c][c];
    out.vectors[k] = normalized(Vec3{v[0][c], v[1][c], v[2][c]});
  }
  return out;
}

Vec3 rotate(const Vec3& v, const Vec3& axis, double theta) {
  const Vec3 k = normalized(axis);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Vec3 kxv = cross(k, v);
  const double kv = dot(k, v);
  return {v[0] * c + kxv[0] * s + k[0] * kv * (1.0 - c),
          v[1] * c + kxv[1] * s + k[1] * kv * (1.0 - c),
          v[2] * c + kxv[2] * s + k[2] * kv * (1.0 - c)};
}

}  // namespace stainnorm
