#pragma once

#include <array>
#include <cmath>

namespace stainnorm {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double component_sum(const Vec3& a) { return a[0] + a[1] + a[2]; }

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

// Symmetric 3x3 matrix stored as its upper triangle: xx, xy, xz, yy, yz, zz.
using Sym3 = std::array<double, 6>;

struct SymmetricEigen {
  std::array<double, 3> values;   // descending
  std::array<Vec3, 3> vectors;    // unit length, vectors[k] pairs with values[k]
};

// Cyclic Jacobi rotations; converges to machine precision in a handful of sweeps
// for 3x3 input.
SymmetricEigen eigen_symmetric(const Sym3& m);

// Rodrigues rotation of v about the unit direction of axis by theta radians.
Vec3 rotate(const Vec3& v, const Vec3& axis, double theta);

}  // namespace stainnorm
