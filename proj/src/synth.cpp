#include "stainnorm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stainnorm/error.hpp"

namespace stainnorm {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kBackground = 1, kHematoxylin = 2, kEosin = 3 };

void validate(const SynthSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw StainError(ErrorCode::InvalidSpec, "empty image");
  if (!(spec.background_fraction >= 0.0 && spec.background_fraction < 1.0)) {
    throw StainError(ErrorCode::InvalidSpec, "background_fraction must lie in [0, 1)");
  }
  if (!(spec.i0 > 0.0)) throw StainError(ErrorCode::InvalidSpec, "i0 must be positive");
  const std::size_t n = spec.width * spec.height;
  if (const auto* u = std::get_if<UniformConcentrations>(&spec.concentrations)) {
    if (!(u->lo >= 0.0 && u->hi > u->lo)) {
      throw StainError(ErrorCode::InvalidSpec, "uniform law needs 0 <= lo < hi");
    }
  } else {
    const auto& e = std::get<ExplicitConcentrations>(spec.concentrations);
    if (e.hematoxylin.size() != n || e.eosin.size() != n) {
      throw StainError(ErrorCode::InvalidSpec, "explicit concentrations do not cover the image");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(e.hematoxylin[i] >= 0.0) || !(e.eosin[i] >= 0.0)) {
        throw StainError(ErrorCode::InvalidSpec, "concentrations must be non-negative");
      }
    }
  }
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = mix(mix(seed ^ mix(stream)) ^ index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

SynthImage synthesize(const SynthSpec& spec) {
  validate(spec);
  const std::size_t n = spec.width * spec.height;
  SynthImage out{RgbImage(spec.width, spec.height), {}};
  out.truth.hematoxylin.assign(n, 0.0);
  out.truth.eosin.assign(n, 0.0);

  const Vec3& h = spec.v_true.hematoxylin();
  const Vec3& e = spec.v_true.eosin();
  const auto* uniform = std::get_if<UniformConcentrations>(&spec.concentrations);
  const auto* explicit_law = std::get_if<ExplicitConcentrations>(&spec.concentrations);

  auto data = out.image.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.background_fraction > 0.0 &&
        counter_uniform(spec.rng_seed, kBackground, i) < spec.background_fraction) {
      data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = 255;
      continue;
    }
    double ch, ce;
    if (uniform) {
      const double span = uniform->hi - uniform->lo;
      ch = uniform->lo + span * counter_uniform(spec.rng_seed, kHematoxylin, i);
      ce = uniform->lo + span * counter_uniform(spec.rng_seed, kEosin, i);
    } else {
      ch = explicit_law->hematoxylin[i];
      ce = explicit_law->eosin[i];
    }
    out.truth.hematoxylin[i] = ch;
    out.truth.eosin[i] = ce;
    for (std::size_t c = 0; c < 3; ++c) {
      const double od = h[c] * ch + e[c] * ce;
      const double value = std::round(spec.i0 * std::pow(10.0, -od));
      data[3 * i + c] = static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0));
    }
  }
  return out;
}

StainMatrix rotate_stain_basis(const StainMatrix& v, const Vec3& axis, double theta) {
  if (!(norm(axis) > 0.0)) throw StainError(ErrorCode::InvalidParams, "rotation axis is zero");
  Vec3 a = rotate(v.hematoxylin(), axis, theta);
  Vec3 b = rotate(v.eosin(), axis, theta);
  // Rounding can push an exactly-zero component a hair below zero.
  for (Vec3* col : {&a, &b}) {
    for (double& x : *col) {
      if (x < 0.0 && x > -1e-12) x = 0.0;
    }
  }
  return StainMatrix::with_he_order(a, b);
}

Vec3 stain_rotation_axis(const StainMatrix& v) { return normalized(cross(v.hematoxylin(), v.eosin())); }

StainMatrix random_stain_matrix(std::uint64_t seed) {
  constexpr double kMinSeparation = 15.0 * std::numbers::pi / 180.0;
  constexpr double kMaxSeparation = 30.0 * std::numbers::pi / 180.0;
  auto draw_unit = [&](std::uint64_t& counter) {
    for (;;) {
      Vec3 v;
      for (double& x : v) x = counter_uniform(seed, 0xC01u, counter++);
      const double n = norm(v);
      if (n > 1e-3 && n <= 1.0) {  // uniform direction via rejection in the unit ball
        v = (1.0 / n) * v;
        if (v[0] >= 0.15 && v[1] >= 0.15 && v[2] >= 0.15) return v;
      }
    }
  };
  std::uint64_t counter = 0;
  for (;;) {
    const Vec3 a = draw_unit(counter);
    const Vec3 b = draw_unit(counter);
    const double sep = std::atan2(norm(cross(a, b)), dot(a, b));
    if (sep >= kMinSeparation && sep <= kMaxSeparation) return StainMatrix::with_he_order(a, b);
  }
}

}  // namespace stainnorm
