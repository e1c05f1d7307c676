#pragma once

// Lambert-Beer forward model: render RGB tiles from known stain vectors and
// concentrations. Serves as ground truth for estimator and strategy tests.

#include <cstdint>
#include <variant>
#include <vector>

#include "stainnorm/stain_math.hpp"

namespace stainnorm {

// Each stain drawn independently, uniform on [lo, hi).
struct UniformConcentrations {
  double lo = 0.2;
  double hi = 1.5;
};

// Explicit per-pixel concentrations, row-major, width * height entries each.
struct ExplicitConcentrations {
  std::vector<double> hematoxylin;
  std::vector<double> eosin;
};

struct SynthSpec {
  StainMatrix v_true;
  std::variant<UniformConcentrations, ExplicitConcentrations> concentrations = UniformConcentrations{};
  std::size_t width = 128;
  std::size_t height = 128;
  std::uint64_t rng_seed = 0;
  double background_fraction = 0.0;  // in [0, 1)
  double i0 = kDefaultI0;
};

struct SynthImage {
  RgbImage image;
  ConcentrationMatrix truth;  // zero at background pixels
};

// Throws InvalidSpec. Randomness is counter-based per pixel, so output depends
// only on the spec.
SynthImage synthesize(const SynthSpec& spec);

// Rotates both columns about axis, renormalizes and reapplies H/E ordering.
// Throws InvalidStainMatrix if a rotated column leaves the non-negative orthant.
StainMatrix rotate_stain_basis(const StainMatrix& v, const Vec3& axis, double theta);

// Axis used for controlled stain variation: the normal of the stain plane, so
// rotation turns both columns within the plane and shifts the hue.
Vec3 stain_rotation_axis(const StainMatrix& v);

// Seeded random stain pair: unit vectors with every component >= 0.15 and a
// column separation between 15 and 30 degrees.
StainMatrix random_stain_matrix(std::uint64_t seed);

// Uniform double in [0, 1) from a (seed, stream, index) counter.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace stainnorm
