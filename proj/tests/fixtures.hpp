#pragma once

// Shared helpers for unit and acceptance tests. Oracles here are written
// independently of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "stainnorm/linalg.hpp"
#include "stainnorm/stain_math.hpp"
#include "stainnorm/synth.hpp"

namespace stainnorm::testing {

inline double degrees(double d) { return d * std::numbers::pi / 180.0; }

inline double cosine(const Vec3& a, const Vec3& b) { return dot(a, b) / (norm(a) * norm(b)); }

// Best column matching up to permutation: min cosine over the matched pair.
inline double matched_cosine(const StainMatrix& est, const StainMatrix& truth) {
  const double straight = std::min(cosine(est.hematoxylin(), truth.hematoxylin()),
                                    cosine(est.eosin(), truth.eosin()));
  const double swapped = std::min(cosine(est.hematoxylin(), truth.eosin()),
                                  cosine(est.eosin(), truth.hematoxylin()));
  return std::max(straight, swapped);
}

// Sum over columns of (1 - cosine), columns paired in H/E order.
inline double cosine_distance(const StainMatrix& a, const StainMatrix& b) {
  return (1.0 - cosine(a.hematoxylin(), b.hematoxylin())) + (1.0 - cosine(a.eosin(), b.eosin()));
}

// Solves (V^T V) s = V^T od by Cramer's rule, written out element by element.
inline std::array<double, 2> normal_equations_solve(const Vec3& h, const Vec3& e, const Vec3& od) {
  double g00 = 0, g01 = 0, g11 = 0, r0 = 0, r1 = 0;
  for (int c = 0; c < 3; ++c) {
    g00 += h[c] * h[c];
    g01 += h[c] * e[c];
    g11 += e[c] * e[c];
    r0 += h[c] * od[c];
    r1 += e[c] * od[c];
  }
  const double det = g00 * g11 - g01 * g01;
  return {(r0 * g11 - g01 * r1) / det, (g00 * r1 - g01 * r0) / det};
}

inline Vec3 random_positive_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  return normalized(Vec3{u(rng), u(rng), u(rng)});
}

// Standard fixture: seeded random stain pair, 128x128, uniform(0.2, 1.5).
inline SynthImage synthetic(std::uint64_t seed, std::size_t size = 128, double background = 0.0) {
  SynthSpec spec{random_stain_matrix(seed)};
  spec.width = spec.height = size;
  spec.rng_seed = seed;
  spec.background_fraction = background;
  return synthesize(spec);
}

inline SynthImage synthetic_with(const StainMatrix& v, std::uint64_t seed, std::size_t size = 128,
                                 double lo = 0.2, double hi = 1.5) {
  SynthSpec spec{v};
  spec.width = spec.height = size;
  spec.rng_seed = seed;
  spec.concentrations = UniformConcentrations{lo, hi};
  return synthesize(spec);
}

inline RgbImage white_image(std::size_t w, std::size_t h) {
  return RgbImage(w, h, std::vector<std::uint8_t>(w * h * 3, 255));
}

// Gray ramp: every OD pixel lies on the (1,1,1) ray.
inline RgbImage gray_ramp(std::size_t w, std::size_t h) {
  RgbImage img(w, h);
  auto d = img.data();
  for (std::size_t i = 0; i < w * h; ++i) {
    const auto v = static_cast<std::uint8_t>(20 + (i % 150));
    d[3 * i] = d[3 * i + 1] = d[3 * i + 2] = v;
  }
  return img;
}

inline RgbImage flipped_horizontally(const RgbImage& img) {
  RgbImage out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const auto* src = img.pixel(img.width() - 1 - x, y);
      auto* dst = out.pixel(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

inline RgbImage shuffled(const RgbImage& img, std::uint64_t seed) {
  std::vector<std::size_t> order(img.pixel_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  RgbImage out(img.width(), img.height());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.data()[3 * i + c] = img.data()[3 * order[i] + c];
  }
  return out;
}

inline std::array<double, 3> channel_means(const RgbImage& img) {
  std::array<double, 3> m{};
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) m[c] += img.data()[3 * i + c];
  }
  for (double& x : m) x /= static_cast<double>(img.pixel_count());
  return m;
}

inline double mean_abs_diff(const RgbImage& a, const RgbImage& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    sum += std::abs(static_cast<int>(a.data()[i]) - static_cast<int>(b.data()[i]));
  }
  return sum / static_cast<double>(a.data().size());
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(STAINNORM_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace stainnorm::testing
