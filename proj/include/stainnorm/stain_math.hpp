#pragma once

// Pixel <-> optical density conversion, least-squares stain deconvolution and
// reconstruction of an RGB image from stain concentrations.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stainnorm/image.hpp"
#include "stainnorm/linalg.hpp"

namespace stainnorm {

inline constexpr double kDefaultI0 = 255.0;

// Per-pixel base-10 absorbance, one plane per channel.
class OdPixels {
 public:
  OdPixels() = default;
  explicit OdPixels(std::size_t count);

  static OdPixels from_pixels(std::span<const Vec3> pixels);

  std::size_t size() const noexcept { return channels_[0].size(); }
  bool empty() const noexcept { return size() == 0; }

  Vec3 pixel(std::size_t i) const noexcept { return {channels_[0][i], channels_[1][i], channels_[2][i]}; }
  void set(std::size_t i, const Vec3& od) noexcept;
  void push_back(const Vec3& od);
  void reserve(std::size_t n);
  void append(const OdPixels& other);

  std::span<const double> channel(std::size_t c) const noexcept { return channels_[c]; }
  std::span<double> channel(std::size_t c) noexcept { return channels_[c]; }

  friend bool operator==(const OdPixels&, const OdPixels&) = default;

 private:
  std::array<std::vector<double>, 3> channels_;
};

// 3x2 matrix of unit-norm OD-space stain directions; column 0 is hematoxylin,
// column 1 eosin.
class StainMatrix {
 public:
  // Normalizes both columns and keeps the given order. Throws InvalidStainMatrix
  // for zero-length columns or components below -1e-9 after normalization.
  static StainMatrix from_columns(const Vec3& hematoxylin, const Vec3& eosin);

  // Normalizes and orders the pair: the column with the larger red OD is
  // hematoxylin, ties broken by the larger green OD.
  static StainMatrix with_he_order(const Vec3& a, const Vec3& b);

  const Vec3& hematoxylin() const noexcept { return columns_[0]; }
  const Vec3& eosin() const noexcept { return columns_[1]; }
  const Vec3& column(std::size_t k) const noexcept { return columns_[k]; }

  // Row-major 3x2 view (r0c0, r0c1, r1c0, ...), the layout the kernels consume.
  std::array<double, 6> row_major() const noexcept;

  friend bool operator==(const StainMatrix&, const StainMatrix&) = default;

 private:
  StainMatrix(const Vec3& h, const Vec3& e) : columns_{h, e} {}
  std::array<Vec3, 2> columns_;
};

// Two rows (hematoxylin, eosin) of per-pixel concentrations. Least-squares
// values may be slightly negative; they are only clamped at reconstruction.
struct ConcentrationMatrix {
  std::vector<double> hematoxylin;
  std::vector<double> eosin;

  std::size_t pixel_count() const noexcept { return hematoxylin.size(); }
};

// Builds the 256-entry table od(v) = -log10(max(v, 1) / i0).
std::array<double, 256> od_lookup_table(double i0);

OdPixels rgb_to_od(const RgbImage& image, double i0 = kDefaultI0);

// I = round(i0 * 10^-od) clamped to [0, 255]. od.size() must equal width * height.
RgbImage od_to_rgb(const OdPixels& od, std::size_t width, std::size_t height, double i0 = kDefaultI0);

// Moore-Penrose pseudo-inverse of v, row-major 2x3, via the closed-form inverse
// of the 2x2 Gram matrix. Throws SingularStainMatrix when the columns are within
// 1e-6 rad of each other.
std::array<double, 6> pseudo_inverse(const StainMatrix& v);

ConcentrationMatrix deconvolve(const OdPixels& od, const StainMatrix& v);

// od = v_ref * max(scale .* s, 0) per pixel.
OdPixels reconstruct_od(const ConcentrationMatrix& s, const StainMatrix& v_ref,
                        std::array<double, 2> scale = {1.0, 1.0});

RgbImage reconstruct(const ConcentrationMatrix& s, const StainMatrix& v_ref, std::size_t width,
                     std::size_t height, double i0 = kDefaultI0);

}  // namespace stainnorm
