#include "stainnorm/stain_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stainnorm/error.hpp"
#include "stainnorm/kernels.hpp"

namespace stainnorm {
namespace {

void require_i0(double i0) {
  if (!(i0 > 0.0) || !std::isfinite(i0)) {
    throw StainError(ErrorCode::InvalidParams, "i0 must be positive and finite");
  }
}

}  // namespace

RgbImage::RgbImage(std::size_t width, std::size_t height)
    : width_(width), height_(height), data_(width * height * 3, 0) {}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_ * 3) {
    throw StainError(ErrorCode::DimensionMismatch,
                     "RGB buffer of " + std::to_string(data_.size()) + " bytes for " +
                         std::to_string(width_) + "x" + std::to_string(height_) + " image");
  }
}

OdPixels::OdPixels(std::size_t count) {
  for (auto& c : channels_) c.assign(count, 0.0);
}

OdPixels OdPixels::from_pixels(std::span<const Vec3> pixels) {
  OdPixels out(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) out.set(i, pixels[i]);
  return out;
}

void OdPixels::set(std::size_t i, const Vec3& od) noexcept {
  for (std::size_t c = 0; c < 3; ++c) channels_[c][i] = od[c];
}

void OdPixels::push_back(const Vec3& od) {
  for (std::size_t c = 0; c < 3; ++c) channels_[c].push_back(od[c]);
}

void OdPixels::reserve(std::size_t n) {
  for (auto& c : channels_) c.reserve(n);
}

void OdPixels::append(const OdPixels& other) {
  for (std::size_t c = 0; c < 3; ++c) {
    channels_[c].insert(channels_[c].end(), other.channels_[c].begin(), other.channels_[c].end());
  }
}

StainMatrix StainMatrix::from_columns(const Vec3& hematoxylin, const Vec3& eosin) {
  std::array<Vec3, 2> cols{hematoxylin, eosin};
  for (auto& col : cols) {
    const double n = norm(col);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw StainError(ErrorCode::InvalidStainMatrix, "stain vector has zero or non-finite length");
    }
    // Columns already unit length up to rounding are kept verbatim, so
    // normalization is idempotent.
    if (std::abs(n - 1.0) > 4e-16) col = (1.0 / n) * col;
    for (double x : col) {
      if (x < -1e-9) {
        throw StainError(ErrorCode::InvalidStainMatrix,
                         "stain vector leaves the non-negative OD orthant");
      }
    }
  }
  return StainMatrix(cols[0], cols[1]);
}

StainMatrix StainMatrix::with_he_order(const Vec3& a, const Vec3& b) {
  const Vec3 na = normalized(a);
  const Vec3 nb = normalized(b);
  const bool a_first = na[0] > nb[0] || (na[0] == nb[0] && na[1] >= nb[1]);
  return a_first ? from_columns(na, nb) : from_columns(nb, na);
}

std::array<double, 6> StainMatrix::row_major() const noexcept {
  const Vec3& h = columns_[0];
  const Vec3& e = columns_[1];
  return {h[0], e[0], h[1], e[1], h[2], e[2]};
}

std::array<double, 256> od_lookup_table(double i0) {
  require_i0(i0);
  std::array<double, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[v] = -std::log10(static_cast<double>(std::max(v, 1)) / i0);
  }
  return lut;
}

OdPixels rgb_to_od(const RgbImage& image, double i0) {
  if (image.empty()) throw StainError(ErrorCode::EmptyImage, "image has no pixels");
  const auto lut = od_lookup_table(i0);
  OdPixels od(image.pixel_count());
  kernels::active().od_from_rgb(image.data().data(), image.pixel_count(), lut.data(),
                                od.channel(0).data(), od.channel(1).data(), od.channel(2).data());
  return od;
}

RgbImage od_to_rgb(const OdPixels& od, std::size_t width, std::size_t height, double i0) {
  require_i0(i0);
  if (od.size() != width * height) {
    throw StainError(ErrorCode::DimensionMismatch, "OD pixel count does not match image size");
  }
  RgbImage image(width, height);
  auto data = image.data();
  for (std::size_t c = 0; c < 3; ++c) {
    const auto plane = od.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      const double value = std::round(i0 * std::pow(10.0, -plane[i]));
      // NaN falls through both comparisons and maps to 0.
      data[3 * i + c] = value >= 255.0 ? 255 : value > 0.0 ? static_cast<std::uint8_t>(value) : 0;
    }
  }
  return image;
}

std::array<double, 6> pseudo_inverse(const StainMatrix& v) {
  const Vec3& a = v.hematoxylin();
  const Vec3& b = v.eosin();
  const double angle = std::atan2(norm(cross(a, b)), dot(a, b));
  if (!(angle > 1e-6)) {
    throw StainError(ErrorCode::SingularStainMatrix, "stain vectors are collinear");
  }
  // (V^T V)^-1 V^T with V^T V = [[aa, ab], [ab, bb]].
  const double aa = dot(a, a);
  const double ab = dot(a, b);
  const double bb = dot(b, b);
  const double det = aa * bb - ab * ab;
  const double i00 = bb / det;
  const double i01 = -ab / det;
  const double i11 = aa / det;
  return {i00 * a[0] + i01 * b[0], i00 * a[1] + i01 * b[1], i00 * a[2] + i01 * b[2],
          i01 * a[0] + i11 * b[0], i01 * a[1] + i11 * b[1], i01 * a[2] + i11 * b[2]};
}

ConcentrationMatrix deconvolve(const OdPixels& od, const StainMatrix& v) {
  const auto pinv = pseudo_inverse(v);
  ConcentrationMatrix s;
  s.hematoxylin.resize(od.size());
  s.eosin.resize(od.size());
  kernels::active().deconvolve(od.channel(0).data(), od.channel(1).data(), od.channel(2).data(),
                               od.size(), pinv.data(), s.hematoxylin.data(), s.eosin.data());
  return s;
}

OdPixels reconstruct_od(const ConcentrationMatrix& s, const StainMatrix& v_ref,
                        std::array<double, 2> scale) {
  if (s.hematoxylin.size() != s.eosin.size()) {
    throw StainError(ErrorCode::DimensionMismatch, "concentration rows differ in length");
  }
  const auto v = v_ref.row_major();
  OdPixels od(s.pixel_count());
  kernels::active().reconstruct_od(s.hematoxylin.data(), s.eosin.data(), s.pixel_count(), scale[0],
                                   scale[1], v.data(), od.channel(0).data(), od.channel(1).data(),
                                   od.channel(2).data());
  return od;
}

RgbImage reconstruct(const ConcentrationMatrix& s, const StainMatrix& v_ref, std::size_t width,
                     std::size_t height, double i0) {
  if (s.pixel_count() != width * height) {
    throw StainError(ErrorCode::DimensionMismatch, "concentration count does not match image size");
  }
  return od_to_rgb(reconstruct_od(s, v_ref), width, height, i0);
}

}  // namespace stainnorm
