#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stainnorm {

// Interleaved 8-bit RGB, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height);
  RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return pixel_count() == 0; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t* pixel(std::size_t x, std::size_t y) noexcept { return &data_[3 * (y * width_ + x)]; }
  const std::uint8_t* pixel(std::size_t x, std::size_t y) const noexcept {
    return &data_[3 * (y * width_ + x)];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace stainnorm
