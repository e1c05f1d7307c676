#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "stainnorm/multi_target.hpp"

namespace stainnorm {

// PNG or JPEG (detected by signature), 8-bit, gray/RGB/RGBA. Alpha is dropped
// and gray is expanded to RGB. Throws FileNotFound, UnsupportedFormat, DecodeError.
RgbImage load_image(const std::filesystem::path& path);

// Lossless 8-bit RGB PNG. Throws IoError.
void save_image(const RgbImage& image, const std::filesystem::path& path);

inline constexpr int kProfileFormatVersion = 1;

using FittedProfile = std::variant<ReferenceProfile, StochasticProfile>;

// On-disk form of a fitted profile. Stochastic profiles also carry every
// candidate reference; stain_matrix/max_c then hold candidate 0.
struct ProfileDocument {
  FittedProfile profile;
  EstimatorParams params;
  std::string created_at;  // ISO-8601 UTC
};

std::string serialize_profile(const ProfileDocument& doc);

// Throws SchemaVersionMismatch for a missing or unknown format_version and
// InvalidProfile for other schema violations.
ProfileDocument parse_profile(const std::string& text);

void save_profile(const ProfileDocument& doc, const std::filesystem::path& path);
ProfileDocument load_profile(const std::filesystem::path& path);

std::string utc_timestamp_now();

}  // namespace stainnorm
