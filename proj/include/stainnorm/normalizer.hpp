#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stainnorm/error.hpp"
#include "stainnorm/multi_target.hpp"

namespace stainnorm {

struct NormalizationResult {
  RgbImage image;
  StainMatrix source_stain_matrix;
  MaxConcentrations source_max_c;
  std::optional<std::size_t> chosen_reference_index;  // stochastic profiles only
};

// Normalized OD of the whole source before 8-bit quantization, along with the
// source estimates it was derived from.
struct NormalizedOd {
  OdPixels od;
  StainMatrix source_stain_matrix;
  MaxConcentrations source_max_c;
};

NormalizedOd normalize_od(const RgbImage& source, const ReferenceProfile& profile,
                          const EstimatorParams& params = {});

NormalizationResult normalize(const RgbImage& source, const ReferenceProfile& profile,
                              const EstimatorParams& params = {});

// Uses and advances the profile's draw sequence.
NormalizationResult normalize(const RgbImage& source, StochasticProfile& profile,
                              const EstimatorParams& params = {});

// Normalizes against the reference picked by draw k, without touching the
// profile's sequence position.
NormalizationResult normalize_with_draw(const RgbImage& source, const StochasticProfile& profile,
                                        std::uint64_t k, const EstimatorParams& params = {});

struct IndexedError {
  std::size_t index;
  ErrorCode code;
  std::string message;
};

struct BatchReport {
  std::vector<std::optional<NormalizationResult>> results;  // one slot per source
  std::vector<IndexedError> errors;                         // ascending index

  std::size_t succeeded() const noexcept { return results.size() - errors.size(); }
};

// Per-image failures are recorded and do not stop the batch. jobs = 0 uses all
// hardware threads; output is identical for any job count.
BatchReport normalize_batch(std::span<const RgbImage> sources, const ReferenceProfile& profile,
                            const EstimatorParams& params = {}, unsigned jobs = 0);

// Job k uses draw k of the profile's sequence.
BatchReport normalize_batch(std::span<const RgbImage> sources, const StochasticProfile& profile,
                            const EstimatorParams& params = {}, unsigned jobs = 0);

}  // namespace stainnorm
