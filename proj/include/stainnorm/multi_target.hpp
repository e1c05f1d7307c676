#pragma once

// Fitting a normalization target from a set of reference images.
//
//   Stochastic  every normalization draws one reference's own profile
//   Concat      tissue pixels of all references pooled, then estimated once
//   AvgPre      per-reference plane bases averaged, extremes from pooled pixels
//   AvgPost     per-reference stain matrices averaged column by column

#include <atomic>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "stainnorm/macenko.hpp"

namespace stainnorm {

struct StrategyMacenko {};
struct StrategyStochastic {
  std::uint64_t seed = 0;
};
struct StrategyConcat {};
struct StrategyAvgPre {};
struct StrategyAvgPost {};

using StrategyKind =
    std::variant<StrategyMacenko, StrategyStochastic, StrategyConcat, StrategyAvgPre, StrategyAvgPost>;

// "macenko", "stochastic", "concat", "avg-pre", "avg-post"
std::string_view strategy_tag(const StrategyKind& kind) noexcept;

struct ReferenceProfile {
  StainMatrix stain_matrix;
  MaxConcentrations max_c;
  StrategyKind strategy;
  std::size_t source_count = 1;
};

// Per-reference profiles plus a seeded, counter-based draw sequence. Draw k is a
// pure function of (seed, k), so batch job k can use draw k on any worker.
class StochasticProfile {
 public:
  StochasticProfile(std::vector<ReferenceProfile> candidates, std::uint64_t seed);
  StochasticProfile(const StochasticProfile& other);
  StochasticProfile& operator=(const StochasticProfile& other);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t source_count() const noexcept { return candidates_.size(); }
  const std::vector<ReferenceProfile>& candidates() const noexcept { return candidates_; }
  const ReferenceProfile& candidate(std::size_t i) const { return candidates_.at(i); }

  // Index of the reference chosen by the k-th draw.
  std::size_t draw(std::uint64_t k) const noexcept;

  // Consumes the next position of the sequence; safe to call concurrently.
  std::size_t next_draw() noexcept;

  std::uint64_t draws_taken() const noexcept { return next_.load(std::memory_order_relaxed); }

 private:
  std::vector<ReferenceProfile> candidates_;
  std::uint64_t seed_;
  std::atomic<std::uint64_t> next_{0};
};

class ReferenceSet {
 public:
  // Throws EmptyReferenceSet for an empty list.
  explicit ReferenceSet(std::vector<RgbImage> images);

  std::size_t size() const noexcept { return images_.size(); }
  const std::vector<RgbImage>& images() const noexcept { return images_; }
  const RgbImage& operator[](std::size_t i) const { return images_.at(i); }

 private:
  std::vector<RgbImage> images_;
};

// Single-reference baseline.
ReferenceProfile fit_macenko(const RgbImage& reference, const EstimatorParams& params = {});

StochasticProfile fit_stochastic(const ReferenceSet& refs, const EstimatorParams& params,
                                 std::uint64_t seed);
ReferenceProfile fit_concat(const ReferenceSet& refs, const EstimatorParams& params = {});
ReferenceProfile fit_avg_pre(const ReferenceSet& refs, const EstimatorParams& params = {});
ReferenceProfile fit_avg_post(const ReferenceSet& refs, const EstimatorParams& params = {});

// Column-wise mean of H/E-ordered matrices, each averaged column renormalized.
StainMatrix average_stain_matrices(std::span<const StainMatrix> matrices);

// Mean of sign-fixed bases, re-orthonormalized by Gram-Schmidt with e1 kept as
// the anchor. Throws DegenerateBasis when the averaged vectors are collinear.
PlaneBasis average_plane_bases(std::span<const PlaneBasis> bases);

}  // namespace stainnorm
