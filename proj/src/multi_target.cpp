#include "stainnorm/multi_target.hpp"

#include <optional>

#include "stainnorm/error.hpp"
#include "stainnorm/parallel.hpp"

namespace stainnorm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Runs fn on every reference image in parallel and returns the results in index
// order. Failures are rethrown tagged with the lowest failing index.
template <typename T, typename Fn>
std::vector<T> per_reference(const ReferenceSet& refs, Fn fn) {
  std::vector<std::optional<T>> slots(refs.size());
  std::vector<std::optional<StainError>> errors(refs.size());
  parallel_for(refs.size(), 0, [&](std::size_t i) {
    try {
      slots[i].emplace(fn(refs[i]));
    } catch (const StainError& e) {
      errors[i].emplace(e.with_index(i));
    }
  });
  std::vector<T> out;
  out.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (errors[i]) throw *errors[i];
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

OdPixels filtered_od(const RgbImage& image, const EstimatorParams& params) {
  return filter_od(rgb_to_od(image, params.i0), params.beta);
}

OdPixels pooled_tissue(const std::vector<OdPixels>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  OdPixels pooled;
  pooled.reserve(total);
  for (const auto& p : parts) pooled.append(p);
  return pooled;
}

void require_tissue(const OdPixels& tissue, const EstimatorParams& params) {
  if (tissue.size() < params.min_tissue_pixels) {
    throw StainError(ErrorCode::InsufficientTissue,
                     "pooled reference set has " + std::to_string(tissue.size()) +
                         " tissue pixels, need " + std::to_string(params.min_tissue_pixels));
  }
}

}  // namespace

std::string_view strategy_tag(const StrategyKind& kind) noexcept {
  struct Visitor {
    std::string_view operator()(const StrategyMacenko&) const { return "macenko"; }
    std::string_view operator()(const StrategyStochastic&) const { return "stochastic"; }
    std::string_view operator()(const StrategyConcat&) const { return "concat"; }
    std::string_view operator()(const StrategyAvgPre&) const { return "avg-pre"; }
    std::string_view operator()(const StrategyAvgPost&) const { return "avg-post"; }
  };
  return std::visit(Visitor{}, kind);
}

StochasticProfile::StochasticProfile(std::vector<ReferenceProfile> candidates, std::uint64_t seed)
    : candidates_(std::move(candidates)), seed_(seed) {
  if (candidates_.empty()) {
    throw StainError(ErrorCode::EmptyReferenceSet, "stochastic profile needs at least one reference");
  }
}

StochasticProfile::StochasticProfile(const StochasticProfile& other)
    : candidates_(other.candidates_), seed_(other.seed_), next_(other.draws_taken()) {}

StochasticProfile& StochasticProfile::operator=(const StochasticProfile& other) {
  candidates_ = other.candidates_;
  seed_ = other.seed_;
  next_.store(other.draws_taken(), std::memory_order_relaxed);
  return *this;
}

std::size_t StochasticProfile::draw(std::uint64_t k) const noexcept {
  const std::uint64_t h = splitmix64(seed_ ^ splitmix64(k));
  return static_cast<std::size_t>((static_cast<unsigned __int128>(h) * candidates_.size()) >> 64);
}

std::size_t StochasticProfile::next_draw() noexcept {
  return draw(next_.fetch_add(1, std::memory_order_relaxed));
}

ReferenceSet::ReferenceSet(std::vector<RgbImage> images) : images_(std::move(images)) {
  if (images_.empty()) throw StainError(ErrorCode::EmptyReferenceSet, "no reference images");
}

ReferenceProfile fit_macenko(const RgbImage& reference, const EstimatorParams& params) {
  const OdPixels tissue = tissue_od(reference, params);
  const StainMatrix v = estimate_from_tissue(tissue, params);
  return {v, max_concentrations_of_tissue(tissue, v), StrategyMacenko{}, 1};
}

StochasticProfile fit_stochastic(const ReferenceSet& refs, const EstimatorParams& params,
                                 std::uint64_t seed) {
  params.validate();
  auto candidates = per_reference<ReferenceProfile>(refs, [&](const RgbImage& image) {
    ReferenceProfile p = fit_macenko(image, params);
    p.strategy = StrategyStochastic{seed};
    return p;
  });
  return StochasticProfile(std::move(candidates), seed);
}

ReferenceProfile fit_concat(const ReferenceSet& refs, const EstimatorParams& params) {
  params.validate();
  const auto parts =
      per_reference<OdPixels>(refs, [&](const RgbImage& image) { return filtered_od(image, params); });
  const OdPixels pooled = pooled_tissue(parts);
  require_tissue(pooled, params);
  const StainMatrix v = estimate_from_tissue(pooled, params);
  return {v, max_concentrations_of_tissue(pooled, v), StrategyConcat{}, refs.size()};
}

PlaneBasis average_plane_bases(std::span<const PlaneBasis> bases) {
  if (bases.empty()) throw StainError(ErrorCode::DegenerateBasis, "no bases to average");
  Vec3 e1{}, e2{};
  for (const auto& b : bases) {
    e1 = e1 + sign_fixed(b.e1);
    e2 = e2 + sign_fixed(b.e2);
  }
  const double inv = 1.0 / static_cast<double>(bases.size());
  e1 = inv * e1;
  e2 = inv * e2;

  const double n1 = norm(e1);
  if (!(n1 > 1e-9)) throw StainError(ErrorCode::DegenerateBasis, "averaged first direction vanishes");
  e1 = (1.0 / n1) * e1;
  const Vec3 ortho = e2 - dot(e1, e2) * e1;
  const double n2 = norm(ortho);
  if (!(n2 > 1e-9)) throw StainError(ErrorCode::DegenerateBasis, "averaged directions are collinear");
  return {sign_fixed(e1), sign_fixed((1.0 / n2) * ortho)};
}

ReferenceProfile fit_avg_pre(const ReferenceSet& refs, const EstimatorParams& params) {
  params.validate();
  struct Part {
    OdPixels tissue;
    PlaneBasis basis;
  };
  const auto parts = per_reference<Part>(refs, [&](const RgbImage& image) {
    OdPixels tissue = tissue_od(image, params);
    const PlaneBasis basis = plane_basis(tissue);
    return Part{std::move(tissue), basis};
  });

  std::vector<PlaneBasis> bases;
  std::vector<OdPixels> tissues;
  for (const auto& p : parts) {
    bases.push_back(p.basis);
    tissues.push_back(p.tissue);
  }
  const PlaneBasis mean_basis = average_plane_bases(bases);
  const OdPixels pooled = pooled_tissue(tissues);
  const StainMatrix v = stain_matrix_in_plane(pooled, mean_basis, params.alpha);
  return {v, max_concentrations_of_tissue(pooled, v), StrategyAvgPre{}, refs.size()};
}

StainMatrix average_stain_matrices(std::span<const StainMatrix> matrices) {
  if (matrices.empty()) throw StainError(ErrorCode::InvalidStainMatrix, "no matrices to average");
  Vec3 h{}, e{};
  for (const auto& m : matrices) {
    const StainMatrix ordered = StainMatrix::with_he_order(m.hematoxylin(), m.eosin());
    h = h + ordered.hematoxylin();
    e = e + ordered.eosin();
  }
  const double inv = 1.0 / static_cast<double>(matrices.size());
  return StainMatrix::from_columns(inv * h, inv * e);
}

ReferenceProfile fit_avg_post(const ReferenceSet& refs, const EstimatorParams& params) {
  params.validate();
  const auto fits = per_reference<ReferenceProfile>(
      refs, [&](const RgbImage& image) { return fit_macenko(image, params); });
  std::vector<StainMatrix> matrices;
  MaxConcentrations max_c{0.0, 0.0};
  for (const auto& f : fits) {
    matrices.push_back(f.stain_matrix);
    max_c[0] += f.max_c[0];
    max_c[1] += f.max_c[1];
  }
  const double inv = 1.0 / static_cast<double>(fits.size());
  max_c = {inv * max_c[0], inv * max_c[1]};
  return {average_stain_matrices(matrices), max_c, StrategyAvgPost{}, refs.size()};
}

}  // namespace stainnorm
