#include "stainnorm/normalizer.hpp"

#include "stainnorm/parallel.hpp"

namespace stainnorm {

NormalizedOd normalize_od(const RgbImage& source, const ReferenceProfile& profile,
                          const EstimatorParams& params) {
  const OdPixels tissue = tissue_od(source, params);
  const StainMatrix v_src = estimate_from_tissue(tissue, params);
  const MaxConcentrations max_src = max_concentrations_of_tissue(tissue, v_src);

  // The whole image is deconvolved; the threshold only feeds estimation.
  const ConcentrationMatrix s = deconvolve(rgb_to_od(source, params.i0), v_src);
  const std::array<double, 2> scale{profile.max_c[0] / max_src[0], profile.max_c[1] / max_src[1]};
  return {reconstruct_od(s, profile.stain_matrix, scale), v_src, max_src};
}

NormalizationResult normalize(const RgbImage& source, const ReferenceProfile& profile,
                              const EstimatorParams& params) {
  NormalizedOd n = normalize_od(source, profile, params);
  return {od_to_rgb(n.od, source.width(), source.height(), params.i0), n.source_stain_matrix,
          n.source_max_c, std::nullopt};
}

NormalizationResult normalize_with_draw(const RgbImage& source, const StochasticProfile& profile,
                                        std::uint64_t k, const EstimatorParams& params) {
  const std::size_t chosen = profile.draw(k);
  NormalizationResult r = normalize(source, profile.candidate(chosen), params);
  r.chosen_reference_index = chosen;
  return r;
}

NormalizationResult normalize(const RgbImage& source, StochasticProfile& profile,
                              const EstimatorParams& params) {
  const std::size_t chosen = profile.next_draw();
  NormalizationResult r = normalize(source, profile.candidate(chosen), params);
  r.chosen_reference_index = chosen;
  return r;
}

namespace {

template <typename Job>
BatchReport run_batch(std::size_t count, unsigned jobs, Job job) {
  BatchReport report;
  report.results.resize(count);
  std::vector<std::optional<IndexedError>> failures(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    try {
      report.results[i].emplace(job(i));
    } catch (const StainError& e) {
      failures[i] = IndexedError{i, e.code(), e.what()};
    }
  });
  for (auto& f : failures) {
    if (f) report.errors.push_back(std::move(*f));
  }
  return report;
}

}  // namespace

BatchReport normalize_batch(std::span<const RgbImage> sources, const ReferenceProfile& profile,
                            const EstimatorParams& params, unsigned jobs) {
  return run_batch(sources.size(), jobs,
                   [&](std::size_t i) { return normalize(sources[i], profile, params); });
}

BatchReport normalize_batch(std::span<const RgbImage> sources, const StochasticProfile& profile,
                            const EstimatorParams& params, unsigned jobs) {
  return run_batch(sources.size(), jobs, [&](std::size_t i) {
    return normalize_with_draw(sources[i], profile, i, params);
  });
}

}  // namespace stainnorm
