#include "stainnorm/macenko.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stainnorm/error.hpp"
#include "stainnorm/kernels.hpp"

namespace stainnorm {

void EstimatorParams::validate() const {
  if (!(beta > 0.0)) throw StainError(ErrorCode::InvalidParams, "beta must be positive");
  if (!(alpha > 0.0 && alpha < 50.0)) {
    throw StainError(ErrorCode::InvalidParams, "alpha must lie in (0, 50)");
  }
  if (min_tissue_pixels < 3) {
    throw StainError(ErrorCode::InvalidParams, "min_tissue_pixels must be at least 3");
  }
  if (!(i0 > 0.0) || !std::isfinite(i0)) {
    throw StainError(ErrorCode::InvalidParams, "i0 must be positive and finite");
  }
}

OdPixels filter_od(const OdPixels& od, double beta) {
  std::vector<std::uint8_t> mask(od.size());
  kernels::active().tissue_mask(od.channel(0).data(), od.channel(1).data(), od.channel(2).data(),
                                od.size(), beta, mask.data());
  OdPixels kept;
  kept.reserve(static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)));
  for (std::size_t i = 0; i < od.size(); ++i) {
    if (mask[i]) kept.push_back(od.pixel(i));
  }
  return kept;
}

Sym3 scatter_matrix(const OdPixels& od) {
  Sym3 out{};
  kernels::active().scatter(od.channel(0).data(), od.channel(1).data(), od.channel(2).data(),
                            od.size(), out.data());
  return out;
}

Vec3 sign_fixed(const Vec3& v) { return component_sum(v) < 0.0 ? -1.0 * v : v; }

PlaneBasis plane_basis_from_scatter(const Sym3& scatter) {
  const SymmetricEigen eig = eigen_symmetric(scatter);
  if (!(eig.values[0] > 0.0) || eig.values[1] < 1e-12 * eig.values[0]) {
    throw StainError(ErrorCode::DegenerateCloud, "OD cloud does not span a plane");
  }
  return {sign_fixed(eig.vectors[0]), sign_fixed(eig.vectors[1])};
}

PlaneBasis plane_basis(const OdPixels& od) {
  if (od.size() < 3) {
    throw StainError(ErrorCode::DegenerateCloud,
                     "plane estimation needs at least 3 pixels, got " + std::to_string(od.size()));
  }
  return plane_basis_from_scatter(scatter_matrix(od));
}

std::vector<double> project_angles(const OdPixels& od, const PlaneBasis& basis) {
  std::vector<double> x(od.size());
  std::vector<double> y(od.size());
  kernels::active().project(od.channel(0).data(), od.channel(1).data(), od.channel(2).data(),
                            od.size(), basis.e1.data(), basis.e2.data(), x.data(), y.data());
  std::vector<double> angles;
  angles.reserve(od.size());
  for (std::size_t i = 0; i < od.size(); ++i) {
    if (std::hypot(x[i], y[i]) < 1e-12) continue;
    angles.push_back(std::atan2(y[i], x[i]));
  }
  return angles;
}

double percentile_sorted(std::span<const double> sorted, double p) {
  // Smallest order statistic whose empirical CDF reaches p. (p * n) / 100 is
  // exact whenever it is an integer, so no rounding can move the rank.
  const double rank = std::ceil((p * static_cast<double>(sorted.size())) / 100.0);
  const double clamped = std::clamp(rank, 1.0, static_cast<double>(sorted.size()));
  return sorted[static_cast<std::size_t>(clamped) - 1];
}

std::pair<double, double> robust_extremes(std::span<const double> angles, double alpha) {
  if (angles.empty()) throw StainError(ErrorCode::EmptyAngles, "no angles to take extremes of");
  std::vector<double> sorted(angles.begin(), angles.end());
  std::sort(sorted.begin(), sorted.end());
  return {percentile_sorted(sorted, alpha), percentile_sorted(sorted, 100.0 - alpha)};
}

namespace {

// Back to OD space. Directions that stray out of the non-negative orthant are
// clipped back onto it.
Vec3 direction_at(const PlaneBasis& basis, double phi) {
  Vec3 v = std::cos(phi) * basis.e1 + std::sin(phi) * basis.e2;
  for (double& x : v) x = std::max(x, 0.0);
  if (!(norm(v) > 0.0)) {
    throw StainError(ErrorCode::DegenerateStains, "stain direction has no non-negative component");
  }
  return normalized(v);
}

}  // namespace

StainMatrix stain_matrix_in_plane(const OdPixels& tissue, const PlaneBasis& basis, double alpha) {
  const auto angles = project_angles(tissue, basis);
  const auto [phi_min, phi_max] = robust_extremes(angles, alpha);
  if (std::abs(phi_max - phi_min) < 1e-3) {
    throw StainError(ErrorCode::DegenerateStains, "robust angle extremes coincide");
  }
  return StainMatrix::with_he_order(direction_at(basis, phi_min), direction_at(basis, phi_max));
}

StainMatrix estimate_from_tissue(const OdPixels& tissue, const EstimatorParams& params) {
  if (tissue.size() < params.min_tissue_pixels) {
    throw StainError(ErrorCode::InsufficientTissue,
                     std::to_string(tissue.size()) + " tissue pixels, need " +
                         std::to_string(params.min_tissue_pixels));
  }
  return stain_matrix_in_plane(tissue, plane_basis(tissue), params.alpha);
}

OdPixels tissue_od(const RgbImage& image, const EstimatorParams& params) {
  params.validate();
  OdPixels tissue = filter_od(rgb_to_od(image, params.i0), params.beta);
  if (tissue.size() < params.min_tissue_pixels) {
    throw StainError(ErrorCode::InsufficientTissue,
                     std::to_string(tissue.size()) + " tissue pixels, need " +
                         std::to_string(params.min_tissue_pixels));
  }
  return tissue;
}

StainMatrix estimate_stain_matrix(const RgbImage& image, const EstimatorParams& params) {
  return estimate_from_tissue(tissue_od(image, params), params);
}

MaxConcentrations max_concentrations_of_tissue(const OdPixels& tissue, const StainMatrix& v) {
  if (tissue.empty()) throw StainError(ErrorCode::InsufficientTissue, "no tissue pixels");
  ConcentrationMatrix s = deconvolve(tissue, v);
  MaxConcentrations out{};
  std::vector<double>* rows[2] = {&s.hematoxylin, &s.eosin};
  for (std::size_t k = 0; k < 2; ++k) {
    std::sort(rows[k]->begin(), rows[k]->end());
    out[k] = percentile_sorted(*rows[k], kMaxConcentrationPercentile);
    if (!(out[k] > 0.0)) {
      throw StainError(ErrorCode::NonPositiveConcentration,
                       "robust maximum concentration is not positive");
    }
  }
  return out;
}

MaxConcentrations max_concentrations(const RgbImage& image, const StainMatrix& v,
                                     const EstimatorParams& params) {
  return max_concentrations_of_tissue(tissue_od(image, params), v);
}

}  // namespace stainnorm
