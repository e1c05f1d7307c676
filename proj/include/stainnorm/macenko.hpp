#pragma once

// Single-image stain matrix estimation: threshold the OD cloud, find its
// dominant plane, and take robust angular extremes inside that plane.

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "stainnorm/stain_math.hpp"

namespace stainnorm {

struct EstimatorParams {
  double beta = 0.15;               // OD threshold for tissue pixels
  double alpha = 1.0;               // angle percentile, in percent
  std::size_t min_tissue_pixels = 100;
  double i0 = kDefaultI0;

  // Throws InvalidParams unless 0 < beta, 0 < alpha < 50, min_tissue_pixels >= 3, i0 > 0.
  void validate() const;
};

inline constexpr double kMaxConcentrationPercentile = 99.0;

// Orthonormal basis of the dominant OD plane. Each vector is sign-fixed so its
// component sum is non-negative.
struct PlaneBasis {
  Vec3 e1;
  Vec3 e2;
};

using MaxConcentrations = std::array<double, 2>;

// Pixels whose three OD components all exceed beta, in input order.
OdPixels filter_od(const OdPixels& od, double beta);

// Upper triangle of sum(od od^T).
Sym3 scatter_matrix(const OdPixels& od);

PlaneBasis plane_basis(const OdPixels& od);

// Plane basis from a precomputed scatter matrix; throws DegenerateCloud when the
// second eigenvalue is below 1e-12 of the first.
PlaneBasis plane_basis_from_scatter(const Sym3& scatter);

// Flips v when its component sum is negative.
Vec3 sign_fixed(const Vec3& v);

// atan2 of each pixel's in-plane coordinates; pixels whose projection norm is
// below 1e-12 are skipped.
std::vector<double> project_angles(const OdPixels& od, const PlaneBasis& basis);

// Percentile (0..100) as the inverted empirical CDF: the smallest x with
// F(x) >= p / 100. Replicating every sample k times leaves it unchanged.
// `sorted` must be ascending and non-empty.
double percentile_sorted(std::span<const double> sorted, double p);

// (alpha-th, (100 - alpha)-th) percentiles of angles. Throws EmptyAngles.
std::pair<double, double> robust_extremes(std::span<const double> angles, double alpha);

// Stain matrix from already-filtered tissue OD and a plane basis.
StainMatrix stain_matrix_in_plane(const OdPixels& tissue, const PlaneBasis& basis, double alpha);

// Full estimation on a tissue OD set: plane, angles, extremes, H/E ordering.
StainMatrix estimate_from_tissue(const OdPixels& tissue, const EstimatorParams& params);

StainMatrix estimate_stain_matrix(const RgbImage& image, const EstimatorParams& params = {});

// 99th percentile of each concentration row of the deconvolved tissue pixels.
// Throws NonPositiveConcentration if either is not positive.
MaxConcentrations max_concentrations_of_tissue(const OdPixels& tissue, const StainMatrix& v);

MaxConcentrations max_concentrations(const RgbImage& image, const StainMatrix& v,
                                     const EstimatorParams& params = {});

// Beta-filtered OD of an image; throws InsufficientTissue below min_tissue_pixels.
OdPixels tissue_od(const RgbImage& image, const EstimatorParams& params);

}  // namespace stainnorm
