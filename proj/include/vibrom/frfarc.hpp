#pragma once

#include <utility>
#include <vector>

#include "vibrom/continuation.hpp"

namespace vibrom {

// Piecewise-normalized arc-length abscissa on FRFs: chord-length
// parametrization, landmark (peak/valley) detection, per-region rescaling
// to the integer grid 0..n_regions, and inverse interpolation.

struct Landmark {
  int point_index = 0;
  int id = 0;  // 0..n_regions along the curve
};

struct ArcParametrizedFrf {
  const FrfCurve* source = nullptr;
  std::vector<double> s_values;  // strictly increasing, in [0, n_regions]
  std::vector<Landmark> landmarks;
  int n_regions = 0;
};

// min-max normalization ranges shared by a whole curve family
struct AxisScaling {
  double omega_lo = 0.0, omega_hi = 1.0;
  double amp_lo = 0.0, amp_hi = 1.0;
};

AxisScaling family_scaling(const std::vector<const FrfCurve*>& family);

// Cumulative chord length in the normalized (omega, amplitude) plane.
std::vector<double> chord_arclength(const FrfCurve& curve, const AxisScaling& scaling);

// Interior landmarks are the n_regions-1 most prominent amplitude extrema,
// ordered along the curve; endpoints are landmarks 0 and n_regions.
// `overrides`, when non-empty, supplies the interior point indices directly.
std::vector<Landmark> find_landmarks(const FrfCurve& curve, int n_regions,
                                     const std::vector<int>& overrides = {});

ArcParametrizedFrf piecewise_normalize(const FrfCurve& curve,
                                       const std::vector<Landmark>& landmarks,
                                       const AxisScaling& scaling);

// Piecewise-linear inverse interpolation, exact at stored points.
std::pair<double, double> frf_lookup(const ArcParametrizedFrf& pfrf, double s);

}  // namespace vibrom
