#include "vibrom/frfarc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vibrom {

AxisScaling family_scaling(const std::vector<const FrfCurve*>& family) {
  AxisScaling s;
  s.omega_lo = s.amp_lo = std::numeric_limits<double>::infinity();
  s.omega_hi = s.amp_hi = -std::numeric_limits<double>::infinity();
  for (const FrfCurve* c : family)
    for (const FrfPoint& p : c->points) {
      s.omega_lo = std::min(s.omega_lo, p.omega);
      s.omega_hi = std::max(s.omega_hi, p.omega);
      s.amp_lo = std::min(s.amp_lo, p.amplitude);
      s.amp_hi = std::max(s.amp_hi, p.amplitude);
    }
  if (s.omega_hi <= s.omega_lo) s.omega_hi = s.omega_lo + 1.0;
  if (s.amp_hi <= s.amp_lo) s.amp_hi = s.amp_lo + 1.0;
  return s;
}

std::vector<double> chord_arclength(const FrfCurve& curve, const AxisScaling& sc) {
  const auto& pts = curve.points;
  if (pts.size() < 2) throw std::invalid_argument("chord_arclength: need at least 2 points");
  std::vector<double> s(pts.size(), 0.0);
  double dw = sc.omega_hi - sc.omega_lo;
  double da = sc.amp_hi - sc.amp_lo;
  for (size_t i = 1; i < pts.size(); ++i) {
    double x = (pts[i].omega - pts[i - 1].omega) / dw;
    double y = (pts[i].amplitude - pts[i - 1].amplitude) / da;
    double d = std::hypot(x, y);
    if (d <= 0.0) throw std::invalid_argument("chord_arclength: degenerate curve segment");
    s[i] = s[i - 1] + d;
  }
  return s;
}

namespace {

struct Extremum {
  int index;
  double prominence;
};

// Topographic prominence of the amplitude sequence at a local max or min.
double prominence_at(const std::vector<double>& a, int i, bool is_max) {
  double sign = is_max ? 1.0 : -1.0;
  double peak = sign * a[i];
  double drop_left = 0.0, drop_right = 0.0;
  double low = peak;
  for (int j = i - 1; j >= 0; --j) {
    double v = sign * a[j];
    low = std::min(low, v);
    if (v > peak) break;
  }
  drop_left = peak - low;
  low = peak;
  for (int j = i + 1; j < static_cast<int>(a.size()); ++j) {
    double v = sign * a[j];
    low = std::min(low, v);
    if (v > peak) break;
  }
  drop_right = peak - low;
  return std::min(drop_left, drop_right);
}

}  // namespace

std::vector<Landmark> find_landmarks(const FrfCurve& curve, int n_regions,
                                     const std::vector<int>& overrides) {
  const int last = static_cast<int>(curve.points.size()) - 1;
  if (last < 1) throw std::invalid_argument("find_landmarks: curve too short");

  std::vector<int> interior;
  if (!overrides.empty()) {
    interior = overrides;
    std::sort(interior.begin(), interior.end());
  } else {
    std::vector<double> a(curve.points.size());
    for (size_t i = 0; i < curve.points.size(); ++i) a[i] = curve.points[i].amplitude;
    double range = *std::max_element(a.begin(), a.end()) -
                   *std::min_element(a.begin(), a.end());
    double threshold = 0.01 * range;

    std::vector<Extremum> candidates;
    for (int i = 1; i < last; ++i) {
      bool is_max = a[i] >= a[i - 1] && a[i] >= a[i + 1] && (a[i] > a[i - 1] || a[i] > a[i + 1]);
      bool is_min = a[i] <= a[i - 1] && a[i] <= a[i + 1] && (a[i] < a[i - 1] || a[i] < a[i + 1]);
      if (!is_max && !is_min) continue;
      double p = prominence_at(a, i, is_max);
      if (p >= threshold) candidates.push_back({i, p});
    }
    if (static_cast<int>(candidates.size()) < n_regions - 1)
      throw std::invalid_argument("find_landmarks: only " +
                                  std::to_string(candidates.size()) +
                                  " prominent extrema for " + std::to_string(n_regions) +
                                  " regions");
    std::sort(candidates.begin(), candidates.end(),
              [](const Extremum& x, const Extremum& y) { return x.prominence > y.prominence; });
    for (int k = 0; k < n_regions - 1; ++k) interior.push_back(candidates[k].index);
    std::sort(interior.begin(), interior.end());
  }

  std::vector<Landmark> lm;
  lm.push_back({0, 0});
  int id = 1;
  for (int idx : interior) lm.push_back({idx, id++});
  lm.push_back({last, id});
  return lm;
}

ArcParametrizedFrf piecewise_normalize(const FrfCurve& curve,
                                       const std::vector<Landmark>& landmarks,
                                       const AxisScaling& scaling) {
  std::vector<double> raw = chord_arclength(curve, scaling);
  ArcParametrizedFrf out;
  out.source = &curve;
  out.landmarks = landmarks;
  out.n_regions = static_cast<int>(landmarks.size()) - 1;
  out.s_values.resize(raw.size());
  for (int region = 0; region < out.n_regions; ++region) {
    int i0 = landmarks[region].point_index;
    int i1 = landmarks[region + 1].point_index;
    double span = raw[i1] - raw[i0];
    for (int i = i0; i <= i1; ++i)
      out.s_values[i] = region + (raw[i] - raw[i0]) / span;
  }
  // exact integers at the landmarks
  for (const Landmark& lm : landmarks) out.s_values[lm.point_index] = lm.id;
  return out;
}

std::pair<double, double> frf_lookup(const ArcParametrizedFrf& pfrf, double s) {
  const auto& sv = pfrf.s_values;
  if (s < sv.front() || s > sv.back())
    throw std::out_of_range("frf_lookup: s out of [0, n_regions]");
  auto it = std::lower_bound(sv.begin(), sv.end(), s);
  size_t hi = std::min<size_t>(it - sv.begin(), sv.size() - 1);
  if (hi == 0) hi = 1;
  size_t lo = hi - 1;
  double t = (s - sv[lo]) / (sv[hi] - sv[lo]);
  const FrfPoint& p0 = pfrf.source->points[lo];
  const FrfPoint& p1 = pfrf.source->points[hi];
  return {p0.omega + t * (p1.omega - p0.omega),
          p0.amplitude + t * (p1.amplitude - p0.amplitude)};
}

}  // namespace vibrom
