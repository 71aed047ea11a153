#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "vibrom/frfarc.hpp"
#include "vibrom/hb.hpp"

using namespace vibrom;

namespace {

FrfCurve make_curve(const std::vector<double>& omega, const std::vector<double>& amp) {
  FrfCurve c;
  for (size_t i = 0; i < omega.size(); ++i) {
    FrfPoint p;
    p.omega = omega[i];
    p.amplitude = amp[i];
    c.points.push_back(p);
  }
  return c;
}

AxisScaling unit_scaling() {
  AxisScaling sc;
  sc.omega_lo = 0.0;
  sc.omega_hi = 1.0;
  sc.amp_lo = 0.0;
  sc.amp_hi = 1.0;
  return sc;
}

FrfCurve duffing_curve(double beta, double step_scale = 1.0) {
  FomSystem sys = build_benchmark("duffing1", {{"Q", 50.0}});
  FrfSettings fs;
  fs.omega_min = 0.8;
  fs.omega_max = 1.3;
  fs.step_init = 0.02 * step_scale;
  fs.step_max = fs.step_max * step_scale;
  return trace_hb_frf(fom_form(sys), beta, Eigen::VectorXd::Constant(1, 1.0), fs);
}

// s value of the physical point where the pre-peak branch crosses `omega`
double s_at_omega_prepeak(const ArcParametrizedFrf& pfrf, double omega) {
  const auto& pts = pfrf.source->points;
  int peak = pfrf.landmarks[1].point_index;
  for (int i = 0; i + 1 <= peak; ++i) {
    double w0 = pts[i].omega, w1 = pts[i + 1].omega;
    if ((w0 - omega) * (w1 - omega) <= 0.0 && w0 != w1) {
      double t = (omega - w0) / (w1 - w0);
      return (1 - t) * pfrf.s_values[i] + t * pfrf.s_values[i + 1];
    }
  }
  return -1.0;
}

}  // namespace

TEST_CASE("chord length of two points is the normalized segment length") {
  FrfCurve c = make_curve({0.0, 3.0}, {0.0, 4.0});
  std::vector<double> s = chord_arclength(c, unit_scaling());
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(5.0).epsilon(1e-14));

  AxisScaling sc;
  sc.omega_lo = 0.0;
  sc.omega_hi = 3.0;  // omega axis collapses to unit span
  sc.amp_lo = 0.0;
  sc.amp_hi = 2.0;
  CHECK(chord_arclength(c, sc)[1] == doctest::Approx(std::hypot(1.0, 2.0)).epsilon(1e-14));
}

TEST_CASE("a straight 11-point line gets 10 equal increments") {
  std::vector<double> w, a;
  for (int i = 0; i <= 10; ++i) {
    w.push_back(0.1 * i);
    a.push_back(0.2 * i + 1.0);
  }
  std::vector<double> s = chord_arclength(make_curve(w, a), unit_scaling());
  double inc = s[1] - s[0];
  for (size_t i = 1; i < s.size(); ++i)
    CHECK(s[i] - s[i - 1] == doctest::Approx(inc).epsilon(1e-12));
}

TEST_CASE("degenerate curves are rejected") {
  CHECK_THROWS_AS(chord_arclength(make_curve({1.0}, {1.0}), unit_scaling()),
                  std::invalid_argument);
  CHECK_THROWS_AS(chord_arclength(make_curve({1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}),
                                  unit_scaling()),
                  std::invalid_argument);
}

TEST_CASE("single-peak FRF with two regions lands its landmark on the maximum") {
  FrfCurve c = duffing_curve(0.01);
  auto lm = find_landmarks(c, 2);
  REQUIRE(lm.size() == 3);
  CHECK(lm[0].point_index == 0);
  CHECK(lm[0].id == 0);
  CHECK(lm[2].point_index == static_cast<int>(c.points.size()) - 1);
  CHECK(lm[2].id == 2);
  int peak = 0;
  for (size_t i = 0; i < c.points.size(); ++i)
    if (c.points[i].amplitude > c.points[peak].amplitude) peak = static_cast<int>(i);
  CHECK(lm[1].point_index == peak);
}

TEST_CASE("a monotone curve has no interior extremum for two regions") {
  std::vector<double> w, a;
  for (int i = 0; i <= 20; ++i) {
    w.push_back(0.05 * i);
    a.push_back(1.0 + 0.1 * i);
  }
  CHECK_THROWS_AS(find_landmarks(make_curve(w, a), 2), std::invalid_argument);
}

TEST_CASE("peak-valley-peak shape yields three ordered interior landmarks") {
  // two Gaussian bumps with a dip between them: interior extrema near
  // w = 0.25 (peak), 0.5 (valley), 0.75 (peak)
  std::vector<double> w, a;
  for (int i = 0; i <= 200; ++i) {
    double x = i / 200.0;
    w.push_back(x);
    double g1 = std::exp(-std::pow((x - 0.25) / 0.08, 2));
    double g2 = 0.8 * std::exp(-std::pow((x - 0.75) / 0.08, 2));
    a.push_back(1.0 + g1 + g2);
  }
  FrfCurve c = make_curve(w, a);
  auto lm = find_landmarks(c, 4);
  REQUIRE(lm.size() == 5);
  for (size_t i = 1; i < lm.size(); ++i) CHECK(lm[i].point_index > lm[i - 1].point_index);
  // peak, valley, peak pattern
  double a1 = c.points[lm[1].point_index].amplitude;
  double a2 = c.points[lm[2].point_index].amplitude;
  double a3 = c.points[lm[3].point_index].amplitude;
  CHECK(a1 > a2);
  CHECK(a3 > a2);

  ArcParametrizedFrf pfrf = piecewise_normalize(c, lm, unit_scaling());
  CHECK(pfrf.n_regions == 4);
  CHECK(pfrf.s_values.front() == 0.0);
  CHECK(pfrf.s_values.back() == doctest::Approx(4.0).epsilon(1e-14));
  for (const Landmark& l : pfrf.landmarks)
    CHECK(pfrf.s_values[l.point_index] == doctest::Approx(l.id).epsilon(1e-14));
}

TEST_CASE("manual overrides pin the interior landmarks") {
  FrfCurve c = duffing_curve(0.01);
  auto lm = find_landmarks(c, 2, {7});
  REQUIRE(lm.size() == 3);
  CHECK(lm[1].point_index == 7);
}

TEST_CASE("piecewise normalization is strictly increasing within [0, n_regions]") {
  FrfCurve c = duffing_curve(0.02);
  AxisScaling sc = family_scaling({&c});
  ArcParametrizedFrf pfrf = piecewise_normalize(c, find_landmarks(c, 2), sc);
  REQUIRE(pfrf.s_values.size() == c.points.size());
  CHECK(pfrf.s_values.front() == 0.0);
  CHECK(pfrf.s_values.back() == doctest::Approx(2.0).epsilon(1e-14));
  for (size_t i = 1; i < pfrf.s_values.size(); ++i)
    CHECK(pfrf.s_values[i] > pfrf.s_values[i - 1]);
  CHECK(pfrf.s_values[pfrf.landmarks[1].point_index] == doctest::Approx(1.0));
}

TEST_CASE("lookup is exact at stored points and rejects out-of-range s") {
  FrfCurve c = duffing_curve(0.01);
  AxisScaling sc = family_scaling({&c});
  ArcParametrizedFrf pfrf = piecewise_normalize(c, find_landmarks(c, 2), sc);
  for (size_t i = 0; i < c.points.size(); i += 4) {
    auto [w, a] = frf_lookup(pfrf, pfrf.s_values[i]);
    CHECK(w == doctest::Approx(c.points[i].omega).epsilon(1e-14));
    CHECK(a == doctest::Approx(c.points[i].amplitude).epsilon(1e-14));
  }
  CHECK_THROWS_AS(frf_lookup(pfrf, -1e-9), std::out_of_range);
  CHECK_THROWS_AS(frf_lookup(pfrf, 2.0 + 1e-9), std::out_of_range);

  // s=1 sits on the FRF peak
  auto [wp, ap] = frf_lookup(pfrf, 1.0);
  int peak = pfrf.landmarks[1].point_index;
  CHECK(wp == doctest::Approx(c.points[peak].omega).epsilon(1e-12));
  CHECK(ap == doctest::Approx(c.points[peak].amplitude).epsilon(1e-12));
}

TEST_CASE("raw arc length of the duffing family grows with forcing") {
  std::vector<FrfCurve> family;
  for (double beta : {0.005, 0.01, 0.02}) family.push_back(duffing_curve(beta));
  AxisScaling sc = family_scaling({&family[0], &family[1], &family[2]});
  double prev = 0.0;
  for (const FrfCurve& c : family) {
    double len = chord_arclength(c, sc).back();
    CHECK(len > prev);
    prev = len;
  }
}

TEST_CASE("round trip: re-parametrizing a dense resampling reproduces s") {
  FrfCurve c = duffing_curve(0.01);
  AxisScaling sc = family_scaling({&c});
  ArcParametrizedFrf pfrf = piecewise_normalize(c, find_landmarks(c, 2), sc);

  // resample 10x denser along s, rebuild the parametrization from scratch
  const int n = 10 * static_cast<int>(c.points.size());
  std::vector<double> s_in, w, a;
  for (int i = 0; i <= n; ++i) {
    double s = 2.0 * i / n;
    auto [wi, ai] = frf_lookup(pfrf, s);
    s_in.push_back(s);
    w.push_back(wi);
    a.push_back(ai);
  }
  FrfCurve dense = make_curve(w, a);
  ArcParametrizedFrf back = piecewise_normalize(dense, find_landmarks(dense, 2), sc);
  for (int i = 0; i <= n; i += 7) CHECK(std::abs(back.s_values[i] - s_in[i]) < 1e-3);
}

TEST_CASE("refinement stability: halving the step moves s of a fixed point < 1e-3") {
  AxisScaling sc;
  {
    FrfCurve coarse = duffing_curve(0.01, 0.2);
    FrfCurve fine = duffing_curve(0.01, 0.1);
    sc = family_scaling({&coarse, &fine});
    ArcParametrizedFrf pc = piecewise_normalize(coarse, find_landmarks(coarse, 2), sc);
    ArcParametrizedFrf pf = piecewise_normalize(fine, find_landmarks(fine, 2), sc);
    for (double omega : {0.85, 0.92, 0.98}) {
      double s0 = s_at_omega_prepeak(pc, omega);
      double s1 = s_at_omega_prepeak(pf, omega);
      REQUIRE(s0 >= 0.0);
      REQUIRE(s1 >= 0.0);
      CHECK(std::abs(s0 - s1) < 1e-3);
    }
  }
}
