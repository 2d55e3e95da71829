#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "resowave/cantor.hpp"

using namespace resowave;

TEST_CASE("excision intervals: gamma = 0 empty, aperture emptiness") {
  MFunc m = MFunc::constant(2.0);
  CHECK(excision_intervals(40, 41, 0.3, m, 0.0, 1.5, 3, +1).empty());

  // pairs far outside j/l in [1 - c0 d^2, 1 + c0 d^2] never excise
  double delta1 = 0.3;
  double aperture = 8.0 * delta1 * delta1;
  for (int l : {30, 60, 90}) {
    int joff = static_cast<int>(l * 2.0 * aperture) + 3;
    CHECK(excision_intervals(l, l + joff, delta1, m, 0.05, 1.5, 3, +1).empty());
    CHECK(excision_intervals(l, std::max(1, l - joff), delta1, m, 0.05, 1.5, 3, +1).empty());
  }
}

TEST_CASE("excision interval endpoints solve the threshold equation") {
  MFunc m = MFunc::constant(1.5);
  double delta1 = 0.3, gamma = 0.05, tau = 1.5;
  int p = 3, s = +1;
  // choose (l, j) resonant inside the window: omega(d) l ~ j
  // omega(0.25) = sqrt(1 + 2*0.0625) ~ 1.0607 -> l = 33: omega l ~ 35.0
  int l = 33, j = 35;
  auto iv = excision_intervals(l, j, delta1, m, gamma, tau, p, s);
  REQUIRE(!iv.empty());
  for (const auto& seg : iv) {
    CHECK(seg.lo >= delta1 / 2.0 - 1e-12);
    CHECK(seg.hi <= delta1 + 1e-12);
    CHECK(seg.hi > seg.lo);
    double thr = 2.0 * gamma / std::pow(double(l + j), tau);
    auto f = [&](double d) {
      double om = std::sqrt(1.0 + 2.0 * d * d);
      if (seg.family == 1) return om * l - j;
      return om * l - j - d * d * m(d) / (2.0 * j);
    };
    // interior point violates, clipped endpoints sit on the threshold
    CHECK(std::abs(f(0.5 * (seg.lo + seg.hi))) < thr);
    if (seg.lo > delta1 / 2.0 + 1e-9)
      CHECK(std::abs(std::abs(f(seg.lo)) - thr) < 1e-9);
    if (seg.hi < delta1 - 1e-9)
      CHECK(std::abs(std::abs(f(seg.hi)) - thr) < 1e-9);
  }

  // measured length against the measure bound gamma / (l^{tau+1} delta1^{p-2})
  double total = 0.0;
  for (const auto& seg : iv) total += seg.hi - seg.lo;
  double scale = gamma / (std::pow(double(l), tau + 1.0) * std::pow(delta1, p - 2));
  CHECK(total <= 32.0 * scale);  // 2^{p+3}/(p-1) from the monotonicity chain
}

TEST_CASE("scan_delta_grid: densities, monotone gamma, interval/grid agreement") {
  MFunc m = MFunc::constant(1.8);
  ScanParams sp;
  sp.gamma = 0.05;
  sp.tau = 1.5;
  sp.p = 3;
  sp.n_windows = 5;
  sp.grid_per_window = 1500;
  double eta = 0.42;
  MeasureReport rep = scan_delta_grid(m, eta, sp);
  REQUIRE(static_cast<int>(rep.windows.size()) == sp.n_windows);

  for (const auto& w : rep.windows) {
    CHECK(w.density_grid >= 0.0);
    CHECK(w.density_grid <= 1.0);
    // union bound: grid measurement <= interval union + one cell per endpoint
    double cell = (w.hi - w.lo) / sp.grid_per_window;
    CHECK(w.excised_grid <= w.excised_intervals + 2.0 * cell * (w.active_pairs + 1.0));
    CHECK(w.excised_intervals <= w.excised_grid + 2.0 * cell * (w.active_pairs + 1.0));
  }
  // densities rise toward 1 as the window shrinks
  CHECK(rep.windows.back().density_grid >= rep.windows.front().density_grid - 0.05);
  CHECK(rep.windows.back().density_grid > 0.9);

  // acceptance monotone in gamma: accepted(2 gamma) subset accepted(gamma)
  ScanParams sp2 = sp;
  sp2.gamma = 2.0 * sp.gamma;
  MeasureReport rep2 = scan_delta_grid(m, eta, sp2);
  for (size_t i = 0; i < rep.windows.size(); ++i)
    CHECK(rep2.windows[i].density_grid <= rep.windows[i].density_grid + 1e-12);

  // gamma = 0: density identically 1
  ScanParams sp0 = sp;
  sp0.gamma = 0.0;
  MeasureReport rep0 = scan_delta_grid(m, eta, sp0);
  for (const auto& w : rep0.windows) CHECK(w.density_grid == 1.0);

  // pair rows satisfy the normalized measure law with one constant
  for (const auto& pr : rep.pairs) CHECK(pr.norm_ratio <= 32.0);
}

TEST_CASE("exponent fit: synthetic model and plug-in targets") {
  // synthetic excision c eta^{1+(p-1)(tau-1)}
  double expo = 2.0;
  std::vector<double> etas, cum;
  for (int k = 0; k < 6; ++k) {
    double e = 0.4 / std::pow(2.0, k);
    etas.push_back(e);
    cum.push_back(0.37 * std::pow(e, expo));
  }
  CHECK(fit_excision_exponent(etas, cum) == doctest::Approx(expo).epsilon(1e-3));

  // target exponents
  CHECK(1.0 + (3 - 1) * (1.5 - 1.0) == doctest::Approx(2.0));
  CHECK(1.0 + (2 - 1) * (1.5 - 1.0) == doctest::Approx(1.5));
}

TEST_CASE("density_report verdict and window precondition") {
  MFunc m = MFunc::constant(1.8);
  ScanParams sp;
  sp.gamma = 0.05;
  sp.n_windows = 6;
  sp.grid_per_window = 800;
  MeasureReport rep = scan_delta_grid(m, 0.42, sp);
  DensityVerdict v = density_report(rep, 0.3);
  CHECK(v.target_exponent == doctest::Approx(2.0));
  CHECK(std::abs(v.fitted_exponent - 2.0) < 0.3);
  CHECK(v.exponent_ok);

  ScanParams tiny = sp;
  tiny.n_windows = 2;
  MeasureReport rep2 = scan_delta_grid(m, 0.42, tiny);
  CHECK_THROWS_AS((void)density_report(rep2, 0.3), std::runtime_error);
}

TEST_CASE("MFunc interpolation reproduces smooth samples") {
  std::vector<double> d, v;
  auto f = [](double x) { return 1.3 + 0.4 * x + 0.2 * x * x; };
  for (int i = 0; i <= 10; ++i) {
    d.push_back(0.05 + 0.03 * i);
    v.push_back(f(d.back()));
  }
  MFunc m(d, v);
  for (double x : {0.06, 0.11, 0.2, 0.33}) CHECK(m(x) == doctest::Approx(f(x)).epsilon(1e-3));
  // extrapolation stays linear and finite
  CHECK(std::isfinite(m(0.01)));
  CHECK(std::isfinite(m(0.5)));
}
