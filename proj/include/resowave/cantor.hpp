#pragma once

#include "resowave/nashmoser.hpp"

// Frequency-set scanning: the doubled-gamma Melnikov conditions excise
// sub-intervals of each dyadic window [delta1/2, delta1]; their union measures
// the complement of the accepted set, whose measure scales like
// gamma * eta^{1+(p-1)(tau-1)} near delta = 0.

namespace resowave {

/// m(delta) = M(delta, v1(delta), w(delta)) sampled along a branch, with cubic
/// interpolation between samples and linear extrapolation outside.
class MFunc {
 public:
  MFunc() = default;
  MFunc(std::vector<double> deltas, std::vector<double> values);
  static MFunc from_branch(std::span<const BranchPoint> branch);
  static MFunc constant(double value) { return MFunc({0.0, 1.0}, {value, value}); }

  double operator()(double delta) const;
  double derivative(double delta) const;
  bool empty() const { return d_.empty(); }

 private:
  std::vector<double> d_, m_;
};

struct ExcisionInterval {
  double lo, hi;
  int family;  // 1: |omega l - j|, 2: shifted by eps m/(2j)
};

/// Excised sub-intervals of [delta1/2, delta1] for the pair (l, j) under the
/// 2 gamma convention, clipped to the activity region l, j > 1/(3 eps(delta)).
/// Throws if the sampled shifted function is not monotone.
std::vector<ExcisionInterval> excision_intervals(int l, int j, double delta1, const MFunc& m,
                                                 double gamma, double tau, int p, int s_star);

struct WindowRow {
  double lo = 0, hi = 0;
  double density_grid = 1.0;       // accepted fraction on the scan grid
  double excised_grid = 0.0;       // (1 - density) * window length
  double excised_intervals = 0.0;  // union length of excision intervals
  long active_pairs = 0;
  double tail_bound = 0.0;  // analytic bound on the l > L_cap contribution
};

struct PairRow {
  int l, j;
  double delta1;
  double length;      // measured |R_{l,j}|
  double norm_ratio;  // length * l^{tau+1} delta1^{p-2} / gamma
};

struct MeasureReport {
  std::vector<WindowRow> windows;
  std::vector<PairRow> pairs;
  double eta = 0.0;
  double fitted_exponent = 0.0;
  double target_exponent = 0.0;  // 1 + (p-1)(tau-1)
  double gamma = 0.0, tau = 1.5;
  int p = 3;
};

struct ScanParams {
  double gamma = 0.05;
  double tau = 1.5;
  int p = 3;
  int s_star = +1;
  int n_windows = 5;
  int grid_per_window = 4000;
  double c0 = 8.0;         // aperture constant in j/l in [1 -+ c0 delta^{p-1}]
  int L_cap_factor = 4;    // cap l <= factor * ceil(1/(3 eps(delta1/2)))
};

/// Scan (0, eta] in dyadic windows: grid acceptance densities plus the
/// interval-based excision measure, and the power-law fit of the cumulative
/// excised measure against eta.
MeasureReport scan_delta_grid(const MFunc& m, double eta, const ScanParams& sp);

/// Least-squares slope of log(excised) against log(eta).
double fit_excision_exponent(std::span<const double> etas, std::span<const double> excised);

struct DensityVerdict {
  double fitted_exponent = 0.0;
  double target_exponent = 0.0;
  double last_window_density = 0.0;
  bool exponent_ok = false;
};

/// Pass/fail of the fitted exponent against 1 + (p-1)(tau-1).  Requires at
/// least 4 dyadic windows with nonzero excision.
DensityVerdict density_report(const MeasureReport& report, double tol_exponent);

}  // namespace resowave
