#include "resowave/cantor.hpp"

#include <algorithm>
#include <cmath>

namespace resowave {

MFunc::MFunc(std::vector<double> deltas, std::vector<double> values)
    : d_(std::move(deltas)), m_(std::move(values)) {
  if (d_.size() != m_.size() || d_.size() < 2)
    throw std::invalid_argument("MFunc: need at least two samples");
  for (size_t i = 1; i < d_.size(); ++i)
    if (d_[i] <= d_[i - 1]) throw std::invalid_argument("MFunc: samples must be increasing");
}

MFunc MFunc::from_branch(std::span<const BranchPoint> branch) {
  std::vector<double> d, m;
  for (const auto& bp : branch) {
    d.push_back(bp.delta);
    m.push_back(bp.m_value);
  }
  return MFunc(std::move(d), std::move(m));
}

double MFunc::operator()(double delta) const {
  size_t n = d_.size();
  if (delta <= d_.front())
    return m_.front() + (m_[1] - m_[0]) / (d_[1] - d_[0]) * (delta - d_.front());
  if (delta >= d_.back())
    return m_.back() + (m_[n - 1] - m_[n - 2]) / (d_[n - 1] - d_[n - 2]) * (delta - d_.back());
  size_t i = std::upper_bound(d_.begin(), d_.end(), delta) - d_.begin() - 1;
  i = std::min(i, n - 2);
  // Catmull-Rom style cubic on [d_i, d_{i+1}] with one-sided slopes at the ends
  double h = d_[i + 1] - d_[i];
  double t = (delta - d_[i]) / h;
  double s0 = (i > 0) ? (m_[i + 1] - m_[i - 1]) / (d_[i + 1] - d_[i - 1])
                      : (m_[1] - m_[0]) / (d_[1] - d_[0]);
  double s1 = (i + 2 < n) ? (m_[i + 2] - m_[i]) / (d_[i + 2] - d_[i])
                          : (m_[n - 1] - m_[n - 2]) / (d_[n - 1] - d_[n - 2]);
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * m_[i] + h10 * h * s0 + h01 * m_[i + 1] + h11 * h * s1;
}

double MFunc::derivative(double delta) const {
  double h = 1e-6 * std::max(1.0, std::abs(delta));
  return ((*this)(delta + h) - (*this)(delta - h)) / (2.0 * h);
}

namespace {

double omega_of(double delta, int p, int s_star) {
  return std::sqrt(1.0 + 2.0 * s_star * std::pow(delta, p - 1));
}

// delta below which the pair (l, j) is outside the active range
double activity_floor(int l, int j, int p) {
  double lm = std::min(l, j);
  return std::pow(1.0 / (3.0 * lm), 1.0 / (p - 1));
}

}  // namespace

std::vector<ExcisionInterval> excision_intervals(int l, int j, double delta1, const MFunc& m,
                                                 double gamma, double tau, int p, int s_star) {
  std::vector<ExcisionInterval> out;
  if (gamma == 0.0 || l == j || l < 1 || j < 1) return out;
  double lo = delta1 / 2.0, hi = delta1;
  lo = std::max(lo, activity_floor(l, j, p));
  if (lo >= hi) return out;
  double thr = 2.0 * gamma / std::pow(double(l + j), tau);

  // family 1: |omega(delta) l - j| < thr, invertible in closed form
  {
    auto delta_of = [&](double c) -> double {
      double om = (double(j) + c) / l;
      double e = s_star * (om * om - 1.0) / 2.0;
      if (e <= 0.0) return (s_star * (omega_of(lo, p, s_star) * l - j - c) > 0.0) ? -1.0 : 2.0 * hi;
      return std::pow(e, 1.0 / (p - 1));
    };
    // omega l - j is monotone in delta (increasing for s* = +1)
    double a = delta_of(-thr), b = delta_of(thr);
    if (s_star < 0) std::swap(a, b);
    double clo = std::max(lo, a), chi = std::min(hi, b);
    if (clo < chi) out.push_back({clo, chi, 1});
  }

  // family 2: f(delta) = omega l - j - eps m(delta)/(2j), root bracketing on
  // the monotone sampled profile
  {
    auto f = [&](double d) {
      double eps = s_star * std::pow(d, p - 1);
      return omega_of(d, p, s_star) * l - j - eps * m(d) / (2.0 * j);
    };
    // monotone profile: no excision when both endpoint values sit on the same
    // side of the threshold band
    double flo = f(lo), fhi = f(hi);
    if ((flo > thr && fhi > thr) || (flo < -thr && fhi < -thr)) return out;
    const int K = 48;
    std::vector<double> xs(K + 1), fs(K + 1);
    for (int i = 0; i <= K; ++i) {
      xs[i] = lo + (hi - lo) * i / K;
      fs[i] = f(xs[i]);
    }
    int dir = (fs[K] > fs[0]) ? 1 : -1;
    for (int i = 0; i < K; ++i)
      if (dir * (fs[i + 1] - fs[i]) < -1e-12 * (std::abs(fs[i]) + 1.0))
        throw std::runtime_error("excision_intervals: sampled f_lj not monotone (m too rough)");
    auto solve = [&](double target) -> double {
      if (dir * (fs[0] - target) >= 0.0) return lo;
      if (dir * (fs[K] - target) <= 0.0) return hi;
      double a = lo, b = hi;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b);
        if (dir * (f(mid) - target) < 0.0)
          a = mid;
        else
          b = mid;
      }
      return 0.5 * (a + b);
    };
    double a = solve(dir > 0 ? -thr : thr), b = solve(dir > 0 ? thr : -thr);
    if (a > b) std::swap(a, b);
    // the interval is nonempty only if f actually enters (-thr, thr)
    double fm = f(0.5 * (a + b));
    if (std::abs(fm) < thr && b > a) out.push_back({a, b, 2});
  }
  return out;
}

namespace {

double union_length(std::vector<std::pair<double, double>>& segs) {
  if (segs.empty()) return 0.0;
  std::sort(segs.begin(), segs.end());
  double total = 0.0, lo = segs[0].first, hi = segs[0].second;
  for (size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].first > hi) {
      total += hi - lo;
      lo = segs[i].first;
      hi = segs[i].second;
    } else {
      hi = std::max(hi, segs[i].second);
    }
  }
  return total + (hi - lo);
}

}  // namespace

MeasureReport scan_delta_grid(const MFunc& m, double eta, const ScanParams& sp) {
  MeasureReport rep;
  rep.eta = eta;
  rep.gamma = sp.gamma;
  rep.tau = sp.tau;
  rep.p = sp.p;
  rep.target_exponent = 1.0 + (sp.p - 1) * (sp.tau - 1.0);

  for (int wdx = 0; wdx < sp.n_windows; ++wdx) {
    WindowRow row;
    row.hi = eta / std::pow(2.0, wdx);
    row.lo = row.hi / 2.0;
    double delta1 = row.hi;
    double eps_lo = std::pow(row.lo, sp.p - 1);
    int l_min = static_cast<int>(std::floor(1.0 / (3.0 * std::pow(delta1, sp.p - 1))));
    int L_cap = sp.L_cap_factor * static_cast<int>(std::ceil(1.0 / (3.0 * eps_lo)));

    std::vector<std::pair<double, double>> segs;
    double aperture = sp.c0 * std::pow(delta1, sp.p - 1);
    for (int l = std::max(1, l_min); l <= L_cap; ++l) {
      int jlo = std::max(1, static_cast<int>(std::floor(l * (1.0 - aperture))));
      int jhi = static_cast<int>(std::ceil(l * (1.0 + aperture)));
      for (int j = jlo; j <= jhi; ++j) {
        if (j == l) continue;
        auto iv = excision_intervals(l, j, delta1, m, sp.gamma, sp.tau, sp.p, sp.s_star);
        if (iv.empty()) continue;
        ++row.active_pairs;
        double len = 0.0;
        for (const auto& seg : iv) {
          segs.push_back({seg.lo, seg.hi});
          len += seg.hi - seg.lo;
        }
        rep.pairs.push_back(
            {l, j, delta1, len,
             len * std::pow(double(l), sp.tau + 1.0) * std::pow(delta1, sp.p - 2) / sp.gamma});
      }
    }
    row.excised_intervals = union_length(segs);
    // tail of the pair sum beyond L_cap, from the per-pair measure bound
    row.tail_bound = 2.0 * 8.0 * sp.c0 * sp.gamma * delta1 *
                     std::pow(2.0, sp.p - sp.tau) / (sp.p - 1) *
                     std::pow(double(L_cap), 1.0 - sp.tau) / (sp.tau - 1.0);

    // grid scan of the same conditions; a violation needs (omega - 1) l within
    // a threshold of an integer offset, so only l near q/(omega - 1) matter
    long accepted = 0;
    for (int i = 0; i < sp.grid_per_window; ++i) {
      double d = row.lo + (row.hi - row.lo) * (i + 0.5) / sp.grid_per_window;
      double eps = std::pow(d, sp.p - 1);
      double om = omega_of(d, sp.p, sp.s_star);
      double kcut = 1.0 / (3.0 * eps);
      double shift = std::abs(om - 1.0);
      bool ok = true;
      int qmax = static_cast<int>(std::ceil(shift * L_cap)) + 1;
      for (int q = 1; q <= qmax && ok; ++q) {
        int lc = static_cast<int>(std::lround(q / shift));
        for (int l = lc - 2; l <= lc + 2 && ok; ++l) {
          if (l <= kcut || l > L_cap) continue;
          int j0 = static_cast<int>(std::lround(om * l));
          for (int j = j0 - 1; j <= j0 + 1 && ok; ++j) {
            if (j < 1 || j == l || j <= kcut) continue;
            double thr = 2.0 * sp.gamma / std::pow(double(l + j), sp.tau);
            if (std::abs(om * l - j) < thr) ok = false;
            double eps_s = sp.s_star * eps;
            if (std::abs(om * l - j - eps_s * m(d) / (2.0 * j)) < thr) ok = false;
          }
        }
      }
      if (ok) ++accepted;
    }
    row.density_grid = double(accepted) / sp.grid_per_window;
    row.excised_grid = (1.0 - row.density_grid) * (row.hi - row.lo);
    rep.windows.push_back(row);
  }

  // power-law fit of the cumulative excised measure on (0, eta/2^m]
  std::vector<double> etas, cum;
  for (int wdx = 0; wdx < sp.n_windows; ++wdx) {
    double c = 0.0;
    for (int k = wdx; k < sp.n_windows; ++k) c += rep.windows[k].excised_intervals;
    if (c > 0.0) {
      etas.push_back(rep.windows[wdx].hi);
      cum.push_back(c);
    }
  }
  rep.fitted_exponent = fit_excision_exponent(etas, cum);
  return rep;
}

double fit_excision_exponent(std::span<const double> etas, std::span<const double> excised) {
  int n = static_cast<int>(etas.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double x = std::log(etas[i]), y = std::log(excised[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DensityVerdict density_report(const MeasureReport& report, double tol_exponent) {
  int usable = 0;
  for (const auto& w : report.windows)
    if (w.excised_intervals > 0.0) ++usable;
  if (usable < 4)
    throw std::runtime_error("density_report: insufficient windows with nonzero excision (" +
                             std::to_string(usable) + " < 4)");
  DensityVerdict v;
  v.fitted_exponent = report.fitted_exponent;
  v.target_exponent = report.target_exponent;
  v.last_window_density = report.windows.back().density_grid;
  v.exponent_ok = std::abs(v.fitted_exponent - v.target_exponent) <= tol_exponent;
  return v;
}

}  // namespace resowave
