#include "resowave/parity.hpp"

#include <cmath>
#include <random>

namespace resowave {

namespace {

// deterministic V-trial fields: single modes, pair sums, then seeded random
std::vector<SpectralField> v_trials(int truncation, int count, std::mt19937_64& rng) {
  std::vector<SpectralField> out;
  int T = std::max(1, truncation);
  for (int l = 1; l <= T; ++l) {
    SpectralField v(T, T);
    v.set_pair(l, l, complexd{0.5, 0.0});  // cos(lt) sin(lx)
    out.push_back(std::move(v));
  }
  for (int l = 1; l < T; ++l) {
    SpectralField v(T, T);
    v.set_pair(l, l, complexd{0.5, 0.0});
    v.set_pair(l + 1, l + 1, complexd{0.5, 0.0});
    out.push_back(v);
    v.set_pair(l + 1, l + 1, complexd{-0.5, 0.0});
    out.push_back(std::move(v));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    SpectralField v(T, T);
    for (int l = 1; l <= T; ++l) v.set_pair(l, l, complexd{u(rng), u(rng)});
    double nn = norm_sigma_s(v, {0.0, 1.0});
    if (nn > 0) v *= 1.0 / nn;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

ParityVerdict parity_classify(const TrigPolynomial& a, int q, double tol, int trials,
                              uint64_t seed, double witness_tol) {
  if (q < 2) throw std::invalid_argument("parity_classify: q must be >= 2");
  ParityVerdict v;
  v.q = q;
  // defects from the exact decomposition about x = pi/2
  v.symmetric_defect = 2.0 * a.antisymmetric_part().max_abs();
  v.antisymmetric_defect = 2.0 * a.symmetric_part().max_abs();
  bool parity_matching =
      (q % 2 == 0) ? (v.antisymmetric_defect < tol) : (v.symmetric_defect < tol);
  v.vanishes_on_V = parity_matching;

  std::mt19937_64 rng(seed);
  double best = 0.0, best_signed = 0.0;
  std::optional<SpectralField> best_v;
  double most_positive = -std::numeric_limits<double>::infinity();
  for (const auto& trial : v_trials(4, trials, rng)) {
    double val = integrate_a_power(a, trial, q, 2);
    most_positive = std::max(most_positive, val);
    if (std::abs(val) > best) {
      best = std::abs(val);
      best_signed = val;
      best_v = trial;
    }
  }
  if (best > witness_tol && !v.vanishes_on_V) {
    v.witness = best_v;
    v.witness_integral = best_signed;
    // odd powers of v flip sign with v, so a positive value is always
    // attainable when q is odd
    v.s_star = (q % 2 == 1 || most_positive > witness_tol) ? +1 : -1;
  }
  return v;
}

ApResult integral_condition_ap(const TrigPolynomial& ap, int p, int trials, int truncation,
                               uint64_t seed, double tol) {
  if (trials < 1) throw std::invalid_argument("integral_condition_ap: trials must be >= 1");
  std::mt19937_64 rng(seed);
  ApResult r;
  double best = 0.0;
  double most_positive = -std::numeric_limits<double>::infinity();
  for (const auto& trial : v_trials(truncation, trials, rng)) {
    double val = integrate_a_power(ap, trial, p + 1, 2);
    most_positive = std::max(most_positive, val);
    if (std::abs(val) > best) {
      best = std::abs(val);
      r.integral = val;
      r.witness = trial;
    }
  }
  r.holds = best > tol;
  // (p+1) even: the sign of the integral is fixed by a_p; (p+1) odd: v -> -v
  // flips it, so a positive value always exists once any nonzero one does
  r.s_star = (!r.holds || (p % 2 == 0) || most_positive > tol) ? +1 : -1;
  return r;
}

VqAudit vq_equivalence_audit(int random_a_count, std::span<const int> q_list, int truncation,
                             double tol, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VqAudit audit;
  for (int sample = 0; sample < random_a_count; ++sample) {
    TrigPolynomial a;
    a.c0 = u(rng);
    a.cos_coeffs.resize(6);
    a.sin_coeffs.resize(6);
    for (auto& c : a.cos_coeffs) c = u(rng);
    for (auto& c : a.sin_coeffs) c = u(rng);

    for (int q : q_list) {
      TrigPolynomial matching = (q % 2 == 0) ? a.antisymmetric_part() : a.symmetric_part();
      TrigPolynomial mismatching = (q % 2 == 0) ? a.symmetric_part() : a.antisymmetric_part();

      std::mt19937_64 trial_rng(seed ^ (uint64_t(sample) << 20) ^ uint64_t(q));
      auto trials = v_trials(truncation, 12, trial_rng);

      {
        double mx = 0.0;
        for (const auto& t : trials)
          mx = std::max(mx, std::abs(integrate_a_power(matching, t, q, 2)));
        bool ok = mx < tol;
        audit.rows.push_back({sample, q, true, matching.max_abs(), mx, ok});
        if (!ok) ++audit.misclassified;
      }
      if (mismatching.max_abs() > 0.1) {
        double mx = 0.0;
        for (const auto& t : trials)
          mx = std::max(mx, std::abs(integrate_a_power(mismatching, t, q, 2)));
        bool ok = mx > 100.0 * tol;
        audit.rows.push_back({sample, q, false, mismatching.max_abs(), mx, ok});
        if (!ok) ++audit.misclassified;
      }
    }
  }
  return audit;
}

}  // namespace resowave
