#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "resowave/parity.hpp"

using namespace resowave;

TEST_CASE("parity_classify on the lemma's model cases") {
  // a(x) = sin 2x: antisymmetric about pi/2, so even powers integrate to zero
  TrigPolynomial sin2x;
  sin2x.sin_coeffs = {0.0, 1.0};
  ParityVerdict v = parity_classify(sin2x, 4);
  CHECK(v.antisymmetric_defect < 1e-12);
  CHECK(v.vanishes_on_V);
  CHECK(!v.witness.has_value());

  // a(x) = sin x: symmetric, so odd powers integrate to zero
  TrigPolynomial sinx;
  sinx.sin_coeffs = {1.0};
  ParityVerdict v2 = parity_classify(sinx, 3);
  CHECK(v2.symmetric_defect < 1e-12);
  CHECK(v2.vanishes_on_V);

  // a = 1, even q: positive witness, and cos t sin x certifies it
  ParityVerdict v3 = parity_classify(TrigPolynomial::constant(1.0), 4);
  CHECK(!v3.vanishes_on_V);
  REQUIRE(v3.witness.has_value());
  CHECK(v3.witness_integral > 1e-6);
  CHECK(v3.s_star.value() == +1);
  SpectralField c(1, 1);
  c.set_pair(1, 1, complexd{0.5, 0.0});  // cos t sin x
  CHECK(integrate_a_power(TrigPolynomial::constant(1.0), c, 4) > 1e-3);
}

TEST_CASE("decomposition identity and exactness of vanishing integrals") {
  TrigPolynomial a;
  a.c0 = 0.3;
  a.cos_coeffs = {0.7, -0.2, 0.5};
  a.sin_coeffs = {-0.4, 0.9};
  TrigPolynomial s = a.symmetric_part(), t = a.antisymmetric_part();
  for (int i = 0; i <= 64; ++i) {
    double x = kPi * i / 64;
    CHECK(s.eval(x) + t.eval(x) == doctest::Approx(a.eval(x)).epsilon(1e-14));
    CHECK(s.eval(kPi - x) == doctest::Approx(s.eval(x)).epsilon(1e-12));
    CHECK(t.eval(kPi - x) == doctest::Approx(-t.eval(x)).epsilon(1e-12));
  }

  // matching-parity integrals vanish to rounding, via exact quadrature
  SpectralField v(3, 3);
  v.set_pair(1, 1, complexd{0.4, 0.2});
  v.set_pair(3, 3, complexd{-0.3, 0.1});
  CHECK(std::abs(integrate_a_power(t, v, 4)) < 1e-12);
  CHECK(std::abs(integrate_a_power(s, v, 3)) < 1e-12);
}

TEST_CASE("integral_condition_ap") {
  // p = 3, a3 = 1: holds with s* = +1
  ApResult r = integral_condition_ap(TrigPolynomial::constant(1.0), 3, 8, 3);
  CHECK(r.holds);
  CHECK(r.s_star == +1);
  CHECK(r.integral > 0.0);

  // p = 2, a2 symmetric (constant): int a v^3 = 0 identically
  ApResult r2 = integral_condition_ap(TrigPolynomial::constant(1.0), 2, 8, 3);
  CHECK(!r2.holds);

  // p = 3 with negative mean: s* = -1
  ApResult r3 = integral_condition_ap(TrigPolynomial::constant(-1.0), 3, 8, 3);
  CHECK(r3.holds);
  CHECK(r3.s_star == -1);

  // p = 2 with an antisymmetric part: odd-q lemma no longer blocks it
  TrigPolynomial mixed;
  mixed.cos_coeffs = {0.8};  // cos x is antisymmetric about pi/2
  ApResult r4 = integral_condition_ap(mixed, 2, 10, 3);
  CHECK(r4.holds);
  CHECK(r4.s_star == +1);  // v -> -v flips the odd-power integral

  // refinement cross-check: recompute the witness integral at double resolution
  double again = integrate_a_power(mixed, r4.witness, 3, 5);
  CHECK(again == doctest::Approx(r4.integral).epsilon(1e-10));
}

TEST_CASE("vq equivalence audit has zero misclassifications") {
  std::vector<int> qs = {2, 3, 4, 5};
  VqAudit audit = vq_equivalence_audit(20, qs, 4, 1e-10);
  CHECK(audit.misclassified == 0);
  CHECK(!audit.rows.empty());
  int matched = 0, mismatched = 0;
  for (const auto& row : audit.rows) {
    if (row.matching_part) {
      CHECK(row.max_abs_integral < 1e-10);
      ++matched;
    } else {
      CHECK(row.max_abs_integral > 1e-8);
      ++mismatched;
    }
  }
  CHECK(matched > 0);
  CHECK(mismatched > 0);
}
