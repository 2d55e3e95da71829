#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "resowave/grid.hpp"

using namespace resowave;

namespace {

SpectralField random_field(int L, int J, std::mt19937_64& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  SpectralField f(L, J);
  for (int l = 0; l <= L; ++l)
    for (int j = 1; j <= J; ++j) f.set_pair(l, j, complexd{u(rng), l == 0 ? 0.0 : u(rng)});
  return f;
}

NonlinearitySpec cubic_const() {
  NonlinearitySpec s;
  s.p = 3;
  s.terms[3] = TrigPolynomial::constant(1.0);
  return s;
}

}  // namespace

TEST_CASE("synthesis is real and analysis o synthesis = identity") {
  std::mt19937_64 rng(17);
  SpectralField u = random_field(5, 7, rng);
  auto [nt, nx] = grid_sizes(u.L(), u.J(), 2);
  TensorGrid grid(nt, nx);
  Eigen::MatrixXd vals = grid.synth(u);
  SpectralField back = grid.analyze_sine(vals, u.L(), u.J());
  double scale = norm_sigma_s(u, {0, 1});
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j)
      CHECK(std::abs(back.at(l, j) - u.at(l, j)) < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("sine analysis of pure cosine content uses the exact cross integrals") {
  // F(x) = cos(2x): b_j = (2/pi) int_0^pi cos(2x) sin(jx) dx
  TensorGrid grid(8, 64);
  Eigen::MatrixXd vals(8, 64);
  for (int n = 0; n < 8; ++n)
    for (int i = 0; i < 64; ++i) vals(n, i) = std::cos(2.0 * grid.x(i));
  SpectralField f = grid.analyze_sine(vals, 0, 9);
  for (int j = 1; j <= 9; ++j) {
    // quadrature oracle
    int nq = 200000;
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
      double x = kPi * (i + 0.5) / nq;
      acc += std::cos(2 * x) * std::sin(j * x);
    }
    acc *= (kPi / nq) * (2.0 / kPi);
    CHECK(f.at(0, j).real() == doctest::Approx(acc).epsilon(1e-6));
    CHECK(std::abs(f.at(0, j).imag()) < 1e-14);
  }
}

TEST_CASE("eval_nonlinearity u^3 trig identity") {
  // u = sin x, f = u^3: (3 sin x - sin 3x)/4, time-constant
  SpectralField u(2, 4);
  u.set(0, 1, complexd{1.0, 0.0});
  SpectralField g = eval_nonlinearity(cubic_const(), 0.0, u, 3);
  CHECK(g.at(0, 1).real() == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(g.at(0, 3).real() == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(std::abs(g.at(0, 2)) < 1e-14);
  CHECK(std::abs(g.at(1, 1)) < 1e-14);

  SpectralField z(2, 4);
  CHECK(eval_nonlinearity(cubic_const(), 0.1, z).is_zero());
}

TEST_CASE("eval_nonlinearity u^2 against quadrature oracle") {
  // u = sin x, f = u^2 -> (1 - cos 2x)/2; sine Galerkin coefficients from quadrature
  NonlinearitySpec s;
  s.p = 2;
  s.terms[2] = TrigPolynomial::constant(1.0);
  SpectralField u(1, 5);
  u.set(0, 1, complexd{1.0, 0.0});
  SpectralField g = eval_nonlinearity(s, 0.0, u, 4);
  for (int j = 1; j <= 5; ++j) {
    int nq = 400000;
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
      double x = kPi * (i + 0.5) / nq;
      acc += 0.5 * (1.0 - std::cos(2 * x)) * std::sin(j * x);
    }
    acc *= (kPi / nq) * (2.0 / kPi);
    CHECK(g.at(0, j).real() == doctest::Approx(acc).epsilon(1e-8));
  }
}

TEST_CASE("radius guard") {
  NonlinearitySpec s = cubic_const();
  s.radius = 0.5;
  SpectralField u(1, 2);
  u.set_pair(1, 1, complexd{1.0, 0.0});  // amplitude 2 at (t,x)=(0,pi/2)
  CHECK_THROWS_AS((void)eval_nonlinearity(s, 0.3, u), RadiusGuardError);
  CHECK_NOTHROW((void)eval_nonlinearity(s, 0.1, u));
}

TEST_CASE("algebra property of the sigma,s norm") {
  // ||uv|| <= C ||u|| ||v|| with one C across random fields and seeds
  std::mt19937_64 rng(23);
  NormWeights w{0.1, 1.0};
  double cmax = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    SpectralField u = random_field(4, 4, rng, 0.5);
    SpectralField v = random_field(4, 4, rng, 0.5);
    auto [nt, nx] = grid_sizes(8, 8, 3);
    TensorGrid grid(nt, nx);
    Eigen::MatrixXd pv = grid.synth(u).cwiseProduct(grid.synth(v));
    SpectralField uv = grid.analyze_sine(pv, 8, 8);
    double c = norm_sigma_s(uv, w) / (norm_sigma_s(u, w) * norm_sigma_s(v, w));
    cmax = std::max(cmax, c);
  }
  CHECK(cmax > 0.0);
  CHECK(cmax < 5.0);  // fitted constant, stable at this truncation
}

TEST_CASE("mean value M") {
  NonlinearitySpec s = cubic_const();
  SpectralField zero(2, 2);
  CHECK(mean_value_M(s, 0.0, zero, zero, zero) == doctest::Approx(0.0));

  // f = u^3, u = 2 cos t sin x: mean of 3u^2 over Omega is 3
  SpectralField u(2, 2);
  u.set_pair(1, 1, complexd{1.0, 0.0});
  SpectralField z(2, 2);
  CHECK(mean_value_M(s, 0.0, u, z, z) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("mean value Fubini cross-check") {
  // the x-average of the time average equals the full mean
  NonlinearitySpec s = cubic_const();
  std::mt19937_64 rng(31);
  SpectralField u = random_field(3, 3, rng, 0.4);
  SpectralField z(3, 3);
  double m = mean_value_M(s, 0.0, u, z, z);
  Fourier2D a = nonlinearity_derivative_table(s, 0.0, u, 3);
  TrigPolynomial a0 = a.time_average();
  CHECK(m == doctest::Approx(a0.mean_0_pi()).epsilon(1e-12));
}

TEST_CASE("sine_mult_matrix agrees with quadrature") {
  TrigPolynomial a;
  a.c0 = 0.3;
  a.cos_coeffs = {1.0, -0.5};
  a.sin_coeffs = {0.25};
  int J = 6;
  Eigen::MatrixXd m = sine_mult_matrix(a, J);
  int nq = 200000;
  for (int j = 1; j <= J; ++j)
    for (int jp = j; jp <= J; ++jp) {
      double acc = 0.0;
      for (int i = 0; i < nq; ++i) {
        double x = kPi * (i + 0.5) / nq;
        acc += a.eval(x) * std::sin(j * x) * std::sin(jp * x);
      }
      acc *= (kPi / nq) * (2.0 / kPi);
      CHECK(m(j - 1, jp - 1) == doctest::Approx(acc).epsilon(1e-7));
      CHECK(m(j - 1, jp - 1) == doctest::Approx(m(jp - 1, j - 1)).epsilon(1e-13));
    }
}

TEST_CASE("galerkin_product and integrate_a_power") {
  // int_Omega v^4 for v = 2 cos t sin x equals 4.5 pi^2
  SpectralField v(1, 1);
  v.set_pair(1, 1, complexd{1.0, 0.0});
  CHECK(integrate_a_power(TrigPolynomial::constant(1.0), v, 4) ==
        doctest::Approx(4.5 * kPi * kPi).epsilon(1e-13));

  std::pair<const SpectralField*, int> fac[] = {{&v, 3}};
  SpectralField g = galerkin_product(TrigPolynomial::constant(1.0), fac, 3, 3);
  // v^3 = 8 cos^3 t sin^3 x = (6 cos t + 2 cos 3t)(3 sin x - sin 3x)/4
  CHECK(g.at(1, 1).real() == doctest::Approx(9.0 / 4.0).epsilon(1e-12));
  CHECK(g.at(3, 3).real() == doctest::Approx(-1.0 / 4.0).epsilon(1e-12));
  CHECK(g.at(1, 3).real() == doctest::Approx(-3.0 / 4.0).epsilon(1e-12));
  CHECK(g.at(3, 1).real() == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("apply_L_omega matches spectral differentiation on the grid") {
  std::mt19937_64 rng(41);
  SpectralField u = random_field(3, 3, rng);
  double omega2 = 1.0 + 2.0 * 0.1 * 0.1;
  double omega = std::sqrt(omega2);
  SpectralField lu = apply_L_omega(u, omega);
  // oracle: -omega^2 u_tt + u_xx with coefficient-wise derivatives
  SpectralField oracle(u.L(), u.J());
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j) {
      complexd utt = -double(l) * l * u.at(l, j);
      complexd uxx = -double(j) * j * u.at(l, j);
      oracle.set(l, j, -omega2 * utt + uxx);
    }
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j) CHECK(std::abs(lu.at(l, j) - oracle.at(l, j)) < 1e-12);
}
