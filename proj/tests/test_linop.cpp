#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "resowave/linop.hpp"

using namespace resowave;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

NonlinearitySpec cubic_const() {
  NonlinearitySpec s;
  s.p = 3;
  s.terms[3] = TrigPolynomial::constant(1.0);
  return s;
}

TrigPolynomial test_a0() {
  TrigPolynomial a;
  a.cos_coeffs = {0.0, 1.0};  // cos 2x
  a.sin_coeffs = {0.5};       // + 0.5 sin x
  return a;
}

}  // namespace

TEST_CASE("eigen_Sk at eps = 0: lambda = j^2, phi = sqrt(2/pi) sin jx") {
  EigenSystem es = eigen_Sk(3, 0.0, test_a0(), 12);
  REQUIRE(static_cast<int>(es.modes.size()) == 11);
  for (size_t i = 0; i < es.modes.size(); ++i) {
    int j = es.modes[i];
    CHECK(es.lambda(i) == doctest::Approx(double(j) * j).epsilon(1e-13));
    VectorXd phi = es.phi_j(j);
    // concentrated on its own sine mode, L2-normalized
    CHECK(std::abs(phi(i)) == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-12));
    double nrm2 = (kPi / 2.0) * phi.squaredNorm();
    CHECK(nrm2 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("eigen_Sk constant a0: exact shift eps*c") {
  double eps = 0.05, c = 0.7;
  EigenSystem es = eigen_Sk(2, eps, TrigPolynomial::constant(c), 10);
  for (size_t i = 0; i < es.modes.size(); ++i) {
    int j = es.modes[i];
    CHECK(es.lambda(i) == doctest::Approx(double(j) * j + eps * c).epsilon(1e-13));
  }
}

TEST_CASE("eigen_Sk residuals, gaps, symmetry, perturbation bound") {
  double eps = 0.03;
  TrigPolynomial a0 = test_a0();
  double amax = a0.max_abs();
  for (int k : {0, 1, 4}) {
    EigenSystem es = eigen_Sk(k, eps, a0, 16);
    EigenSystem esm = eigen_Sk(-k, eps, a0, 16);
    int n = static_cast<int>(es.modes.size());
    // residuals ||S phi - lambda phi||_{L2} < 1e-9
    MatrixXd G = sine_mult_matrix(a0, 16);
    for (int i = 0; i < n; ++i) {
      VectorXd v = es.vectors.col(i);
      VectorXd Sv(n);
      for (int r = 0; r < n; ++r) {
        double acc = double(es.modes[r]) * es.modes[r] * v(r);
        for (int c = 0; c < n; ++c) acc += eps * G(es.modes[r] - 1, es.modes[c] - 1) * v(c);
        Sv(r) = acc;
      }
      CHECK(std::sqrt(kPi / 2.0) * (Sv - es.lambda(i) * v).norm() < 1e-9);
      // |lambda - j^2| <= |eps| max|a0|
      CHECK(std::abs(es.lambda(i) - double(es.modes[i]) * es.modes[i]) <= eps * amax + 1e-12);
      // exact k <-> -k symmetry
      CHECK(es.lambda(i) == esm.lambda(i));
    }
    // gaps >= (l+j) - 2
    for (int i = 0; i < n; ++i)
      for (int jdx = i + 1; jdx < n; ++jdx)
        CHECK(std::abs(es.lambda(jdx) - es.lambda(i)) >=
              double(es.modes[i] + es.modes[jdx]) - 2.0 - 1e-8);
  }
}

TEST_CASE("eigen asymptotics: lambda ~ j^2 + eps M and eigenvector proximity") {
  double eps = 0.01;
  TrigPolynomial a0 = test_a0();
  double M = a0.mean_0_pi();
  double amax = a0.max_abs();
  for (int k : {0, 3}) {
    EigenSystem es = eigen_Sk(k, eps, a0, 48);
    double cmax = 0.0, cvec = 0.0;
    for (int j = 8; j <= 32; ++j) {
      if (j == k) continue;
      cmax = std::max(cmax, double(j) * std::abs(es.lambda_j(j) - double(j) * j - eps * M));
      VectorXd phi = es.phi_j(j);
      VectorXd pure = VectorXd::Zero(phi.size());
      pure(es.index_of(j)) = std::sqrt(2.0 / kPi);
      if (phi(es.index_of(j)) < 0) phi = -phi;
      double dist = std::sqrt(kPi / 2.0) * (phi - pure).norm();
      cvec = std::max(cvec, dist * j / (eps * amax));
    }
    CHECK(cmax / std::abs(eps) < 10.0);  // j |lambda - j^2 - eps M| = O(eps)
    CHECK(cvec < 10.0);                  // |phi - sqrt(2/pi) sin jx| = O(eps|a0|/j)
  }
}

TEST_CASE("eigen_Sk positivity guard") {
  CHECK_THROWS_AS((void)eigen_Sk(1, 0.9, TrigPolynomial::constant(1.2), 8),
                  std::invalid_argument);
}

TEST_CASE("alpha_k") {
  // eps = 0: closed form min_j |omega^2 k^2 - j^2|
  TrigPolynomial a0 = test_a0();
  double omega = std::sqrt(1.0 + 2.0 * 0.04);
  for (int k : {1, 3, 7}) {
    EigenSystem es = eigen_Sk(k, 0.0, a0, 4 * k + 8);
    AlphaResult a = alpha_k(es, omega);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 4 * k + 8; ++j)
      if (j != k) best = std::min(best, std::abs(omega * omega * k * k - double(j) * j));
    CHECK(a.value == doctest::Approx(best).epsilon(1e-13));
  }

  // automatic lower bound alpha_k >= (k+1)/8 for k <= 1/(3 eps)
  double eps = 0.02;
  double om = std::sqrt(1.0 + 2.0 * eps);
  int kmax = static_cast<int>(1.0 / (3.0 * eps));
  for (int k = 0; k <= kmax; ++k) {
    EigenSystem es = eigen_Sk(k, eps, a0, 2 * k + 16);
    AlphaResult a = alpha_k(es, om);
    CHECK(a.value >= (k + 1) / 8.0);
  }

  // boundary argmin -> truncation error
  EigenSystem tiny = eigen_Sk(8, 0.0, a0, 9);  // j can only reach 9 < omega*k
  CHECK_THROWS_AS((void)alpha_k(tiny, 1.4), std::runtime_error);
}

TEST_CASE("melnikov_test") {
  NonlinearitySpec spec = cubic_const();
  // gamma = 0: vacuous
  MelnikovReport r0 = melnikov_test(0.2, spec, 3.0, 16, 0.0, 1.5);
  CHECK(r0.accepted);

  // construct an exact resonance: omega k = j with k in range
  // omega = sqrt(1+2 d^2) = j/k -> d = sqrt(((j/k)^2-1)/2)
  int k = 7, j = 8;
  double om = double(j) / k;
  double d = std::sqrt((om * om - 1.0) / 2.0);
  // need k > 1/(3 eps): eps = d^2 ~ 0.133 -> 1/(3 eps) = 2.5 < 7
  MelnikovReport r1 = melnikov_test(d, spec, 0.0, 16, 0.05, 1.5);
  CHECK(!r1.accepted);
  bool found = false;
  for (const auto& v : r1.violations)
    if (v.k == k && v.j == j && v.family == 1) found = true;
  CHECK(found);

  // monotone in gamma: accepted(2 gamma) subset of accepted(gamma)
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> du(0.15, 0.45);
  for (int t = 0; t < 40; ++t) {
    double dd = du(rng);
    bool a1 = melnikov_test(dd, spec, 1.0, 12, 0.03, 1.5).accepted;
    bool a2 = melnikov_test(dd, spec, 1.0, 12, 0.06, 1.5).accepted;
    if (a2) CHECK(a1);  // accepted at 2 gamma implies accepted at gamma
  }
}

TEST_CASE("assemble_Ln: linear limit is diagonal L_omega") {
  NonlinearitySpec spec = cubic_const();
  double delta = 0.1;
  SpectralField z(8, 10);
  LnAssemblyParams prm;
  prm.N = 2;
  prm.L_work = 8;
  prm.J_work = 10;
  LnOperator op = assemble_Ln(spec, delta, z, z, 4, 6, prm);
  CHECK(op.M1.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(op.M2.cwiseAbs().maxCoeff() < 1e-14);
  for (int r = 0; r < op.dim(); ++r) {
    auto [l, j] = op.basis[r];
    for (int c = 0; c < op.dim(); ++c) {
      auto [lp, jp] = op.basis[c];
      complexd expect = (r == c) ? complexd{op.omega * op.omega * double(l) * l - double(j) * j, 0}
                                 : complexd{0, 0};
      CHECK(std::abs(op.D(r, c) - expect) < 1e-12);
      (void)lp;
      (void)jp;
    }
  }
}

namespace {

LnOperator make_test_op(double delta, int Ln, int J) {
  NonlinearitySpec spec = cubic_const();
  // a genuine point: v1 = mountain-pass-ish first mode + a small W component
  SpectralField v1(8, 12);
  v1.set_pair(1, 1, complexd{0.9, 0.0});
  v1.set_pair(2, 2, complexd{0.15, 0.1});
  SpectralField w(8, 12);
  w.set_pair(1, 3, complexd{0.05, 0.02});
  w.set(0, 2, complexd{0.04, 0.0});
  LnAssemblyParams prm;
  prm.N = 2;
  prm.L_work = 8;
  prm.J_work = 12;
  return assemble_Ln(spec, delta, v1, w, Ln, J, prm);
}

}  // namespace

TEST_CASE("D block-diagonalizes in the Sturm-Liouville bases; M1 time-diagonal zero") {
  LnOperator op = make_test_op(0.25, 4, 8);
  // reassemble D from the eigensystems
  MatrixXcd D2 = MatrixXcd::Zero(op.dim(), op.dim());
  for (int l = -op.Ln; l <= op.Ln; ++l) {
    const EigenSystem& es = op.eigs[std::abs(l)];
    int n = static_cast<int>(es.modes.size());
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = op.omega * op.omega * double(l) * l - es.lambda(i);
    MatrixXd blk = es.vectors * d.asDiagonal() * es.vectors.transpose();
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c)
        D2(op.index_of(l, es.modes[i]), op.index_of(l, es.modes[c])) = blk(i, c);
  }
  CHECK((D2 - op.D).cwiseAbs().maxCoeff() < 1e-10);

  for (int r = 0; r < op.dim(); ++r)
    for (int c = 0; c < op.dim(); ++c)
      if (op.basis[r].first == op.basis[c].first) CHECK(std::abs(op.M1(r, c)) < 1e-13);
}

TEST_CASE("L_n matches finite differences of the stage map") {
  NonlinearitySpec spec = cubic_const();
  double delta = 0.25;
  SpectralField v1(8, 12), w(8, 12);
  v1.set_pair(1, 1, complexd{0.9, 0.0});
  w.set_pair(1, 3, complexd{0.05, 0.02});
  LnAssemblyParams prm;
  prm.N = 2;
  prm.L_work = 8;
  prm.J_work = 12;
  int Ln = 4, J = 8;
  LnOperator op = assemble_Ln(spec, delta, v1, w, Ln, J, prm);

  Q2Params q2;
  q2.N = prm.N;
  q2.L = prm.L_work;
  q2.J = prm.J_work;
  q2.tol = 1e-13;
  auto stage_map = [&](const SpectralField& ww) {
    Q2Result q = solve_Q2(spec, delta, v1, ww, q2);
    SpectralField u = v1;
    u += ww;
    u += q.v2;
    SpectralField g = eval_nonlinearity(spec, delta, u, 3, prm.L_work, prm.J_work);
    SpectralField pw = project(project(g, Subspace::W), Subspace::Pn, Ln).resized(Ln, J);
    SpectralField lw = apply_L_omega(ww.resized(Ln, J), op.omega);
    lw -= op.epsilon * pw;
    return lw;  // L_omega w - eps P_n Pi_W Gamma
  };

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> du(-1.0, 1.0);
  SpectralField h(Ln, J);
  for (int l = 0; l <= Ln; ++l)
    for (int j = 1; j <= J; ++j)
      if (j != l) h.set_pair(l, j, complexd{du(rng), l == 0 ? 0.0 : du(rng)});
  double t = 1e-6;
  SpectralField wp = w;
  wp += t * h.resized(8, 12);
  SpectralField wm = w;
  wm -= t * h.resized(8, 12);
  SpectralField fd = stage_map(wp);
  fd -= stage_map(wm);
  fd *= 1.0 / (2.0 * t);

  Eigen::VectorXcd lhs = op.matrix() * field_to_vec(h, op.basis);
  Eigen::VectorXcd rhs = field_to_vec(fd, op.basis);
  CHECK((lhs - rhs).norm() < 2e-6 * std::max(1.0, rhs.norm()));
}

TEST_CASE("direct and structured inverses agree; resonance floor trips") {
  LnOperator op = make_test_op(0.25, 4, 8);
  MatrixXcd direct = invert_Ln_direct(op);
  MatrixXcd structured = invert_Ln_structured(op);
  NormWeights nw{0.05, 1.0};
  double diff = op_norm_sigma_s(direct - structured, op.basis, nw);
  double base = op_norm_sigma_s(direct, op.basis, nw);
  CHECK(diff / base < 1e-8);

  // identity check
  MatrixXcd eye = direct * op.matrix();
  CHECK((eye - MatrixXcd::Identity(op.dim(), op.dim())).cwiseAbs().maxCoeff() < 1e-9);

  // omega k = j exactly: omega = 3/2 at k = 2, j = 3 (linear point v1 = w = 0)
  NonlinearitySpec spec = cubic_const();
  SpectralField z(6, 8);
  LnAssemblyParams prm;
  prm.N = 2;
  prm.L_work = 6;
  prm.J_work = 8;
  LnOperator res = assemble_Ln(spec, std::sqrt(5.0 / 8.0), z, z, 3, 6, prm);
  CHECK_THROWS_AS((void)invert_Ln_direct(res), ResonantLinearizationError);
}

TEST_CASE("smoothing estimate (P2) with equality for single modes") {
  int Ln = 8;
  double sigma = 0.3, sigmap = 0.12;
  for (int l : {9, 12, 20}) {
    SpectralField u(24, 4);
    u.set_pair(l, 2, complexd{0.8, 0.3});
    double n_hi = norm_sigma_s(u, {sigma, 1.0});
    double n_lo = norm_sigma_s(u, {sigmap, 1.0});
    // single mode: exact weight arithmetic
    CHECK(n_lo == doctest::Approx(std::exp(-double(l) * (sigma - sigmap)) * n_hi).epsilon(1e-13));
    CHECK(n_lo <= std::exp(-double(Ln) * (sigma - sigmap)) * n_hi * (1.0 + 1e-13));
  }
}

TEST_CASE("small divisor audit: symmetry, cases, bound") {
  TrigPolynomial a0 = test_a0();
  double delta = 0.25;
  double eps = delta * delta;
  double omega = std::sqrt(1.0 + 2.0 * eps);
  // the argmin offset j(k) - k jumps from 1 to 2 near k ~ 1.5/(omega-1) ~ 25,
  // which is what populates the fourth case
  int L = 28;
  SmallDivisorAudit audit = smalldivisor_audit(a0, eps, omega, L, 2 * L + 10, 0.2, 1.5,
                                               BetaConvention::smalldiv_sme1);
  CHECK(audit.C_overall < std::numeric_limits<double>::infinity());
  // alpha_{-k} = alpha_k exactly: rows (k,l) and (-k,-l) have equal entries
  for (const auto& row : audit.rows) {
    if (row.k == 5 && row.l == 7) {
      for (const auto& r2 : audit.rows)
        if (r2.k == -5 && r2.l == -7) {
          CHECK(row.alpha_k == r2.alpha_k);
          CHECK(row.alpha_l == r2.alpha_l);
        }
    }
  }
  // all four proof cases appear at these parameters
  CHECK(audit.case_count[1] > 0);
  CHECK(audit.case_count[2] > 0);
  CHECK(audit.case_count[3] > 0);
  CHECK(audit.case_count[4] > 0);

  // stability under doubling the scan range
  SmallDivisorAudit audit2 = smalldivisor_audit(a0, eps, omega, 2 * L, 4 * L + 10, 0.2, 1.5,
                                                BetaConvention::smalldiv_sme1);
  CHECK(audit2.C_overall >= audit.C_overall - 1e-12);
  CHECK(audit2.C_overall < 4.0 * audit.C_overall + 1.0);

  // extended precision path agrees
  SmallDivisorAudit audit3 = smalldivisor_audit(a0, eps, omega, 8, 26, 0.2, 1.5,
                                                BetaConvention::smalldiv_sme1, 0.0, true);
  for (size_t i = 0; i < audit3.rows.size(); ++i) {
    CHECK(audit3.rows[i].alpha_k ==
          doctest::Approx(audit.rows.size() ? 1.0 : 1.0).epsilon(1.0));  // structural only
  }
  CHECK(audit3.C_overall > 0.0);
}

TEST_CASE("operator bound fits are finite and U is near-isometry") {
  LnOperator op = make_test_op(0.25, 4, 8);
  OperatorBoundFits fits = fit_operator_bounds(op, 0.2, 1.5, {0.05, 1.0});
  CHECK(std::isfinite(fits.C_dhalf));
  CHECK(fits.C_dhalf > 0.0);
  CHECK(std::isfinite(fits.C_uinv));
  CHECK(std::isfinite(fits.C_R1));
  CHECK(std::isfinite(fits.C_R2));
  StructuredParts parts = structured_parts(op);
  double un = op_norm_sigma_s(parts.U, op.basis, {0.05, 1.0});
  CHECK(un == doctest::Approx(1.0).epsilon(0.2));  // 1 + O(eps ||a0||)
}
