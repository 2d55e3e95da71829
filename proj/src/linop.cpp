#include "resowave/linop.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <map>

namespace resowave {

namespace {

Eigen::MatrixXd sk_matrix(int k, double epsilon, const TrigPolynomial& a0, int J,
                          std::vector<int>* modes_out) {
  int ak = std::abs(k);
  std::vector<int> modes;
  for (int j = 1; j <= J; ++j)
    if (j != ak) modes.push_back(j);
  Eigen::MatrixXd G = sine_mult_matrix(a0, J);
  int n = static_cast<int>(modes.size());
  Eigen::MatrixXd S(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      S(r, c) = (modes[r] == modes[c] ? double(modes[r]) * modes[r] : 0.0) +
                epsilon * G(modes[r] - 1, modes[c] - 1);
  if (modes_out) *modes_out = std::move(modes);
  return S;
}

// exact H1(0,pi) norm of a trigonometric profile via full-circle sampling
double profile_h1(const XTrig& prof) {
  int deg = std::max(prof.degree(), 1);
  int N = TensorGrid::good_size(4 * deg + 8);
  Eigen::FFT<double> fft;
  auto half_integral = [&](const std::vector<double>& samples) {
    std::vector<complexd> in(N), out(N);
    for (int i = 0; i < N; ++i) in[i] = samples[i];
    fft.fwd(out, in);
    XTrig p;
    p.c0 = out[0] / double(N);
    int Mx = N / 2 - 1;
    p.cosc.resize(Mx);
    p.sinc.resize(Mx);
    for (int m = 1; m <= Mx; ++m) {
      complexd fp = out[m] / double(N), fm = out[N - m] / double(N);
      p.cosc[m - 1] = fp + fm;
      p.sinc[m - 1] = complexd{0.0, 1.0} * (fp - fm);
    }
    return p.integral_0_pi().real();
  };
  std::vector<double> f2(N), df2(N);
  for (int i = 0; i < N; ++i) {
    double x = 2.0 * kPi * i / N;
    complexd f = prof.eval(x);
    complexd df{0.0, 0.0};
    for (size_t m = 0; m < prof.cosc.size(); ++m)
      df -= prof.cosc[m] * double(m + 1) * std::sin((m + 1) * x);
    for (size_t m = 0; m < prof.sinc.size(); ++m)
      df += prof.sinc[m] * double(m + 1) * std::cos((m + 1) * x);
    f2[i] = std::norm(f);
    df2[i] = std::norm(df);
  }
  return std::sqrt(half_integral(f2) + half_integral(df2));
}

XTrig to_xtrig(const TrigPolynomial& a) {
  XTrig p;
  p.c0 = a.c0;
  p.cosc.assign(a.cos_coeffs.begin(), a.cos_coeffs.end());
  p.sinc.assign(a.sin_coeffs.begin(), a.sin_coeffs.end());
  return p;
}

}  // namespace

int EigenSystem::index_of(int j) const {
  int ak = std::abs(k);
  if (j < 1 || j == ak || j > (modes.empty() ? 0 : modes.back()))
    throw std::out_of_range("EigenSystem::index_of");
  return (ak >= 1 && j > ak && ak <= modes.back()) ? j - 2 : j - 1;
}

EigenSystem eigen_Sk(int k, double epsilon, const TrigPolynomial& a0, int J) {
  if (std::abs(epsilon) * a0.max_abs() >= 1.0)
    throw std::invalid_argument("eigen_Sk: |eps| |a0|_inf >= 1, <.,.>_eps not a scalar product");
  EigenSystem es;
  es.k = k;
  es.epsilon = epsilon;
  Eigen::MatrixXd S = sk_matrix(k, epsilon, a0, J, &es.modes);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  es.lambda = solver.eigenvalues();
  es.vectors = solver.eigenvectors();
  return es;
}

std::vector<long double> eigen_Sk_lambda_ext(int k, double epsilon, const TrigPolynomial& a0,
                                             int J) {
  Eigen::MatrixXd S = sk_matrix(k, epsilon, a0, J, nullptr);
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  MatL SL = S.cast<long double>();
  Eigen::SelfAdjointEigenSolver<MatL> solver(SL);
  std::vector<long double> out(solver.eigenvalues().size());
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    out[i] = solver.eigenvalues()(i);
  return out;
}

AlphaResult alpha_k(const EigenSystem& eigs, double omega) {
  double target = omega * omega * double(eigs.k) * eigs.k;
  double best = std::numeric_limits<double>::infinity();
  int besti = -1;
  for (Eigen::Index i = 0; i < eigs.lambda.size(); ++i) {
    double d = std::abs(target - eigs.lambda(i));
    if (d < best) {
      best = d;
      besti = static_cast<int>(i);
    }
  }
  if (besti == static_cast<int>(eigs.lambda.size()) - 1)
    throw std::runtime_error("alpha_k: truncation too small, argmin at the boundary j = J");
  return {best, eigs.modes[besti]};
}

MelnikovReport melnikov_test(double delta, const NonlinearitySpec& spec, double M_value, int Ln,
                             double gamma, double tau) {
  MelnikovReport rep;
  rep.gamma = gamma;
  rep.tau = tau;
  rep.Ln = Ln;
  rep.delta = delta;
  rep.epsilon = spec.epsilon(delta);
  rep.omega = spec.omega(delta);
  rep.M_value = M_value;
  double eps = rep.epsilon;
  if (eps == 0.0) return rep;  // empty index range
  int kmin = static_cast<int>(std::floor(1.0 / (3.0 * std::abs(eps)))) + 1;
  for (int k = kmin; k <= Ln; ++k) {
    for (int j = 1; j <= 2 * Ln; ++j) {
      if (j == k) continue;
      double thr = gamma / std::pow(double(k + j), tau);
      double m1 = std::abs(rep.omega * k - j) - thr;
      if (m1 < 0.0) rep.violations.push_back({k, j, 1, m1});
      double m2 = std::abs(rep.omega * k - j - eps * M_value / (2.0 * j)) - thr;
      if (m2 < 0.0) rep.violations.push_back({k, j, 2, m2});
    }
  }
  rep.accepted = rep.violations.empty();
  return rep;
}

int LnOperator::index_of(int l, int j) const {
  int al = std::abs(l);
  int per_l_before = 0;
  // basis is enumerated l = -Ln..Ln outer, j = 1..J inner (skipping j = |l|)
  for (int ll = -Ln; ll < l; ++ll) per_l_before += (std::abs(ll) >= 1 && std::abs(ll) <= J) ? J - 1 : J;
  int off = j - 1;
  if (al >= 1 && al <= J && j > al) --off;
  return per_l_before + off;
}

LnOperator assemble_Ln(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                       const SpectralField& w, int Ln, int J, const LnAssemblyParams& prm) {
  LnOperator op;
  op.Ln = Ln;
  op.J = J;
  op.delta = delta;
  op.epsilon = spec.epsilon(delta);
  op.omega = spec.omega(delta);

  int Lw = std::max({prm.L_work, Ln, v1.L(), w.L()});
  int Jw = std::max({prm.J_work, J});
  Q2Params q2;
  q2.N = prm.N;
  q2.L = Lw;
  q2.J = Jw;
  q2.tol = prm.q2_tol;
  q2.oversample = prm.oversample;
  Q2Result q = solve_Q2(spec, delta, v1.resized(Lw, Jw), w.resized(Lw, Jw), q2);
  SpectralField u = v1.resized(Lw, Jw);
  u += w.resized(Lw, Jw);
  u += q.v2;
  Fourier2D A = nonlinearity_derivative_table(spec, delta, u, prm.oversample);
  op.a0 = A.time_average();
  op.M_value = A.integral_Omega() / (2.0 * kPi * kPi);

  for (int l = -Ln; l <= Ln; ++l)
    for (int j = 1; j <= J; ++j)
      if (j != std::abs(l)) op.basis.emplace_back(l, j);
  int dim = op.dim();

  op.eigs.reserve(Ln + 1);
  for (int k = 0; k <= Ln; ++k) op.eigs.push_back(eigen_Sk(k, op.epsilon, op.a0, J));

  // per-time-frequency profiles of a, as exact half-circle cosine integrals
  int qmax = 2 * std::max({J, Jw, Lw}) + 2;
  int mrange = Ln + std::min(Lw, A.Lt);
  std::map<int, std::vector<complexd>> Cq;  // m -> C_q array
  auto profile_C = [&](int m) -> const std::vector<complexd>* {
    if (std::abs(m) > A.Lt) return nullptr;
    auto it = Cq.find(m);
    if (it != Cq.end()) return &it->second;
    XTrig prof = A.x_profile(m);
    std::vector<complexd> C(qmax + 1);
    for (int qi = 0; qi <= qmax; ++qi) C[qi] = prof.integral_cos(qi);
    return &Cq.emplace(m, std::move(C)).first->second;
  };
  (void)mrange;
  auto mult_entry = [&](int m, int j, int jp) -> complexd {
    const auto* C = profile_C(m);
    if (!C) return {0.0, 0.0};
    return ((*C)[std::abs(j - jp)] - (*C)[j + jp]) / kPi;
  };

  // D = L_omega - eps a0 multiplication, block diagonal in l
  Eigen::MatrixXd G = sine_mult_matrix(op.a0, J);
  op.D = Eigen::MatrixXcd::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    auto [l, j] = op.basis[r];
    for (int c = 0; c < dim; ++c) {
      auto [lp, jp] = op.basis[c];
      if (l != lp) continue;
      double v = -op.epsilon * G(j - 1, jp - 1);
      if (j == jp) v += op.omega * op.omega * double(l) * l - double(j) * j;
      op.D(r, c) = v;
    }
  }

  // M1: Toeplitz in the time index, zero time-diagonal
  op.M1 = Eigen::MatrixXcd::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    auto [l, j] = op.basis[r];
    for (int c = 0; c < dim; ++c) {
      auto [lp, jp] = op.basis[c];
      if (l == lp) continue;
      op.M1(r, c) = op.epsilon * mult_entry(l - lp, j, jp);
    }
  }

  // M2 through the linearized slaved component: dv2/dw = (I - A_V2)^{-1} T
  std::vector<int> v2modes;
  for (int m = -std::min(Lw, Jw); m <= std::min(Lw, Jw); ++m)
    if (std::abs(m) > prm.N) v2modes.push_back(m);
  int nv = static_cast<int>(v2modes.size());
  Eigen::MatrixXcd Av2(nv, nv), T(nv, dim), MWV(dim, nv);
  for (int r = 0; r < nv; ++r) {
    int m = v2modes[r];
    double invlap = 1.0 / (2.0 * double(m) * m);
    for (int c = 0; c < nv; ++c)
      Av2(r, c) = invlap * mult_entry(m - v2modes[c], std::abs(m), std::abs(v2modes[c]));
    for (int c = 0; c < dim; ++c) {
      auto [lp, jp] = op.basis[c];
      T(r, c) = invlap * mult_entry(m - lp, std::abs(m), jp);
    }
  }
  for (int r = 0; r < dim; ++r) {
    auto [l, j] = op.basis[r];
    for (int c = 0; c < nv; ++c) MWV(r, c) = mult_entry(l - v2modes[c], j, std::abs(v2modes[c]));
  }
  Eigen::MatrixXcd Z =
      (Eigen::MatrixXcd::Identity(nv, nv) - Av2).partialPivLu().solve(T);
  op.M2 = op.epsilon * (MWV * Z);
  return op;
}

namespace {

void check_divisors(const LnOperator& op, double floor_rel) {
  for (int k = 0; k <= op.Ln; ++k) {
    const EigenSystem& es = op.eigs[k];
    double t = op.omega * op.omega * double(k) * k;
    for (Eigen::Index i = 0; i < es.lambda.size(); ++i) {
      double d = std::abs(t - es.lambda(i));
      if (d < floor_rel * std::max(1.0, t))
        throw ResonantLinearizationError(
            "resonant linearization: |omega^2 k^2 - lambda| below floor at (k=" +
                std::to_string(k) + ", j=" + std::to_string(es.modes[i]) + ")",
            k, es.modes[i], t - es.lambda(i));
    }
  }
}

}  // namespace

Eigen::MatrixXcd invert_Ln_direct(const LnOperator& op, double floor_rel) {
  check_divisors(op, floor_rel);
  int dim = op.dim();
  return op.matrix().partialPivLu().solve(Eigen::MatrixXcd::Identity(dim, dim));
}

StructuredParts structured_parts(const LnOperator& op, double floor_rel) {
  check_divisors(op, floor_rel);
  int dim = op.dim();
  StructuredParts parts;
  parts.Dhalf_inv = Eigen::MatrixXcd::Zero(dim, dim);
  parts.U = Eigen::MatrixXcd::Zero(dim, dim);
  for (int l = -op.Ln; l <= op.Ln; ++l) {
    const EigenSystem& es = op.eigs[std::abs(l)];
    int n = static_cast<int>(es.modes.size());
    Eigen::VectorXd dinv(n), sgn(n);
    double t = op.omega * op.omega * double(l) * l;
    for (int i = 0; i < n; ++i) {
      double d = t - es.lambda(i);
      dinv(i) = 1.0 / std::sqrt(std::abs(d));
      sgn(i) = d >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::MatrixXd Bd = es.vectors * dinv.asDiagonal() * es.vectors.transpose();
    Eigen::MatrixXd Bu = es.vectors * sgn.asDiagonal() * es.vectors.transpose();
    for (int i = 0; i < n; ++i) {
      int r = op.index_of(l, es.modes[i]);
      for (int c = 0; c < n; ++c) {
        parts.Dhalf_inv(r, op.index_of(l, es.modes[c])) = Bd(i, c);
        parts.U(r, op.index_of(l, es.modes[c])) = Bu(i, c);
      }
    }
  }
  parts.R1 = parts.Dhalf_inv * op.M1 * parts.Dhalf_inv;
  parts.R2 = parts.Dhalf_inv * op.M2 * parts.Dhalf_inv;
  return parts;
}

Eigen::MatrixXcd invert_Ln_structured(const LnOperator& op, double floor_rel,
                                      double series_tol) {
  StructuredParts parts = structured_parts(op, floor_rel);
  int dim = op.dim();
  // (U - R)^{-1} = sum_k (U^{-1} R)^k U^{-1}, with U^{-1} = U
  Eigen::MatrixXcd R = parts.R1 + parts.R2;
  Eigen::MatrixXcd K = parts.U * R;
  Eigen::MatrixXcd term = parts.U;
  Eigen::MatrixXcd X = term;
  double x0 = term.cwiseAbs().maxCoeff();
  bool converged = false;
  for (int it = 0; it < 300; ++it) {
    term = K * term;
    X += term;
    double tn = term.cwiseAbs().maxCoeff();
    if (tn < series_tol * x0) {
      converged = true;
      break;
    }
    if (tn > 1e6 * x0)
      throw std::runtime_error("structured inversion: Neumann series diverging (||U^{-1}R|| >= 1)");
  }
  if (!converged)
    throw std::runtime_error("structured inversion: Neumann series did not converge");
  (void)dim;
  return parts.Dhalf_inv * X * parts.Dhalf_inv;
}

namespace {

Eigen::VectorXd basis_weights(std::span<const std::pair<int, int>> basis, double sigma,
                              double s) {
  Eigen::VectorXd w(basis.size());
  for (size_t i = 0; i < basis.size(); ++i) {
    auto [l, j] = basis[i];
    double lw = (l == 0) ? (s == 0.0 ? 1.0 : 0.0) : std::pow(std::abs(l), 2.0 * s);
    w(i) = std::exp(sigma * std::abs(l)) * std::sqrt(lw + 1.0) * std::sqrt(kPi / 2.0) * j;
  }
  return w;
}

double spectral_norm(const Eigen::MatrixXcd& B) {
  int n = static_cast<int>(B.cols());
  if (n == 0) return 0.0;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v(i) = complexd{1.0 + 0.3 * std::cos(1.7 * i), 0.2 * std::sin(2.3 * i + 0.4)};
  v.normalize();
  Eigen::MatrixXcd Bh = B.adjoint();
  double prev = 0.0;
  for (int it = 0; it < 600; ++it) {
    Eigen::VectorXcd w = Bh * (B * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    double sigma = std::sqrt(nw);
    if (it > 8 && std::abs(sigma - prev) <= 1e-12 * std::max(1.0, sigma)) return sigma;
    prev = sigma;
  }
  return prev;
}

}  // namespace

double op_norm_sigma_s(const Eigen::MatrixXcd& A, std::span<const std::pair<int, int>> basis,
                       NormWeights w) {
  return op_norm_sigma_s(A, basis, w.sigma, w.s, w.s);
}

double op_norm_sigma_s(const Eigen::MatrixXcd& A, std::span<const std::pair<int, int>> basis,
                       double sigma, double s_out, double s_in) {
  Eigen::VectorXd wo = basis_weights(basis, sigma, s_out);
  Eigen::VectorXd wi = basis_weights(basis, sigma, s_in);
  Eigen::MatrixXcd B = wo.asDiagonal() * A * wi.cwiseInverse().asDiagonal();
  return spectral_norm(B);
}

Eigen::VectorXcd field_to_vec(const SpectralField& u,
                              std::span<const std::pair<int, int>> basis) {
  Eigen::VectorXcd v(basis.size());
  for (size_t i = 0; i < basis.size(); ++i) {
    auto [l, j] = basis[i];
    v(i) = (std::abs(l) <= u.L() && j <= u.J()) ? u.at(l, j) : complexd{0.0, 0.0};
  }
  return v;
}

SpectralField vec_to_field(const Eigen::VectorXcd& v,
                           std::span<const std::pair<int, int>> basis, int L, int J) {
  SpectralField u(L, J);
  for (size_t i = 0; i < basis.size(); ++i) {
    auto [l, j] = basis[i];
    u.set(l, j, v(i));
  }
  return u;
}

SmallDivisorAudit smalldivisor_audit(const TrigPolynomial& a0, double epsilon, double omega,
                                     int L, int Jext, double gamma, double tau,
                                     BetaConvention conv, double c_ref,
                                     bool extended_precision) {
  SmallDivisorAudit audit;
  audit.gamma = gamma;
  audit.tau = tau;
  audit.epsilon = epsilon;
  audit.convention = conv;
  audit.beta = beta_value(conv, tau);

  std::vector<double> alpha(L + 1);
  std::vector<int> argj(L + 1);
  for (int k = 0; k <= L; ++k) {
    EigenSystem es = eigen_Sk(k, epsilon, a0, Jext);
    if (extended_precision) {
      std::vector<long double> lam = eigen_Sk_lambda_ext(k, epsilon, a0, Jext);
      long double t = static_cast<long double>(omega) * omega * k * k;
      long double best = std::numeric_limits<long double>::infinity();
      int besti = -1;
      for (size_t i = 0; i < lam.size(); ++i) {
        long double d = std::abs(t - lam[i]);
        if (d < best) {
          best = d;
          besti = static_cast<int>(i);
        }
      }
      alpha[k] = static_cast<double>(best);
      argj[k] = es.modes[besti];
    } else {
      AlphaResult a = alpha_k(es, omega);
      alpha[k] = a.value;
      argj[k] = a.argmin_j;
    }
  }

  double kcut = std::abs(epsilon) > 0 ? 1.0 / (3.0 * std::abs(epsilon))
                                      : std::numeric_limits<double>::infinity();
  double expo = 2.0 * (tau - 1.0) / audit.beta;
  for (int k = -L; k <= L; ++k) {
    for (int l = -L; l <= L; ++l) {
      if (k == l) continue;
      double ak = alpha[std::abs(k)], al = alpha[std::abs(l)];
      double bound = std::pow(double(std::abs(k - l)), expo) /
                     (gamma * gamma * std::pow(std::abs(epsilon), tau - 1.0));
      double inv = (ak > 0 && al > 0) ? 1.0 / (ak * al)
                                      : std::numeric_limits<double>::infinity();
      double ratio = inv / bound;
      int mx = std::max(std::abs(k), std::abs(l));
      int case_id;
      if (std::abs(k - l) >= std::pow(double(mx), audit.beta)) {
        case_id = 1;
      } else if (std::abs(k) <= kcut || std::abs(l) <= kcut) {
        case_id = 2;
      } else {
        int jk = argj[std::abs(k)], il = argj[std::abs(l)];
        case_id = (std::abs(k - l) == std::abs(jk - il)) ? 3 : 4;
      }
      SmallDivisorRow row{k, l, ak, al, bound, ratio, case_id};
      audit.rows.push_back(row);
      audit.C_overall = std::max(audit.C_overall, ratio);
      audit.C_case[case_id] = std::max(audit.C_case[case_id], ratio);
      audit.case_count[case_id]++;
      if (c_ref > 0.0 && ratio > c_ref) audit.violations.push_back(row);
    }
  }
  return audit;
}

OperatorBoundFits fit_operator_bounds(const LnOperator& op, double gamma, double tau,
                                      NormWeights base) {
  StructuredParts parts = structured_parts(op);
  OperatorBoundFits fits;
  double kappa = 0.5 * (tau - 1.0);
  fits.a0_h1 = profile_h1(to_xtrig(op.a0));
  fits.C_dhalf =
      op_norm_sigma_s(parts.Dhalf_inv, op.basis, base.sigma, base.s, base.s + kappa) *
      std::sqrt(gamma);
  double unorm = op_norm_sigma_s(parts.U, op.basis, base.sigma, base.s, base.s);
  fits.C_uinv = (unorm - 1.0) / std::max(std::abs(op.epsilon) * fits.a0_h1, 1e-300);
  double s1 = base.s + kappa;
  fits.C_R1 = op_norm_sigma_s(parts.R1, op.basis, base.sigma, s1, s1) * gamma /
              std::pow(std::abs(op.epsilon), 0.5 * (3.0 - tau));
  fits.C_R2 = op_norm_sigma_s(parts.R2, op.basis, base.sigma, s1, s1) * gamma /
              std::abs(op.epsilon);
  return fits;
}

}  // namespace resowave
