#include "resowave/bifurcation.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace resowave {

namespace {

const double kSqrtPi = std::sqrt(kPi);

TrigPolynomial effective_ap(const NonlinearitySpec& spec) {
  TrigPolynomial a = spec.terms.at(spec.p);
  a *= double(spec.s_star);
  return a;
}

double h1_norm2(const SpectralField& u) {
  double acc = 0.0;
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j)
      acc += (double(l) * l + double(j) * j) * std::norm(u.at(l, j));
  return kPi * kPi * acc;
}

int v_max_freq(const SpectralField& v) {
  int mf = 0;
  for (int l = 1; l <= v.L(); ++l)
    if (l <= v.J() && v.at(l, l) != complexd{0.0, 0.0}) mf = l;
  return mf;
}

// multiply h by du g(delta, x, u) pointwise and project back to (L, J)
SpectralField apply_dg(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                       const SpectralField& h, int L, int J, int oversample) {
  int K = spec.max_power();
  auto [nt, nx] = grid_sizes((K - 1) * u.L() + h.L(), (K - 1) * u.J() + h.J() + spec.max_x_degree(),
                             oversample);
  TensorGrid grid(nt, nx);
  Eigen::MatrixXd uv = grid.synth(u);
  Eigen::MatrixXd hv = grid.synth(h);
  std::vector<double> avals(spec.terms.size());
  Eigen::MatrixXd out(nt, nx);
  for (int i = 0; i < nx; ++i) {
    size_t k = 0;
    for (const auto& [kk, a] : spec.terms) avals[k++] = a.eval(grid.x(i));
    for (int n = 0; n < nt; ++n) out(n, i) = spec.eval_dg(delta, avals, uv(n, i)) * hv(n, i);
  }
  return grid.analyze_sine(out, L, J);
}

}  // namespace

// ---------------------------------------------------------------------------
// loops

double LoopFunction::eval(double t) const {
  double v = 0.0;
  for (size_t m = 0; m < a.size(); ++m) v += a[m] * std::cos((m + 1) * t);
  for (size_t m = 0; m < b.size(); ++m) v += b[m] * std::sin((m + 1) * t);
  return v;
}

double LoopFunction::norm_L2() const {
  double s = 0.0;
  for (double v : a) s += v * v;
  for (double v : b) s += v * v;
  return std::sqrt(kPi * s);
}

SpectralField loop_to_V(const LoopFunction& eta, int L, int J) {
  int M = eta.M();
  if (L < 0) L = std::max(1, M);
  if (J < 0) J = std::max(1, M);
  if (L < M || J < M) throw std::invalid_argument("loop_to_V: truncation below loop frequency");
  SpectralField v(L, J);
  for (int m = 1; m <= M; ++m)
    v.set_pair(m, m, complexd{eta.coeff_b(m), eta.coeff_a(m)});
  return v;
}

LoopFunction loop_from_V(const SpectralField& v) {
  LoopFunction eta;
  int M = std::min(v.L(), v.J());
  eta.a.assign(M, 0.0);
  eta.b.assign(M, 0.0);
  for (int m = 1; m <= M; ++m) {
    eta.a[m - 1] = v.at(m, m).imag();
    eta.b[m - 1] = v.at(m, m).real();
  }
  return eta;
}

SpectralField embed_Hn(const SpectralField& v, int n, int Lout, int Jout) {
  if (n < 1) throw std::invalid_argument("embed_Hn: n must be >= 1");
  if (!project(v, Subspace::W).is_zero())
    throw NotInSubspaceError("embed_Hn: input not in V");
  int mf = v_max_freq(v);
  if (Lout < 0) Lout = std::max(1, n * mf);
  if (Jout < 0) Jout = std::max(1, n * mf);
  if (n * mf > Lout || n * mf > Jout)
    throw std::invalid_argument("embed_Hn: frequency overflow, required L >= " +
                                std::to_string(n * mf));
  SpectralField r(Lout, Jout);
  for (int l = 1; l <= std::min(v.L(), v.J()); ++l) {
    complexd c = v.at(l, l);
    if (c != complexd{0.0, 0.0}) r.set_pair(n * l, n * l, c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Phi0 and (Q2)

Phi0Result phi0(const SpectralField& v, const NonlinearitySpec& spec, int oversample) {
  if (!project(v, Subspace::W).is_zero())
    throw NotInSubspaceError("phi0: input not in V");
  TrigPolynomial ap = effective_ap(spec);
  int p = spec.p;
  double val = 0.5 * h1_norm2(v) - integrate_a_power(ap, v, p + 1, oversample) / (p + 1);

  SpectralField grad(v.L(), v.J());
  for (int l = -v.L(); l <= v.L(); ++l) {
    int j = std::abs(l);
    if (l != 0 && j <= v.J()) grad.set(l, j, 2.0 * double(l) * l * v.at(l, j));
  }
  std::pair<const SpectralField*, int> fac[] = {{&v, p}};
  grad -= project(galerkin_product(ap, fac, v.L(), v.J(), oversample), Subspace::V);

  SpectralField vc = v;
  auto action = [vc, ap, p, oversample](const SpectralField& h) {
    SpectralField out(h.L(), h.J());
    for (int l = -h.L(); l <= h.L(); ++l) {
      int j = std::abs(l);
      if (l != 0 && j <= h.J()) out.set(l, j, 2.0 * double(l) * l * h.at(l, j));
    }
    TrigPolynomial pap = ap;
    pap *= double(p);
    std::pair<const SpectralField*, int> fac2[] = {{&vc, p - 1}, {&h, 1}};
    out -= project(galerkin_product(pap, fac2, h.L(), h.J(), oversample), Subspace::V);
    return out;
  };
  return {val, std::move(grad), action};
}

Q2Result solve_Q2(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                  const SpectralField& w, const Q2Params& q2, const SpectralField* start) {
  SpectralField base = v1.resized(q2.L, q2.J);
  base += w;
  SpectralField v2 = start ? start->resized(q2.L, q2.J) : SpectralField(q2.L, q2.J);
  double prev_diff = -1.0, rate = 0.0;
  int bad = 0;
  for (int it = 1; it <= q2.max_iter; ++it) {
    SpectralField u = base;
    u += v2;
    SpectralField g = eval_nonlinearity(spec, delta, u, q2.oversample, q2.L, q2.J);
    SpectralField next = inv_laplacian_V(project(g, Subspace::V2, q2.N));
    SpectralField d = next;
    d -= v2;
    double diff = norm_sigma_s(d, q2.norm);
    v2 = next;
    if (prev_diff > 0.0) {
      double r = diff / prev_diff;
      rate = std::max(rate, r);
      bad = (r >= 1.0) ? bad + 1 : 0;
      if (bad >= 3)
        throw Q2ContractionError(
            "(Q2) contraction failed (rate " + std::to_string(r) +
                " >= 1): smallness condition violated (N too small, ||w|| > 1 or delta too large)",
            r);
    }
    if (diff <= q2.tol * std::max(1.0, norm_sigma_s(v2, q2.norm)))
      return {std::move(v2), rate, it};
    prev_diff = diff;
  }
  throw Q2ContractionError("(Q2) iteration did not converge within max_iter", rate);
}

SpectralField dv2_direction(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                            const SpectralField& h, const Q2Params& q2) {
  SpectralField z(q2.L, q2.J);
  SpectralField hh = h.resized(q2.L, q2.J);
  double prev = -1.0;
  for (int it = 0; it < q2.max_iter; ++it) {
    SpectralField rhs = hh;
    rhs += z;
    SpectralField nz =
        inv_laplacian_V(project(apply_dg(spec, delta, u, rhs, q2.L, q2.J, q2.oversample),
                                Subspace::V2, q2.N));
    SpectralField d = nz;
    d -= z;
    double diff = norm_sigma_s(d, q2.norm);
    z = nz;
    if (diff <= q2.tol * std::max(1.0, norm_sigma_s(z, q2.norm))) return z;
    if (prev > 0.0 && diff > prev && diff > 1e3)
      throw Q2ContractionError("linearized (Q2) solve diverged", diff / prev);
    prev = diff;
  }
  throw Q2ContractionError("linearized (Q2) solve did not converge", 1.0);
}

Psi0Result reduced_psi0(const SpectralField& v1, const NonlinearitySpec& spec,
                        const Q2Params& q2) {
  Q2Result q = solve_Q2(spec, 0.0, v1, SpectralField(q2.L, q2.J), q2);
  SpectralField v = v1.resized(q2.L, q2.J);
  v += q.v2;
  Phi0Result f = phi0(v, spec, q2.oversample);
  // (0Q1): the dv2 term drops out by the tangency of the slaved component
  SpectralField grad(q2.L, q2.J);
  for (int l = -q2.N; l <= q2.N; ++l) {
    int j = std::abs(l);
    if (l != 0 && j <= q2.J) grad.set(l, j, 2.0 * double(l) * l * v1.at(l, j));
  }
  TrigPolynomial ap = effective_ap(spec);
  std::pair<const SpectralField*, int> fac[] = {{&v, spec.p}};
  grad -= project(galerkin_product(ap, fac, q2.L, q2.J, q2.oversample), Subspace::V1, q2.N);
  return {f.value, std::move(grad), std::move(q.v2)};
}

// ---------------------------------------------------------------------------
// circle search

namespace {

struct RayMax {
  double t;
  double value;
  bool ok;
};

RayMax nehari_scale(const CircleProblem& prob, const Eigen::VectorXd& x) {
  auto phi = [&](double t) { return prob.value(t * x); };
  double t = 1.0, ft = phi(t);
  // walk to an initial ascent
  int guard = 0;
  while (phi(t * 2.0) > ft && guard++ < 60) {
    t *= 2.0;
    ft = phi(t);
  }
  if (guard >= 60) return {t, ft, false};  // ray maximum escapes
  double lo = t / 4.0, hi = t * 2.0;
  // golden section maximization
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = phi(c), fd = phi(d);
  for (int it = 0; it < 120; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = phi(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = phi(d);
    }
  }
  double tm = 0.5 * (lo + hi);
  return {tm, phi(tm), true};
}

struct SeedOutcome {
  bool converged = false;
  bool degenerate = false;
  CriticalCircle circle;
};

SeedOutcome run_seed(const CircleProblem& prob, Eigen::VectorXd x,
                     const CircleSearchParams& p, int seed_index) {
  SeedOutcome out;
  if (x.norm() == 0.0) return out;
  RayMax rm = nehari_scale(prob, x);
  if (!rm.ok || rm.value <= 0.0) return out;
  x *= rm.t;

  // descent constrained to the Nehari-type manifold (ray maxima), where the
  // mountain-pass circle is a minimizer
  double fx = prob.value(x);
  double alpha = 1.0;
  for (int it = 0; it < p.max_descent; ++it) {
    Eigen::VectorXd g = prob.gradient(x);
    if (g.norm() <= p.descent_grad_tol * std::max(1.0, std::abs(fx))) break;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd y = x - alpha * g;
      RayMax r2 = nehari_scale(prob, y);
      if (r2.ok) {
        double fy = r2.value;
        if (fy < fx - 1e-10 * std::abs(fx)) {
          x = r2.t * y;
          fx = fy;
          accepted = true;
          alpha *= 1.5;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  // Newton with bordered phase row <h, d_t x> = 0
  int n = prob.dim();
  double gnorm = std::numeric_limits<double>::infinity();
  int worse = 0;
  for (int it = 0; it < p.max_newton; ++it) {
    Eigen::VectorXd g = prob.gradient(x);
    double gn = g.norm();
    if (gn <= p.newton_tol) break;
    if (gn > gnorm) {
      if (++worse > 4) return out;
    } else {
      worse = 0;
    }
    gnorm = gn;
    Eigen::MatrixXd H = prob.hessian(x);
    Eigen::VectorXd b = prob.phase_direction(x);
    if (b.norm() > 0) b.normalize();
    Eigen::MatrixXd A(n + 1, n + 1);
    A.topLeftCorner(n, n) = H;
    A.topRightCorner(n, 1) = b;
    A.bottomLeftCorner(1, n) = b.transpose();
    A(n, n) = 0.0;
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -g;
    rhs(n) = 0.0;
    Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    Eigen::VectorXd d = sol.head(n);
    double cap = 0.5 * std::max(1.0, x.norm());
    if (d.norm() > cap) d *= cap / d.norm();
    x += d;
  }
  if (prob.gradient(x).norm() > p.newton_tol * 10.0) return out;
  if (x.norm() < p.nontrivial_tol) return out;

  // certification: spectrum of the Hessian restricted orthogonal to d_t x
  Eigen::MatrixXd H = prob.hessian(x);
  Eigen::VectorXd b = prob.phase_direction(x);
  b.normalize();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd B = Q.rightCols(n - 1);
  Eigen::MatrixXd Hm = B.transpose() * H * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hm + Hm.transpose()));
  double gap = es.eigenvalues().cwiseAbs().minCoeff();
  int kdim = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) < p.gap_threshold) ++kdim;

  out.circle = {x, prob.value(x), prob.gradient(x).norm(), kdim, gap, seed_index};
  if (kdim > 0) {
    out.degenerate = true;
    return out;
  }
  out.converged = true;
  return out;
}

}  // namespace

CriticalCircle find_critical_circle(const CircleProblem& prob,
                                    std::span<const Eigen::VectorXd> seeds,
                                    const CircleSearchParams& params, int threads) {
  if (seeds.empty()) throw CircleSearchError("no critical circle found: no seeds supplied");
  std::vector<SeedOutcome> outcomes(seeds.size());
  auto work = [&](size_t i) { outcomes[i] = run_seed(prob, seeds[i], params, int(i)); };
  if (threads <= 1 || seeds.size() <= 1) {
    for (size_t i = 0; i < seeds.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < seeds.size(); i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  }
  const CriticalCircle* best = nullptr;
  double worst_gap = -1.0;
  bool any_degenerate = false;
  for (const auto& o : outcomes) {
    if (o.converged) {
      if (!best || o.circle.value < best->value) best = &o.circle;
    } else if (o.degenerate) {
      any_degenerate = true;
      worst_gap = std::max(worst_gap, o.circle.second_eigenvalue_gap);
    }
  }
  if (best) return *best;
  if (any_degenerate)
    throw CircleSearchError("degenerate circle: Hessian gap " + std::to_string(worst_gap) +
                            " below threshold");
  throw CircleSearchError("no critical circle found");
}

// ---------------------------------------------------------------------------
// Phi0Problem

namespace {

const double kVScale = std::sqrt(2.0) / kPi;  // L2-normalized cos(lt) sin(lx) basis

SpectralField unpack_v(const Eigen::VectorXd& x, int Lmax, int L, int J) {
  SpectralField v(L, J);
  for (int l = 1; l <= Lmax; ++l) {
    double xc = x(l - 1), xs = x(Lmax + l - 1);
    v.set_pair(l, l, kVScale * complexd{0.5 * xc, -0.5 * xs});
  }
  return v;
}

Eigen::VectorXd pack_grad_v(const SpectralField& g, int Lmax) {
  Eigen::VectorXd out(2 * Lmax);
  for (int l = 1; l <= Lmax; ++l) {
    complexd gl = g.at(l, l);
    out(l - 1) = kPi * kPi * kVScale * gl.real();
    out(Lmax + l - 1) = -kPi * kPi * kVScale * gl.imag();
  }
  return out;
}

Eigen::VectorXd v_phase_dir(const Eigen::VectorXd& x, int Lmax) {
  Eigen::VectorXd y(2 * Lmax);
  for (int l = 1; l <= Lmax; ++l) {
    y(l - 1) = l * x(Lmax + l - 1);
    y(Lmax + l - 1) = -l * x(l - 1);
  }
  return y;
}

}  // namespace

Phi0Problem::Phi0Problem(const NonlinearitySpec& spec, int Lv, int oversample)
    : spec_(spec), Lv_(Lv), oversample_(oversample) {}

SpectralField Phi0Problem::unpack(const Eigen::VectorXd& x) const {
  return unpack_v(x, Lv_, Lv_, Lv_);
}

Eigen::VectorXd Phi0Problem::pack_gradient(const SpectralField& g) const {
  return pack_grad_v(g, Lv_);
}

double Phi0Problem::value(const Eigen::VectorXd& x) const {
  return phi0(unpack(x), spec_, oversample_).value;
}

Eigen::VectorXd Phi0Problem::gradient(const Eigen::VectorXd& x) const {
  return pack_grad_v(phi0(unpack(x), spec_, oversample_).gradient, Lv_);
}

Eigen::MatrixXd Phi0Problem::hessian(const Eigen::VectorXd& x) const {
  Phi0Result f = phi0(unpack(x), spec_, oversample_);
  Eigen::MatrixXd H(dim(), dim());
  for (int k = 0; k < dim(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim());
    e(k) = 1.0;
    H.col(k) = pack_grad_v(f.hessian_action(unpack(e)), Lv_);
  }
  return H;
}

Eigen::VectorXd Phi0Problem::phase_direction(const Eigen::VectorXd& x) const {
  return v_phase_dir(x, Lv_);
}

// ---------------------------------------------------------------------------
// Psi0Problem

Psi0Problem::Psi0Problem(const NonlinearitySpec& spec, const Q2Params& q2)
    : spec_(spec), q2_(q2) {}

SpectralField Psi0Problem::unpack(const Eigen::VectorXd& x) const {
  return unpack_v(x, q2_.N, q2_.L, q2_.J);
}

Eigen::VectorXd Psi0Problem::pack_gradient(const SpectralField& g) const {
  return pack_grad_v(g, q2_.N);
}

double Psi0Problem::value(const Eigen::VectorXd& x) const {
  return reduced_psi0(unpack(x), spec_, q2_).value;
}

Eigen::VectorXd Psi0Problem::gradient(const Eigen::VectorXd& x) const {
  return pack_grad_v(reduced_psi0(unpack(x), spec_, q2_).gradient, q2_.N);
}

Eigen::MatrixXd Psi0Problem::hessian(const Eigen::VectorXd& x) const {
  SpectralField v1 = unpack(x);
  Q2Result q = solve_Q2(spec_, 0.0, v1, SpectralField(q2_.L, q2_.J), q2_);
  SpectralField v = v1;
  v += q.v2;
  TrigPolynomial pap = effective_ap(spec_);
  pap *= double(spec_.p);
  int n = dim();
  Eigen::MatrixXd H(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(k) = 1.0;
    SpectralField ek = unpack(e);
    SpectralField zk = dv2_direction(spec_, 0.0, v, ek, q2_);
    SpectralField dir = ek;
    dir += zk;
    // D^2 Phi0(v)[dir, .] restricted to V1
    SpectralField out(q2_.L, q2_.J);
    for (int l = -q2_.L; l <= q2_.L; ++l) {
      int j = std::abs(l);
      if (l != 0 && j <= q2_.J) out.set(l, j, 2.0 * double(l) * l * dir.at(l, j));
    }
    std::pair<const SpectralField*, int> fac[] = {{&v, spec_.p - 1}, {&dir, 1}};
    out -= project(galerkin_product(pap, fac, q2_.L, q2_.J, q2_.oversample), Subspace::V);
    H.col(k) = pack_grad_v(project(out, Subspace::V1, q2_.N), q2_.N);
  }
  return H;
}

Eigen::VectorXd Psi0Problem::phase_direction(const Eigen::VectorXd& x) const {
  return v_phase_dir(x, q2_.N);
}

// ---------------------------------------------------------------------------
// loop functionals

LoopFunction loop_from_dofs(const Eigen::VectorXd& x) {
  int M = int(x.size()) / 2;
  LoopFunction eta;
  eta.a.resize(M);
  eta.b.resize(M);
  for (int m = 1; m <= M; ++m) {
    eta.a[m - 1] = x(m - 1) / kSqrtPi;
    eta.b[m - 1] = x(M + m - 1) / kSqrtPi;
  }
  return eta;
}

Eigen::VectorXd dofs_from_loop(const LoopFunction& eta, int M) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * M);
  for (int m = 1; m <= std::min(M, eta.M()); ++m) {
    x(m - 1) = kSqrtPi * eta.coeff_a(m);
    x(M + m - 1) = kSqrtPi * eta.coeff_b(m);
  }
  return x;
}

Eigen::VectorXd loop_phase_direction(const Eigen::VectorXd& x) {
  int M = int(x.size()) / 2;
  Eigen::VectorXd y(2 * M);
  for (int m = 1; m <= M; ++m) {
    y(m - 1) = m * x(M + m - 1);
    y(M + m - 1) = -m * x(m - 1);
  }
  return y;
}

SpectralField v_field_from_dofs(const Eigen::VectorXd& x, int Lmax, int L, int J) {
  return unpack_v(x, Lmax, L, J);
}

Eigen::VectorXd v_dofs_from_field(const SpectralField& v, int Lmax) {
  Eigen::VectorXd x(2 * Lmax);
  for (int l = 1; l <= Lmax; ++l) {
    complexd c = v.at(l, l);
    x(l - 1) = 2.0 * c.real() / kVScale;
    x(Lmax + l - 1) = -2.0 * c.imag() / kVScale;
  }
  return x;
}

Eigen::VectorXd v_dofs_pack_gradient(const SpectralField& g, int Lmax) {
  return pack_grad_v(g, Lmax);
}

Eigen::VectorXd v_dofs_phase_direction(const Eigen::VectorXd& x, int Lmax) {
  return v_phase_dir(x, Lmax);
}

namespace {

struct LoopFourier {
  double q0;
  std::vector<double> qc, qs;
};

// exact Fourier coefficients of (pointwise powers of) a sampled loop
LoopFourier loop_fourier(const std::vector<double>& samples, int deg) {
  int N = int(samples.size());
  Eigen::FFT<double> fft;
  std::vector<complexd> in(N), out(N);
  for (int i = 0; i < N; ++i) in[i] = samples[i];
  fft.fwd(out, in);
  LoopFourier f;
  f.q0 = out[0].real() / N;
  f.qc.resize(deg);
  f.qs.resize(deg);
  for (int k = 1; k <= deg; ++k) {
    complexd fp = out[k] / double(N), fm = out[N - k] / double(N);
    f.qc[k - 1] = (fp + fm).real();
    f.qs[k - 1] = (complexd{0.0, 1.0} * (fp - fm)).real();
  }
  return f;
}

// int_T q phi_i phi_j in the normalized cos/sin basis
Eigen::MatrixXd loop_mult_matrix(const LoopFourier& q, int M) {
  auto Ic = [&](int k) {
    if (k == 0) return 2.0 * kPi * q.q0;
    return k <= int(q.qc.size()) ? kPi * q.qc[k - 1] : 0.0;
  };
  auto Is = [&](int k) {
    if (k == 0) return 0.0;
    int a = std::abs(k);
    double v = a <= int(q.qs.size()) ? kPi * q.qs[a - 1] : 0.0;
    return k > 0 ? v : -v;
  };
  Eigen::MatrixXd m(2 * M, 2 * M);
  for (int i = 1; i <= M; ++i)
    for (int j = 1; j <= M; ++j) {
      m(i - 1, j - 1) = 0.5 * (Ic(std::abs(i - j)) + Ic(i + j)) / kPi;              // cc
      m(M + i - 1, M + j - 1) = 0.5 * (Ic(std::abs(i - j)) - Ic(i + j)) / kPi;      // ss
      double cs = 0.5 * (Is(i + j) + Is(j - i)) / kPi;
      m(i - 1, M + j - 1) = cs;
      m(M + j - 1, i - 1) = cs;
    }
  return m;
}

std::vector<double> loop_samples(const LoopFunction& eta, int N) {
  std::vector<double> s(N);
  for (int i = 0; i < N; ++i) s[i] = eta.eval(2.0 * kPi * i / N);
  return s;
}

}  // namespace

LoopFunctionalResult psi_cubic_core(const Eigen::VectorXd& x) {
  int M = int(x.size()) / 2;
  LoopFunction eta = loop_from_dofs(x);
  double Q = 0.0, S = x.squaredNorm();
  for (int m = 1; m <= M; ++m)
    Q += double(m) * m * (x(m - 1) * x(m - 1) + x(M + m - 1) * x(M + m - 1));

  int N = TensorGrid::good_size(4 * M + 4);
  std::vector<double> s = loop_samples(eta, N);
  double i4 = 0.0;
  std::vector<double> s3(N);
  for (int i = 0; i < N; ++i) {
    double v = s[i];
    s3[i] = v * v * v;
    i4 += v * v * v * v;
  }
  i4 *= 2.0 * kPi / N;

  LoopFunctionalResult r;
  r.value = 0.5 * Q - 0.25 * i4 - (3.0 / (8.0 * kPi)) * S * S;

  LoopFourier f3 = loop_fourier(s3, std::min(3 * M, N / 2 - 1));
  Eigen::VectorXd grad(2 * M);
  for (int m = 1; m <= M; ++m) {
    double c3 = m <= int(f3.qc.size()) ? f3.qc[m - 1] : 0.0;
    double s3c = m <= int(f3.qs.size()) ? f3.qs[m - 1] : 0.0;
    grad(m - 1) = double(m) * m * x(m - 1) - kSqrtPi * c3 - (3.0 / (2.0 * kPi)) * S * x(m - 1);
    grad(M + m - 1) =
        double(m) * m * x(M + m - 1) - kSqrtPi * s3c - (3.0 / (2.0 * kPi)) * S * x(M + m - 1);
  }
  r.gradient = grad;

  std::vector<double> s2(N);
  for (int i = 0; i < N; ++i) s2[i] = 3.0 * s[i] * s[i];
  LoopFourier f2 = loop_fourier(s2, std::min(2 * M, N / 2 - 1));
  Eigen::MatrixXd H = -loop_mult_matrix(f2, M);
  for (int m = 1; m <= M; ++m) {
    H(m - 1, m - 1) += double(m) * m;
    H(M + m - 1, M + m - 1) += double(m) * m;
  }
  H -= (3.0 / (2.0 * kPi)) * (S * Eigen::MatrixXd::Identity(2 * M, 2 * M) +
                              2.0 * x * x.transpose());
  r.hessian = H;
  return r;
}

LoopFunctionalResult cubic_remainder_Rn(const Eigen::VectorXd& x, int n,
                                        const TrigPolynomial& a3, int oversample) {
  double mean = a3.mean_0_pi();
  if (std::abs(mean) < 1e-14)
    throw std::invalid_argument("cubic remainder: mean-value hypothesis violated (<a3> = 0)");
  TrigPolynomial b = a3;
  b *= 1.0 / mean;
  b.c0 -= 1.0;

  int M = int(x.size()) / 2;
  LoopFunction eta = loop_from_dofs(x);
  SpectralField v = loop_to_V(eta, M, M);
  int LH = std::max(1, n * M);
  SpectralField hv = embed_Hn(v, n, LH, LH);

  LoopFunctionalResult r;
  r.value = integrate_a_power(b, hv, 4, oversample) / (8.0 * kPi);

  // basis images under H_n: cos DOF -> i/sqrt(pi) at (nm, nm); sin DOF -> 1/sqrt(pi)
  auto pair_with_basis = [&](const SpectralField& Wfield, Eigen::VectorXd& out) {
    for (int m = 1; m <= M; ++m) {
      complexd Wc = Wfield.at(n * m, n * m);
      out(m - 1) = 2.0 * kPi * kPi * Wc.imag() / kSqrtPi;
      out(M + m - 1) = 2.0 * kPi * kPi * Wc.real() / kSqrtPi;
    }
  };

  TrigPolynomial bw = b;
  bw *= 1.0 / (2.0 * kPi);
  std::pair<const SpectralField*, int> fac3[] = {{&hv, 3}};
  SpectralField W3 = galerkin_product(bw, fac3, LH, LH, oversample);
  r.gradient.resize(2 * M);
  pair_with_basis(W3, r.gradient);

  TrigPolynomial bw2 = b;
  bw2 *= 3.0 / (2.0 * kPi);
  r.hessian.resize(2 * M, 2 * M);
  for (int k = 0; k < 2 * M; ++k) {
    SpectralField bk(LH, LH);
    int m = (k % M) + 1;
    bk.set_pair(n * m, n * m, k < M ? complexd{0.0, 1.0 / kSqrtPi} : complexd{1.0 / kSqrtPi, 0.0});
    std::pair<const SpectralField*, int> fac2[] = {{&hv, 2}, {&bk, 1}};
    SpectralField Wk = galerkin_product(bw2, fac2, LH, LH, oversample);
    Eigen::VectorXd col(2 * M);
    pair_with_basis(Wk, col);
    r.hessian.col(k) = col;
  }
  return r;
}

LoopFunctionalResult psi_quadratic(const Eigen::VectorXd& x) {
  int M = int(x.size()) / 2;
  double S = x.squaredNorm();
  LoopFunctionalResult r;
  double Q = 0.0;
  for (int m = 1; m <= M; ++m)
    Q += double(m) * m * (x(m - 1) * x(m - 1) + x(M + m - 1) * x(M + m - 1));
  r.value = 0.5 * Q - 0.25 * S * S;
  r.gradient.resize(2 * M);
  for (int m = 1; m <= M; ++m) {
    r.gradient(m - 1) = (double(m) * m - S) * x(m - 1);
    r.gradient(M + m - 1) = (double(m) * m - S) * x(M + m - 1);
  }
  r.hessian = -S * Eigen::MatrixXd::Identity(2 * M, 2 * M) - 2.0 * x * x.transpose();
  for (int m = 1; m <= M; ++m) {
    r.hessian(m - 1, m - 1) += double(m) * m;
    r.hessian(M + m - 1, M + m - 1) += double(m) * m;
  }
  return r;
}

double psi_quadratic_el_residual(const Eigen::VectorXd& x) {
  int M = int(x.size()) / 2;
  double S = x.squaredNorm();
  double acc = 0.0;
  for (int m = 1; m <= M; ++m) {
    double f = S - double(m) * m;
    acc += f * f * (x(m - 1) * x(m - 1) + x(M + m - 1) * x(M + m - 1));
  }
  return std::sqrt(acc);
}

double phi0_quadratic(const SpectralField& v, double a2, int Lq, int Jq, int oversample) {
  if (!project(v, Subspace::W).is_zero())
    throw NotInSubspaceError("phi0_quadratic: input not in V");
  std::pair<const SpectralField*, int> fac[] = {{&v, 2}};
  SpectralField q = galerkin_product(TrigPolynomial::constant(1.0), fac, Lq, Jq, oversample);
  SpectralField qw = project(q, Subspace::W);
  SpectralField lq = apply_L_inverse_W(qw);
  return 0.5 * h1_norm2(v) + 0.5 * a2 * a2 * pairing_L2(qw, lq);
}

PsiCubicProblem::PsiCubicProblem(int n, const TrigPolynomial& a3, int M, int oversample)
    : n_(n), M_(M), oversample_(oversample), a3_(a3) {
  double mean = a3.mean_0_pi();
  if (std::abs(mean) < 1e-14)
    throw std::invalid_argument("PsiCubic: mean-value hypothesis violated (<a3> = 0)");
  TrigPolynomial b = a3;
  b *= 1.0 / mean;
  b.c0 -= 1.0;
  has_remainder_ = !b.is_zero(1e-15);
}

double PsiCubicProblem::value(const Eigen::VectorXd& x) const {
  double v = psi_cubic_core(x).value;
  if (has_remainder_) v += cubic_remainder_Rn(x, n_, a3_, oversample_).value;
  return v;
}

Eigen::VectorXd PsiCubicProblem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = psi_cubic_core(x).gradient;
  if (has_remainder_) g += cubic_remainder_Rn(x, n_, a3_, oversample_).gradient;
  return g;
}

Eigen::MatrixXd PsiCubicProblem::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = psi_cubic_core(x).hessian;
  if (has_remainder_) h += cubic_remainder_Rn(x, n_, a3_, oversample_).hessian;
  return h;
}

Eigen::VectorXd PsiCubicProblem::phase_direction(const Eigen::VectorXd& x) const {
  return loop_phase_direction(x);
}

Eigen::VectorXd PsiQuadraticProblem::phase_direction(const Eigen::VectorXd& x) const {
  return loop_phase_direction(x);
}

}  // namespace resowave
