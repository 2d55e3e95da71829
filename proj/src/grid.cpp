#include "resowave/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace resowave {

namespace {

// DFT along each column of a complex matrix, in place semantics via copy.
// fwd: out[k] = sum_n in[n] exp(-2 pi i n k / N)
Eigen::MatrixXcd fft_columns(const Eigen::MatrixXcd& m, bool forward) {
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd out(m.rows(), m.cols());
  std::vector<complexd> in(m.rows()), res(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) in[r] = m(r, c);
    if (forward)
      fft.fwd(res, in);
    else
      fft.inv(res, in);  // includes 1/N
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, c) = res[r];
  }
  return out;
}

}  // namespace

complexd XTrig::eval(double x) const {
  complexd v = c0;
  for (size_t m = 0; m < cosc.size(); ++m) v += cosc[m] * std::cos((m + 1) * x);
  for (size_t m = 0; m < sinc.size(); ++m) v += sinc[m] * std::sin((m + 1) * x);
  return v;
}

complexd XTrig::integral_cos(int q) const {
  complexd v{0.0, 0.0};
  if (q == 0) {
    v += c0 * kPi;
  } else if (q <= static_cast<int>(cosc.size())) {
    v += cosc[q - 1] * (kPi / 2.0);
  }
  for (size_t i = 0; i < sinc.size(); ++i) {
    int m = static_cast<int>(i) + 1;
    if (m == q || (m + q) % 2 == 0) continue;
    v += sinc[i] * (2.0 * m / (double(m) * m - double(q) * q));
  }
  return v;
}

XTrig Fourier2D::x_profile(int l) const {
  XTrig p;
  p.c0 = at(l, 0);
  p.cosc.resize(Mx);
  p.sinc.resize(Mx);
  for (int m = 1; m <= Mx; ++m) {
    p.cosc[m - 1] = at(l, m) + at(l, -m);
    p.sinc[m - 1] = complexd{0.0, 1.0} * (at(l, m) - at(l, -m));
  }
  return p;
}

TrigPolynomial Fourier2D::time_average() const {
  XTrig p = x_profile(0);
  TrigPolynomial a;
  a.c0 = p.c0.real();
  a.cos_coeffs.resize(p.cosc.size());
  a.sin_coeffs.resize(p.sinc.size());
  for (size_t i = 0; i < p.cosc.size(); ++i) a.cos_coeffs[i] = p.cosc[i].real();
  for (size_t i = 0; i < p.sinc.size(); ++i) a.sin_coeffs[i] = p.sinc[i].real();
  return a;
}

double Fourier2D::integral_Omega() const { return 2.0 * kPi * x_profile(0).integral_0_pi().real(); }

TensorGrid::TensorGrid(int nt, int nx) : nt_(nt), nx_(nx) {
  if (nt < 4 || nx < 4) throw std::invalid_argument("TensorGrid: sizes too small");
}

int TensorGrid::good_size(int minimum) {
  int n = std::max(minimum, 4);
  if (n % 2) ++n;
  auto smooth = [](int v) {
    for (int p : {2, 3, 5})
      while (v % p == 0) v /= p;
    return v == 1;
  };
  while (!smooth(n)) n += 2;
  return n;
}

Eigen::MatrixXd TensorGrid::synth(const SpectralField& u) const {
  if (nt_ <= 2 * u.L() + 1 || nx_ <= 2 * u.J() + 1)
    throw std::invalid_argument("TensorGrid::synth: grid does not resolve the field");
  Eigen::MatrixXcd spec = Eigen::MatrixXcd::Zero(nt_, nx_);
  const complexd half_over_i{0.0, -0.5};  // 1/(2i)
  for (int l = -u.L(); l <= u.L(); ++l) {
    int row = (l + nt_) % nt_;
    for (int j = 1; j <= u.J(); ++j) {
      complexd c = u.at(l, j);
      if (c == complexd{0.0, 0.0}) continue;
      spec(row, j) += c * half_over_i;
      spec(row, nx_ - j) -= c * half_over_i;
    }
  }
  // values = sum spec(l,m) e^{ilt} e^{imx}: inverse DFT in both axes, times nt*nx
  Eigen::MatrixXcd tmp = fft_columns(spec, false);                  // over t
  Eigen::MatrixXcd vals = fft_columns(tmp.transpose(), false);      // over x
  return double(nt_) * double(nx_) * vals.transpose().real();
}

Fourier2D TensorGrid::analyze_full(const Eigen::MatrixXd& values, int Lt, int Mx) const {
  if (2 * Lt + 1 > nt_ || 2 * Mx + 1 > nx_)
    throw std::invalid_argument("TensorGrid::analyze_full: requested band exceeds grid");
  Eigen::MatrixXcd tmp = fft_columns(values.cast<complexd>(), true);        // over t
  Eigen::MatrixXcd spec = fft_columns(tmp.transpose(), true).transpose();   // over x
  spec /= double(nt_) * double(nx_);
  Fourier2D out;
  out.Lt = Lt;
  out.Mx = Mx;
  out.F.resize(2 * Lt + 1, 2 * Mx + 1);
  for (int l = -Lt; l <= Lt; ++l)
    for (int m = -Mx; m <= Mx; ++m) out.F(l + Lt, m + Mx) = spec((l + nt_) % nt_, (m + nx_) % nx_);
  return out;
}

SpectralField TensorGrid::analyze_sine(const Eigen::MatrixXd& values, int L, int J) const {
  int Mx = nx_ / 2 - 1;
  Fourier2D f = analyze_full(values, std::min(L, nt_ / 2 - 1), Mx);
  SpectralField u(L, J);
  for (int l = -f.Lt; l <= f.Lt; ++l) {
    XTrig prof = f.x_profile(l);
    for (int j = 1; j <= J; ++j) {
      complexd b = (j <= static_cast<int>(prof.sinc.size())) ? prof.sinc[j - 1] : complexd{0, 0};
      // cosine content projects onto sin(jx) through opposite-parity modes only
      complexd corr = (j % 2 == 1) ? prof.c0 * (2.0 / double(j)) : complexd{0, 0};
      for (int m = 1 + (j % 2); m <= Mx; m += 2) {
        corr += prof.cosc[m - 1] * (2.0 * j / (double(j) * j - double(m) * m));
      }
      u.set(l, j, b + corr * (2.0 / kPi));
    }
  }
  return u;
}

double TensorGrid::integrate_Omega(const Eigen::MatrixXd& values) const {
  // time average, then exact x-integral over the half circle
  Eigen::VectorXd avg = values.colwise().mean();
  Eigen::FFT<double> fft;
  std::vector<complexd> in(nx_), out(nx_);
  for (int i = 0; i < nx_; ++i) in[i] = avg(i);
  fft.fwd(out, in);
  XTrig prof;
  prof.c0 = out[0] / double(nx_);
  int Mx = nx_ / 2 - 1;
  prof.cosc.resize(Mx);
  prof.sinc.resize(Mx);
  for (int m = 1; m <= Mx; ++m) {
    complexd fp = out[m] / double(nx_), fm = out[nx_ - m] / double(nx_);
    prof.cosc[m - 1] = fp + fm;
    prof.sinc[m - 1] = complexd{0.0, 1.0} * (fp - fm);
  }
  return 2.0 * kPi * prof.integral_0_pi().real();
}

std::pair<int, int> grid_sizes(int deg_t, int deg_x, int oversample) {
  if (oversample < 2) throw std::invalid_argument("oversample must be >= 2");
  int nt = TensorGrid::good_size(std::max(oversample * (deg_t + 1), 2 * deg_t + 2));
  int nx = TensorGrid::good_size(std::max(oversample * (deg_x + 1), 2 * deg_x + 2));
  return {nt, nx};
}

namespace {

struct NonlinGrid {
  TensorGrid grid;
  Eigen::MatrixXd u_values;
  std::vector<Eigen::VectorXd> ak_values;  // one row per term of the spec
};

NonlinGrid prepare(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                   int oversample) {
  int K = spec.max_power();
  auto [nt, nx] = grid_sizes(K * u.L(), K * u.J() + spec.max_x_degree(), oversample);
  TensorGrid grid(nt, nx);
  Eigen::MatrixXd uv = grid.synth(u);
  double amp = uv.cwiseAbs().maxCoeff();
  if (std::isfinite(spec.radius) && delta * amp >= spec.radius)
    throw RadiusGuardError("eval_nonlinearity: outside analyticity radius (delta*|u| = " +
                               std::to_string(delta * amp) + ")",
                           delta * amp);
  std::vector<Eigen::VectorXd> ak;
  ak.reserve(spec.terms.size());
  for (const auto& [k, a] : spec.terms) {
    Eigen::VectorXd row(nx);
    for (int i = 0; i < nx; ++i) row(i) = a.eval(grid.x(i));
    ak.push_back(std::move(row));
  }
  return {std::move(grid), std::move(uv), std::move(ak)};
}

}  // namespace

SpectralField eval_nonlinearity(const NonlinearitySpec& spec, double delta,
                                const SpectralField& u, int oversample, int Lout, int Jout) {
  if (Lout < 0) Lout = u.L();
  if (Jout < 0) Jout = u.J();
  auto ng = prepare(spec, delta, u, oversample);
  Eigen::MatrixXd g(ng.grid.nt(), ng.grid.nx());
  std::vector<double> avals(ng.ak_values.size());
  for (int i = 0; i < ng.grid.nx(); ++i) {
    for (size_t k = 0; k < avals.size(); ++k) avals[k] = ng.ak_values[k](i);
    for (int n = 0; n < ng.grid.nt(); ++n)
      g(n, i) = spec.eval_g(delta, avals, ng.u_values(n, i));
  }
  return ng.grid.analyze_sine(g, Lout, Jout);
}

Fourier2D nonlinearity_derivative_table(const NonlinearitySpec& spec, double delta,
                                        const SpectralField& u, int oversample) {
  auto ng = prepare(spec, delta, u, oversample);
  Eigen::MatrixXd a(ng.grid.nt(), ng.grid.nx());
  std::vector<double> avals(ng.ak_values.size());
  for (int i = 0; i < ng.grid.nx(); ++i) {
    for (size_t k = 0; k < avals.size(); ++k) avals[k] = ng.ak_values[k](i);
    for (int n = 0; n < ng.grid.nt(); ++n)
      a(n, i) = spec.eval_dg(delta, avals, ng.u_values(n, i));
  }
  int K = spec.max_power();
  int Lt = std::min((K - 1) * u.L(), ng.grid.nt() / 2 - 1);
  int Mx = std::min((K - 1) * u.J() + spec.max_x_degree(), ng.grid.nx() / 2 - 1);
  return ng.grid.analyze_full(a, Lt, Mx);
}

double mean_value_M(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                    const SpectralField& w, const SpectralField& v2, int oversample) {
  int L = std::max({v1.L(), w.L(), v2.L()});
  int J = std::max({v1.J(), w.J(), v2.J()});
  SpectralField u = v1.resized(L, J);
  u += w;
  u += v2;
  auto ng = prepare(spec, delta, u, oversample);
  Eigen::MatrixXd a(ng.grid.nt(), ng.grid.nx());
  std::vector<double> avals(ng.ak_values.size());
  for (int i = 0; i < ng.grid.nx(); ++i) {
    for (size_t k = 0; k < avals.size(); ++k) avals[k] = ng.ak_values[k](i);
    for (int n = 0; n < ng.grid.nt(); ++n)
      a(n, i) = spec.eval_dg(delta, avals, ng.u_values(n, i));
  }
  return ng.grid.integrate_Omega(a) / (2.0 * kPi * kPi);
}

SpectralField galerkin_product(const TrigPolynomial& a,
                               std::span<const std::pair<const SpectralField*, int>> factors,
                               int Lout, int Jout, int oversample) {
  int deg_t = 0, deg_x = a.degree();
  for (const auto& [f, p] : factors) {
    deg_t += p * f->L();
    deg_x += p * f->J();
  }
  auto [nt, nx] = grid_sizes(std::max(deg_t, Lout), std::max(deg_x, Jout), oversample);
  TensorGrid grid(nt, nx);
  Eigen::MatrixXd prod = Eigen::MatrixXd::Ones(nt, nx);
  for (const auto& [f, p] : factors) {
    Eigen::MatrixXd v = grid.synth(*f);
    for (int q = 0; q < p; ++q) prod = prod.cwiseProduct(v);
  }
  for (int i = 0; i < nx; ++i) prod.col(i) *= a.eval(grid.x(i));
  return grid.analyze_sine(prod, Lout, Jout);
}

double integrate_a_power(const TrigPolynomial& a, const SpectralField& u, int power,
                         int oversample) {
  auto [nt, nx] = grid_sizes(power * u.L(), power * u.J() + a.degree(), oversample);
  TensorGrid grid(nt, nx);
  Eigen::MatrixXd v = grid.synth(u);
  Eigen::MatrixXd prod = Eigen::MatrixXd::Ones(nt, nx);
  for (int q = 0; q < power; ++q) prod = prod.cwiseProduct(v);
  for (int i = 0; i < nx; ++i) prod.col(i) *= a.eval(grid.x(i));
  return grid.integrate_Omega(prod);
}

Eigen::MatrixXcd sine_mult_matrix(const XTrig& prof, int J) {
  // (2/pi) int a sin(jx) sin(j'x) = (C_{|j-j'|} - C_{j+j'}) / pi
  std::vector<complexd> C(2 * J + 1);
  for (int q = 0; q <= 2 * J; ++q) C[q] = prof.integral_cos(q);
  Eigen::MatrixXcd m(J, J);
  for (int j = 1; j <= J; ++j)
    for (int jp = 1; jp <= J; ++jp) m(j - 1, jp - 1) = (C[std::abs(j - jp)] - C[j + jp]) / kPi;
  return m;
}

Eigen::MatrixXd sine_mult_matrix(const TrigPolynomial& a, int J) {
  std::vector<double> C(2 * J + 1);
  for (int q = 0; q <= 2 * J; ++q) C[q] = a.integral_cos(q);
  Eigen::MatrixXd m(J, J);
  for (int j = 1; j <= J; ++j)
    for (int jp = 1; jp <= J; ++jp) m(j - 1, jp - 1) = (C[std::abs(j - jp)] - C[j + jp]) / kPi;
  return m;
}

}  // namespace resowave
