#pragma once

#include <Eigen/Dense>
#include <utility>

#include "resowave/spectral.hpp"

// Pseudo-spectral evaluation on a tensor grid over the full torus
// (t,x) in [0,2pi)^2.  Fields extend to the torus through the odd extension of
// the sine basis, so pointwise products of truncated fields are trigonometric
// polynomials and the full-circle FFT recovers their expansion exactly once the
// grid resolves the product degree.  Products of sine series generate cosine
// content in x; the sine-Galerkin coefficients on (0,pi) pick it up through the
// exact cross integrals int_0^pi cos(mx) sin(jx) dx.

namespace resowave {

/// Complex trigonometric profile in x: c0 + sum cosc_m cos(mx) + sinc_m sin(mx).
struct XTrig {
  complexd c0{0.0, 0.0};
  std::vector<complexd> cosc, sinc;

  int degree() const { return static_cast<int>(std::max(cosc.size(), sinc.size())); }
  complexd eval(double x) const;
  /// int_0^pi prof(x) cos(qx) dx, exact
  complexd integral_cos(int q) const;
  /// int_0^pi prof(x) dx
  complexd integral_0_pi() const { return integral_cos(0); }
};

/// Exact 2D trigonometric expansion F(t,x) = sum_{l,m} F(l,m) e^{ilt} e^{imx}.
struct Fourier2D {
  int Lt = 0, Mx = 0;
  Eigen::MatrixXcd F;  // (2Lt+1) x (2Mx+1), index (l+Lt, m+Mx)

  complexd at(int l, int m) const { return F(l + Lt, m + Mx); }
  XTrig x_profile(int l) const;
  /// time average a_0(x) of a real table, as a real trig polynomial
  TrigPolynomial time_average() const;
  double integral_Omega() const;  // int over T x (0,pi)
};

class TensorGrid {
 public:
  TensorGrid(int nt, int nx);

  int nt() const { return nt_; }
  int nx() const { return nx_; }
  double t(int n) const { return 2.0 * kPi * n / nt_; }
  double x(int i) const { return 2.0 * kPi * i / nx_; }

  /// smallest 5-smooth even integer >= minimum
  static int good_size(int minimum);

  Eigen::MatrixXd synth(const SpectralField& u) const;
  /// full trig expansion, exact when nt > 2*Lt, nx > 2*Mx and no aliasing
  Fourier2D analyze_full(const Eigen::MatrixXd& values, int Lt, int Mx) const;
  /// sine-Galerkin coefficients on (0,pi) up to (L,J), including the cosine
  /// cross terms; exact under the same resolution conditions
  SpectralField analyze_sine(const Eigen::MatrixXd& values, int L, int J) const;
  double integrate_Omega(const Eigen::MatrixXd& values) const;

 private:
  int nt_, nx_;
};

/// Grid sizes resolving a product of total degree (deg_t, deg_x) at the given
/// oversampling factor (>= 2 guarantees exactness).
std::pair<int, int> grid_sizes(int deg_t, int deg_x, int oversample);

/// Galerkin coefficients of g(delta, x, u(t,x)) up to (Lout, Jout); defaults to
/// the truncation of u.  Enforces the analyticity-radius guard delta*max|u|.
SpectralField eval_nonlinearity(const NonlinearitySpec& spec, double delta,
                                const SpectralField& u, int oversample = 3, int Lout = -1,
                                int Jout = -1);

/// Exact expansion of a(t,x) = du g(delta, x, u(t,x)).
Fourier2D nonlinearity_derivative_table(const NonlinearitySpec& spec, double delta,
                                        const SpectralField& u, int oversample = 3);

/// Mean value of du g over Omega = T x (0,pi), |Omega| = 2 pi^2.
double mean_value_M(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                    const SpectralField& w, const SpectralField& v2, int oversample = 3);

/// Galerkin coefficients of a(x) * prod_i u_i^{p_i}
SpectralField galerkin_product(const TrigPolynomial& a,
                               std::span<const std::pair<const SpectralField*, int>> factors,
                               int Lout, int Jout, int oversample = 3);

/// int_Omega a(x) u(t,x)^power dt dx, exact quadrature
double integrate_a_power(const TrigPolynomial& a, const SpectralField& u, int power,
                         int oversample = 3);

/// Exact Galerkin matrix of multiplication by a profile on sine modes 1..J:
/// entries (2/pi) int_0^pi prof(x) sin(jx) sin(j'x) dx.
Eigen::MatrixXcd sine_mult_matrix(const XTrig& prof, int J);
Eigen::MatrixXd sine_mult_matrix(const TrigPolynomial& a, int J);

}  // namespace resowave
