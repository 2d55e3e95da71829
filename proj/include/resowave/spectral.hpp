#pragma once

#include <complex>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Spectral representation of real space-time fields
//
//   u(t,x) = sum_{l,j} c_{l,j} e^{i l t} sin(j x),   (t,x) in T x (0,pi),
//
// with the reality condition c_{-l,j} = conj(c_{l,j}).  The kernel subspace V
// of the d'Alembertian collects the modes j = |l|; its complement W collects
// j != |l|.  All norms are the analytic weighted norms
//
//   ||u||^2_{sigma,s} = sum_l e^{2 sigma |l|} (l^{2s}+1) ||u_l||^2_{H1},
//
// with the H1 seminorm ||u_l||^2 = int_0^pi |d_x u_l|^2 = (pi/2) sum_j j^2 |c_{l,j}|^2,
// which is diagonal in the sine basis.

namespace resowave {

using complexd = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

struct NormWeights {
  double sigma = 0.0;
  double s = 1.0;  // 2s > 1 required for the algebra property
};

/// Finite trigonometric polynomial a(x) = c0 + sum_m alpha_m cos(mx) + beta_m sin(mx).
struct TrigPolynomial {
  double c0 = 0.0;
  std::vector<double> cos_coeffs;  // alpha_m, m = 1..
  std::vector<double> sin_coeffs;  // beta_m,  m = 1..

  static TrigPolynomial constant(double c) { return TrigPolynomial{c, {}, {}}; }

  int degree() const;
  double eval(double x) const;
  double max_abs(int samples = 4096) const;
  /// (1/pi) int_0^pi a(x) dx
  double mean_0_pi() const;
  /// int_0^pi a(x) cos(qx) dx, exact
  double integral_cos(int q) const;
  bool is_zero(double tol = 0.0) const;

  // Decomposition with respect to reflection about x = pi/2:
  // symmetric part keeps c0, even cosines, odd sines.
  TrigPolynomial symmetric_part() const;
  TrigPolynomial antisymmetric_part() const;

  TrigPolynomial& operator*=(double a);
};

/// Rescaled nonlinearity g(delta,x,u) = s* sum_{k>=p} delta^{k-p} a_k(x) u^k,
/// from f(x,u) = sum_{k>=p} a_k(x) u^k via u -> delta u.
struct NonlinearitySpec {
  int p = 3;
  std::map<int, TrigPolynomial> terms;  // k -> a_k, k >= p
  int s_star = +1;
  double radius = std::numeric_limits<double>::infinity();  // guard on delta*|u|

  // Rescaling pathway: `standard` uses eps = s* delta^(p-1); `quadratic` is the
  // a_2 u^2 case where the bifurcation analysis forces eps = -delta^2.
  enum class Pathway { standard, quadratic };
  Pathway pathway = Pathway::standard;

  int max_power() const;
  int max_x_degree() const;
  void validate() const;

  double epsilon(double delta) const;  // signed
  double omega(double delta) const;    // sqrt(1 + 2 eps)
  /// g(delta, x, u) with a_k(x) values supplied by the caller
  double eval_g(double delta, std::span<const double> ak_values, double u) const;
  /// du g(delta, x, u)
  double eval_dg(double delta, std::span<const double> ak_values, double u) const;
};

/// Coefficient table over (l, j), l in [-L, L], j in [1, J].
class SpectralField {
 public:
  SpectralField() : L_(0), J_(1), c_(1, complexd{0.0, 0.0}) {}
  SpectralField(int L, int J);

  int L() const { return L_; }
  int J() const { return J_; }

  complexd at(int l, int j) const { return c_[idx(l, j)]; }
  void set(int l, int j, complexd v) { c_[idx(l, j)] = v; }
  void add(int l, int j, complexd v) { c_[idx(l, j)] += v; }
  /// set c_{l,j} and c_{-l,j} = conj(v) together
  void set_pair(int l, int j, complexd v);

  std::span<const complexd> raw() const { return c_; }
  std::span<complexd> raw() { return c_; }

  bool is_zero() const;
  double max_reality_defect() const;
  void enforce_reality();

  /// copy into a (possibly) different truncation; drops or zero-pads
  SpectralField resized(int L, int J) const;
  /// u(t - theta, x)
  SpectralField time_translate(double theta) const;
  SpectralField time_derivative() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double a, SpectralField u) { return u *= a; }

 private:
  size_t idx(int l, int j) const;
  int L_, J_;
  std::vector<complexd> c_;
};

enum class Subspace { V, W, V1, V2, Pn, PnPerp };

/// Does mode (l,j) belong to the subspace? V1/V2 need the cutoff N, Pn/PnPerp need L_n.
bool mode_in(Subspace sub, int l, int j, int cutoff);
SpectralField project(const SpectralField& u, Subspace sub, int cutoff = 0);

double norm_sigma_s(const SpectralField& u, NormWeights w);
/// L2(Omega) pairing <u,v> = pi^2 sum c conj(d) for real fields
double pairing_L2(const SpectralField& u, const SpectralField& v);

/// (-Delta)^{-1} on V: mode (l,|l|) scaled by 1/(2 l^2).  Throws if W-support present.
SpectralField inv_laplacian_V(const SpectralField& u);
/// L_omega = -omega^2 d_tt + d_xx: mode (l,j) scaled by (omega^2 l^2 - j^2)
SpectralField apply_L_omega(const SpectralField& u, double omega);
/// Inverse of -d_tt + d_xx on W: mode (l,j) scaled by 1/(l^2 - j^2).  Throws on V-support.
SpectralField apply_L_inverse_W(const SpectralField& u);

// Two conventions for beta appear in the multi-scale machinery; both are kept
// explicit and selectable.
enum class BetaConvention {
  bracket_wss,    // beta = (2 - tau)/2
  smalldiv_sme1,  // beta = (2 - tau)/tau
};
double beta_value(BetaConvention conv, double tau);

struct BracketTerm {
  SpectralField h;
  double sigma_i;
};

/// Upper bound for the multi-scale bracket norm of w = sum h_i from a stored
/// decomposition: sum_i ||h_i||_{sigma_i,s} / (sigma_i - sigma)^{2(tau-1)/beta}.
/// Returns +infinity if some sigma_i <= sigma.
double bracket_norm(std::span<const BracketTerm> decomposition, double sigma, NormWeights w,
                    double tau, BetaConvention conv);

struct NotInSubspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RadiusGuardError : std::runtime_error {
  RadiusGuardError(const std::string& msg, double amp) : std::runtime_error(msg), amplitude(amp) {}
  double amplitude;
};

}  // namespace resowave
