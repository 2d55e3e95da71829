#include "resowave/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace resowave {

// ---------------------------------------------------------------------------
// TrigPolynomial

int TrigPolynomial::degree() const {
  return static_cast<int>(std::max(cos_coeffs.size(), sin_coeffs.size()));
}

double TrigPolynomial::eval(double x) const {
  double v = c0;
  for (size_t m = 0; m < cos_coeffs.size(); ++m) v += cos_coeffs[m] * std::cos((m + 1) * x);
  for (size_t m = 0; m < sin_coeffs.size(); ++m) v += sin_coeffs[m] * std::sin((m + 1) * x);
  return v;
}

double TrigPolynomial::max_abs(int samples) const {
  double mx = 0.0;
  for (int i = 0; i <= samples; ++i) mx = std::max(mx, std::abs(eval(kPi * i / samples)));
  return mx;
}

double TrigPolynomial::integral_cos(int q) const {
  // int_0^pi cos(mx) cos(qx) = (pi/2) delta_{mq}  (m,q >= 1), pi if m=q=0, else 0
  // int_0^pi sin(mx) cos(qx) = m (1-(-1)^{m+q}) / (m^2-q^2)  (m != q), 0 if m=q
  double v = 0.0;
  if (q == 0) {
    v += c0 * kPi;
  } else if (q <= static_cast<int>(cos_coeffs.size())) {
    v += cos_coeffs[q - 1] * (kPi / 2.0);
  }
  for (size_t i = 0; i < sin_coeffs.size(); ++i) {
    int m = static_cast<int>(i) + 1;
    if (m == q) continue;
    if ((m + q) % 2 == 1) v += sin_coeffs[i] * 2.0 * m / (double(m) * m - double(q) * q);
  }
  return v;
}

double TrigPolynomial::mean_0_pi() const { return integral_cos(0) / kPi; }

bool TrigPolynomial::is_zero(double tol) const {
  if (std::abs(c0) > tol) return false;
  for (double a : cos_coeffs)
    if (std::abs(a) > tol) return false;
  for (double b : sin_coeffs)
    if (std::abs(b) > tol) return false;
  return true;
}

// cos(m(pi-x)) = (-1)^m cos(mx); sin(m(pi-x)) = (-1)^{m+1} sin(mx).
TrigPolynomial TrigPolynomial::symmetric_part() const {
  TrigPolynomial r;
  r.c0 = c0;
  r.cos_coeffs.assign(cos_coeffs.size(), 0.0);
  r.sin_coeffs.assign(sin_coeffs.size(), 0.0);
  for (size_t i = 0; i < cos_coeffs.size(); ++i)
    if ((i + 1) % 2 == 0) r.cos_coeffs[i] = cos_coeffs[i];
  for (size_t i = 0; i < sin_coeffs.size(); ++i)
    if ((i + 1) % 2 == 1) r.sin_coeffs[i] = sin_coeffs[i];
  return r;
}

TrigPolynomial TrigPolynomial::antisymmetric_part() const {
  TrigPolynomial r;
  r.cos_coeffs.assign(cos_coeffs.size(), 0.0);
  r.sin_coeffs.assign(sin_coeffs.size(), 0.0);
  for (size_t i = 0; i < cos_coeffs.size(); ++i)
    if ((i + 1) % 2 == 1) r.cos_coeffs[i] = cos_coeffs[i];
  for (size_t i = 0; i < sin_coeffs.size(); ++i)
    if ((i + 1) % 2 == 0) r.sin_coeffs[i] = sin_coeffs[i];
  return r;
}

TrigPolynomial& TrigPolynomial::operator*=(double a) {
  c0 *= a;
  for (double& v : cos_coeffs) v *= a;
  for (double& v : sin_coeffs) v *= a;
  return *this;
}

// ---------------------------------------------------------------------------
// NonlinearitySpec

int NonlinearitySpec::max_power() const {
  int k = p;
  for (const auto& [kk, a] : terms) k = std::max(k, kk);
  return k;
}

int NonlinearitySpec::max_x_degree() const {
  int d = 0;
  for (const auto& [k, a] : terms) d = std::max(d, a.degree());
  return d;
}

void NonlinearitySpec::validate() const {
  if (p < 2) throw std::invalid_argument("nonlinearity: p must be >= 2");
  auto it = terms.find(p);
  if (it == terms.end() || it->second.is_zero())
    throw std::invalid_argument("nonlinearity: leading term a_p missing or identically zero");
  for (const auto& [k, a] : terms)
    if (k < p) throw std::invalid_argument("nonlinearity: term with power below p");
  if (s_star != 1 && s_star != -1) throw std::invalid_argument("nonlinearity: s_star must be +-1");
  if (pathway == Pathway::quadratic) {
    if (p != 2) throw std::invalid_argument("quadratic pathway requires p = 2");
    if (terms.count(3)) throw std::invalid_argument("quadratic pathway excludes a u^3 term");
  }
}

double NonlinearitySpec::epsilon(double delta) const {
  int q = (pathway == Pathway::quadratic) ? 2 : (p - 1);
  return s_star * std::pow(delta, q);
}

double NonlinearitySpec::omega(double delta) const { return std::sqrt(1.0 + 2.0 * epsilon(delta)); }

double NonlinearitySpec::eval_g(double delta, std::span<const double> ak_values, double u) const {
  double v = 0.0;
  size_t i = 0;
  for (const auto& [k, a] : terms) {
    v += ak_values[i++] * std::pow(delta, k - p) * std::pow(u, k);
  }
  return s_star * v;
}

double NonlinearitySpec::eval_dg(double delta, std::span<const double> ak_values, double u) const {
  double v = 0.0;
  size_t i = 0;
  for (const auto& [k, a] : terms) {
    v += ak_values[i++] * std::pow(delta, k - p) * k * std::pow(u, k - 1);
  }
  return s_star * v;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(int L, int J) : L_(L), J_(J) {
  if (L < 0 || J < 1) throw std::invalid_argument("SpectralField: need L >= 0, J >= 1");
  c_.assign(static_cast<size_t>(2 * L + 1) * J, complexd{0.0, 0.0});
}

size_t SpectralField::idx(int l, int j) const {
  if (l < -L_ || l > L_ || j < 1 || j > J_) throw std::out_of_range("SpectralField index");
  return static_cast<size_t>(l + L_) * J_ + (j - 1);
}

void SpectralField::set_pair(int l, int j, complexd v) {
  set(l, j, v);
  if (l != 0) set(-l, j, std::conj(v));
}

bool SpectralField::is_zero() const {
  for (const auto& v : c_)
    if (v != complexd{0.0, 0.0}) return false;
  return true;
}

double SpectralField::max_reality_defect() const {
  double d = 0.0;
  for (int l = 0; l <= L_; ++l)
    for (int j = 1; j <= J_; ++j) d = std::max(d, std::abs(at(-l, j) - std::conj(at(l, j))));
  return d;
}

void SpectralField::enforce_reality() {
  for (int l = 1; l <= L_; ++l)
    for (int j = 1; j <= J_; ++j) {
      complexd v = 0.5 * (at(l, j) + std::conj(at(-l, j)));
      set(l, j, v);
      set(-l, j, std::conj(v));
    }
  for (int j = 1; j <= J_; ++j) set(0, j, complexd{at(0, j).real(), 0.0});
}

SpectralField SpectralField::resized(int L, int J) const {
  SpectralField r(L, J);
  int Lm = std::min(L, L_), Jm = std::min(J, J_);
  for (int l = -Lm; l <= Lm; ++l)
    for (int j = 1; j <= Jm; ++j) r.set(l, j, at(l, j));
  return r;
}

SpectralField SpectralField::time_translate(double theta) const {
  SpectralField r(L_, J_);
  for (int l = -L_; l <= L_; ++l) {
    complexd ph = std::exp(complexd{0.0, -l * theta});
    for (int j = 1; j <= J_; ++j) r.set(l, j, ph * at(l, j));
  }
  return r;
}

SpectralField SpectralField::time_derivative() const {
  SpectralField r(L_, J_);
  for (int l = -L_; l <= L_; ++l)
    for (int j = 1; j <= J_; ++j) r.set(l, j, complexd{0.0, double(l)} * at(l, j));
  return r;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.L_ == L_ && o.J_ == J_) {
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  } else {
    for (int l = -std::min(L_, o.L_); l <= std::min(L_, o.L_); ++l)
      for (int j = 1; j <= std::min(J_, o.J_); ++j) add(l, j, o.at(l, j));
  }
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  SpectralField tmp = o;
  tmp *= -1.0;
  return *this += tmp;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& v : c_) v *= a;
  return *this;
}

// ---------------------------------------------------------------------------
// projections, norms, operators

bool mode_in(Subspace sub, int l, int j, int cutoff) {
  bool in_V = (l != 0) && (j == std::abs(l));
  switch (sub) {
    case Subspace::V:  return in_V;
    case Subspace::W:  return !in_V;
    case Subspace::V1: return in_V && std::abs(l) <= cutoff;
    case Subspace::V2: return in_V && std::abs(l) > cutoff;
    case Subspace::Pn:     return !in_V && std::abs(l) <= cutoff;
    case Subspace::PnPerp: return !in_V && std::abs(l) > cutoff;
  }
  return false;
}

SpectralField project(const SpectralField& u, Subspace sub, int cutoff) {
  SpectralField r(u.L(), u.J());
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j)
      if (mode_in(sub, l, j, cutoff)) r.set(l, j, u.at(l, j));
  return r;
}

double norm_sigma_s(const SpectralField& u, NormWeights w) {
  double total = 0.0;
  for (int l = -u.L(); l <= u.L(); ++l) {
    double h1 = 0.0;
    for (int j = 1; j <= u.J(); ++j) h1 += double(j) * j * std::norm(u.at(l, j));
    h1 *= kPi / 2.0;
    double lw = std::pow(std::abs(l), 2.0 * w.s);
    if (l == 0) lw = (w.s == 0.0) ? 1.0 : 0.0;
    total += std::exp(2.0 * w.sigma * std::abs(l)) * (lw + 1.0) * h1;
  }
  return std::sqrt(total);
}

double pairing_L2(const SpectralField& u, const SpectralField& v) {
  double total = 0.0;
  int L = std::min(u.L(), v.L()), J = std::min(u.J(), v.J());
  for (int l = -L; l <= L; ++l)
    for (int j = 1; j <= J; ++j) total += (u.at(l, j) * std::conj(v.at(l, j))).real();
  return kPi * kPi * total;
}

SpectralField inv_laplacian_V(const SpectralField& u) {
  SpectralField r(u.L(), u.J());
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j) {
      complexd v = u.at(l, j);
      if (v == complexd{0.0, 0.0}) continue;
      if (!mode_in(Subspace::V, l, j, 0))
        throw NotInSubspaceError("inv_laplacian_V: input not in V (support at j != |l|)");
      r.set(l, j, v / (2.0 * double(l) * l));
    }
  return r;
}

SpectralField apply_L_omega(const SpectralField& u, double omega) {
  SpectralField r(u.L(), u.J());
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j)
      r.set(l, j, (omega * omega * double(l) * l - double(j) * j) * u.at(l, j));
  return r;
}

SpectralField apply_L_inverse_W(const SpectralField& u) {
  SpectralField r(u.L(), u.J());
  for (int l = -u.L(); l <= u.L(); ++l)
    for (int j = 1; j <= u.J(); ++j) {
      complexd v = u.at(l, j);
      if (v == complexd{0.0, 0.0}) continue;
      if (j == std::abs(l))
        throw NotInSubspaceError("apply_L_inverse_W: input not in W (support at j = |l|)");
      r.set(l, j, v / (double(l) * l - double(j) * j));
    }
  return r;
}

double beta_value(BetaConvention conv, double tau) {
  return conv == BetaConvention::bracket_wss ? (2.0 - tau) / 2.0 : (2.0 - tau) / tau;
}

double bracket_norm(std::span<const BracketTerm> decomposition, double sigma, NormWeights w,
                    double tau, BetaConvention conv) {
  double expo = 2.0 * (tau - 1.0) / beta_value(conv, tau);
  double total = 0.0;
  for (const auto& term : decomposition) {
    if (term.sigma_i <= sigma) return std::numeric_limits<double>::infinity();
    NormWeights wi{term.sigma_i, w.s};
    total += norm_sigma_s(term.h, wi) / std::pow(term.sigma_i - sigma, expo);
  }
  return total;
}

}  // namespace resowave
