#pragma once

#include <Eigen/Dense>

#include "resowave/bifurcation.hpp"
#include "resowave/grid.hpp"

// The linearized operator at a Nash-Moser stage, acting on the time-truncated
// block W^(n) (|l| <= L_n, sine modes j != |l|):
//
//   L_n h = D h - M1 h - M2 h,
//   D  h  = L_omega h - eps P_n Pi_W (a0(x) h),
//   M1 h  = eps P_n Pi_W (abar(t,x) h),          abar = a - a0,
//   M2 h  = eps P_n Pi_W (a(t,x) dv2/dw [h]),
//
// with a(t,x) = du g at the current point.  D diagonalizes per time frequency
// k through the Sturm-Liouville operators S_k = -d_xx + eps pi_k(a0 .) on
// F_k, and the structured inverse |D|^{-1/2} (U - R1 - R2)^{-1} |D|^{-1/2}
// is compared against a direct dense factorization.

namespace resowave {

struct EigenSystem {
  int k = 0;
  double epsilon = 0.0;
  std::vector<int> modes;   // sine labels j, ascending, j != |k|
  Eigen::VectorXd lambda;   // ascending; |lambda(i) - modes[i]^2| <= |eps| max|a0|
  Eigen::MatrixXd vectors;  // orthonormal columns in sine coordinates

  int index_of(int j) const;
  double lambda_j(int j) const { return lambda(index_of(j)); }
  /// eigenvector as L2-normalized sine coefficients
  Eigen::VectorXd phi_j(int j) const { return std::sqrt(2.0 / kPi) * vectors.col(index_of(j)); }
};

/// Spectrum of S_k on the J-mode sine Galerkin truncation of F_k.
/// Requires |eps| max|a0| < 1 so <.,.>_eps is a scalar product.
EigenSystem eigen_Sk(int k, double epsilon, const TrigPolynomial& a0, int J);

/// Extended-precision recomputation of the eigenvalues (diagnostics).
std::vector<long double> eigen_Sk_lambda_ext(int k, double epsilon, const TrigPolynomial& a0,
                                             int J);

struct AlphaResult {
  double value;
  int argmin_j;
};

/// alpha_k = min_{j != |k|} |omega^2 k^2 - lambda_{k,j}|.  Throws if the
/// minimum sits on the truncation boundary.
AlphaResult alpha_k(const EigenSystem& eigs, double omega);

struct MelnikovViolation {
  int k, j;
  int family;  // 1: |omega k - j|, 2: |omega k - j - eps M/(2j)|
  double margin;
};

struct MelnikovReport {
  bool accepted = true;
  std::vector<MelnikovViolation> violations;
  double gamma = 0.0, tau = 1.5;
  int Ln = 0;
  double delta = 0.0, omega = 1.0, epsilon = 0.0, M_value = 0.0;
};

/// First-order Melnikov conditions over 1/(3|eps|) < k <= L_n, j <= 2 L_n,
/// k != j.  gamma_factor = 2 gives the doubled-gamma convention.
MelnikovReport melnikov_test(double delta, const NonlinearitySpec& spec, double M_value, int Ln,
                             double gamma, double tau);

struct ResonantLinearizationError : std::runtime_error {
  ResonantLinearizationError(const std::string& m, int k_, int j_, double v)
      : std::runtime_error(m), k(k_), j(j_), value(v) {}
  int k, j;
  double value;
};

struct LnOperator {
  int Ln = 0, J = 0;
  double delta = 0.0, omega = 1.0, epsilon = 0.0;
  std::vector<std::pair<int, int>> basis;  // (l, j)
  Eigen::MatrixXcd D, M1, M2;
  std::vector<EigenSystem> eigs;  // index |k| = 0..Ln
  TrigPolynomial a0;
  double M_value = 0.0;  // mean of a over Omega

  Eigen::MatrixXcd matrix() const { return D - M1 - M2; }
  int index_of(int l, int j) const;
  int dim() const { return static_cast<int>(basis.size()); }
};

struct LnAssemblyParams {
  int N = 4;        // V1/V2 cutoff for the slaved component
  int L_work = 16;  // working truncation for v2 and the coefficient a(t,x)
  int J_work = 16;
  int oversample = 3;
  double q2_tol = 1e-12;
};

/// Assembles D, M1, M2 at the point (delta, v1, w); v2 is re-solved internally.
LnOperator assemble_Ln(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                       const SpectralField& w, int Ln, int J, const LnAssemblyParams& prm);

/// Dense factorization; throws ResonantLinearizationError when a divisor of D
/// falls below floor_rel * max(1, omega^2 k^2).
Eigen::MatrixXcd invert_Ln_direct(const LnOperator& op, double floor_rel = 1e-12);

/// |D|^{-1/2} (U - R1 - R2)^{-1} |D|^{-1/2} with the middle inverse summed as
/// a U^{-1}-preconditioned Neumann series.
Eigen::MatrixXcd invert_Ln_structured(const LnOperator& op, double floor_rel = 1e-12,
                                      double series_tol = 1e-15);

/// Pieces of the structured factorization, exposed for audits.
struct StructuredParts {
  Eigen::MatrixXcd Dhalf_inv, U, R1, R2;
};
StructuredParts structured_parts(const LnOperator& op, double floor_rel = 1e-12);

/// Weighted operator norm sigma,s -> sigma,s on the block basis.
double op_norm_sigma_s(const Eigen::MatrixXcd& A, std::span<const std::pair<int, int>> basis,
                       NormWeights w);
/// Norm as a map (sigma, s_in) -> (sigma, s_out).
double op_norm_sigma_s(const Eigen::MatrixXcd& A, std::span<const std::pair<int, int>> basis,
                       double sigma, double s_out, double s_in);

Eigen::VectorXcd field_to_vec(const SpectralField& u,
                              std::span<const std::pair<int, int>> basis);
SpectralField vec_to_field(const Eigen::VectorXcd& v,
                           std::span<const std::pair<int, int>> basis, int L, int J);

// ---------------------------------------------------------------------------
// small-divisor audit

struct SmallDivisorRow {
  int k, l;
  double alpha_k, alpha_l;
  double bound, ratio;
  int case_id;  // 1..4, the proof classification
};

struct SmallDivisorAudit {
  std::vector<SmallDivisorRow> rows;
  double C_overall = 0.0;
  std::array<double, 5> C_case{};   // index 1..4
  std::array<int, 5> case_count{};  // index 1..4
  std::vector<SmallDivisorRow> violations;  // rows with ratio > c_ref (if c_ref > 0)
  double gamma, tau, epsilon, beta;
  BetaConvention convention;
};

/// Exhaustive pair scan |k|,|l| <= L of 1/(alpha_k alpha_l) against
/// C |k-l|^{2(tau-1)/beta} / (gamma^2 |eps|^{tau-1}).
SmallDivisorAudit smalldivisor_audit(const TrigPolynomial& a0, double epsilon, double omega,
                                     int L, int Jext, double gamma, double tau,
                                     BetaConvention conv, double c_ref = 0.0,
                                     bool extended_precision = false);

/// Fitted constants of the operator-norm bounds entering the structured
/// inversion: |D|^{-1/2}, U^{-1}, R1, R2.
struct OperatorBoundFits {
  double C_dhalf;   // ||D^{-1/2}||_{s+k' <- s} * sqrt(gamma)
  double C_uinv;    // (||U^{-1}|| - 1) / (|eps| ||a0||_H1)
  double C_R1;      // ||R1|| * gamma / |eps|^{(3-tau)/2}
  double C_R2;      // ||R2|| * gamma / |eps|
  double a0_h1;
};
OperatorBoundFits fit_operator_bounds(const LnOperator& op, double gamma, double tau,
                                      NormWeights base);

}  // namespace resowave
