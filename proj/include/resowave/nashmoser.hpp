#pragma once

#include "resowave/linop.hpp"

// Range-equation iteration on the truncation scale W^(n), n = 1..n_max, with
// L_n = L0 2^n and shrinking analyticity widths sigma_{n+1} = sigma_n -
// gamma0/(n^2+1).  Each stage solves (P_n): L_omega w_n = eps P_n Pi_W
// Gamma(delta, v1, w_n) exactly (to tolerance) by the frozen-Jacobian
// contraction h -> h - L_n^{-1} F(w_{n-1} + h), after the stage's Melnikov
// acceptance test.  The finite-dimensional (Q1)-equation is continued in
// delta by a quasi-Newton corrector around the deepest accepted iterate.

namespace resowave {

struct SchemeParams {
  int N = 4;            // V1 cutoff
  int L0 = 2;           // base time truncation, L_n = L0 2^n
  double sigma_bar = std::log(2.0) / 4.0;  // analyticity width, default ln 2 / N
  double gamma0 = std::log(2.0) / (4.0 * 2.0 * 2.1);  // loss budget, sum <= sigma_bar/2
  double s = 1.0;
  double gamma = 0.05;  // Melnikov constant, in (0,1)
  double tau = 1.5;     // Diophantine exponent, in (1,2)
  double chi = 1.5;     // decay exponent, in (1,2)
  double mu = 1.0e3;    // bracket-norm cap (reported, not enforced a priori)
  int n_max = 3;
  double tol_q2 = 1e-12;
  double tol_stage = 1e-11;
  double tol_newton = 1e-10;
  double tol_residual = 1e-8;
  int oversample = 3;
  int J_margin = 12;  // J_n = L_n + J_margin
  double R = 0.0;     // V1 ball radius; 0 disables the ||v1|| <= 2R check
  BetaConvention beta_conv = BetaConvention::bracket_wss;
  double ln_floor = 1e-12;
  int threads = 1;

  int Ln(int n) const { return L0 << n; }
  int Jn(int n) const { return Ln(n) + J_margin; }
  double sigma_n(int n) const;
  void validate() const;
};

struct StageRecord {
  int n = 0;
  bool melnikov_accepted = false;
  MelnikovReport melnikov;
  double h_norm = 0.0;  // ||h_n||_{sigma_n, s}
  double contraction_rate = 0.0;
  double stage_residual = 0.0;  // ||L_omega w_n - eps P_n Pi_W Gamma||_{sigma_n, s}
  std::string note;
};

struct BranchPoint {
  double delta = 0.0, omega = 1.0, epsilon = 0.0;
  SpectralField v1, w, v2;
  bool accepted = false;  // every stage passed its Melnikov test and contracted
  int stages_completed = 0;
  double residual = std::numeric_limits<double>::infinity();  // full PDE defect
  double residual_Q1 = 0.0, residual_Q2 = 0.0, residual_P = 0.0;
  double m_value = 0.0;  // M(delta, v1, w) at the deepest iterate
  double bracket = 0.0;  // [w]_{sigma_bar/2, s} upper bound from the h_i decomposition
  std::vector<StageRecord> history;
};

/// Full scheme at fixed (delta, v1): w_0 = 0, stages n = 1..n_max.
BranchPoint nash_moser_solve(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                             const SchemeParams& prm);

/// Galerkin residual field of the rescaled equation, L_omega u - eps g(delta,x,u),
/// on the (L, J) truncation of u.
SpectralField residual_field(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                             int oversample = 3);
/// sigma,s-norm of the residual; delta is recovered from omega through the
/// spec's rescaling pathway.
double residual_norm(const NonlinearitySpec& spec, const SpectralField& u, double omega,
                     NormWeights weights, int oversample = 3);

/// Predictor-corrector continuation of the (Q1)-equation from the circle
/// representative vbar1, one BranchPoint per grid value.  Points past a Newton
/// breakdown are dropped (the branch ends at the last good delta).
std::vector<BranchPoint> continue_branch_Q1(const NonlinearitySpec& spec,
                                            const SpectralField& vbar1,
                                            std::span<const double> delta_grid,
                                            const SchemeParams& prm);

struct PhysicalSolution {
  double delta = 0.0, omega = 1.0;
  SpectralField u_tilde;               // delta (v1 + w + v2), 2pi-periodic
  double residual_physical = 0.0;      // || f-form defect ||_{sigma,s}
  double residual_rescaled = 0.0;      // || L_omega u - eps g ||_{sigma,s}
  double residual_grid_max = 0.0;      // sup over a sample grid
};

PhysicalSolution rescale_solution(const BranchPoint& point, const NonlinearitySpec& spec,
                                  NormWeights weights, int oversample = 3);

struct DecayFit {
  double chi_fit = 1.0;
  double slope = 0.0;      // of log h_i against chi_fit^i (negative = decay)
  double amplitude = 0.0;  // fitted log A
  double rms = 0.0;        // fit residual
};

/// Fit ||h_i|| <= A exp(-c chi^i): grid search over chi in (1,2), least squares
/// in (log A, c).
DecayFit fit_superexponential(std::span<const double> h_norms);

}  // namespace resowave
