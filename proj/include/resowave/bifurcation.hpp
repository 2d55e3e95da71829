#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "resowave/grid.hpp"

// Variational side of the problem: the functional Phi0 whose Euler-Lagrange
// equation is the 0th-order bifurcation equation -Delta v = Pi_V(s* a_p v^p),
// the contraction solving the (Q2)-equation, the reduced functional Psi0 on
// the low-frequency kernel block V1, the subharmonic embedding H_n, and the
// one-dimensional reduced functionals of the cubic and quadratic cases.

namespace resowave {

/// Real 2pi-periodic loop with zero mean: eta(t) = sum_m a_m cos(mt) + b_m sin(mt).
struct LoopFunction {
  std::vector<double> a, b;  // m = 1..M

  int M() const { return static_cast<int>(std::max(a.size(), b.size())); }
  double eval(double t) const;
  double coeff_a(int m) const { return m <= static_cast<int>(a.size()) ? a[m - 1] : 0.0; }
  double coeff_b(int m) const { return m <= static_cast<int>(b.size()) ? b[m - 1] : 0.0; }
  double norm_L2() const;  // sqrt(pi sum (a^2+b^2))
};

/// v(t,x) = eta(t+x) - eta(t-x); mode (m,m) carries b_m + i a_m.
SpectralField loop_to_V(const LoopFunction& eta, int L = -1, int J = -1);
LoopFunction loop_from_V(const SpectralField& v);

/// Subharmonic embedding: coefficient at (l,|l|) moves to (n l, n |l|).
/// Throws std::invalid_argument naming the required truncation on overflow.
SpectralField embed_Hn(const SpectralField& v, int n, int Lout = -1, int Jout = -1);

// ---------------------------------------------------------------------------
// Phi0 and the (Q2)-equation

struct Phi0Result {
  double value;
  SpectralField gradient;  // in V, L2(Omega) pairing realization
  std::function<SpectralField(const SpectralField&)> hessian_action;
};

/// Phi0(v) = ||v||_H1^2/2 - int_Omega s* a_p v^{p+1}/(p+1) on V.
Phi0Result phi0(const SpectralField& v, const NonlinearitySpec& spec, int oversample = 3);

struct Q2Params {
  int N = 4;       // V1 cutoff
  int L = 16;      // working truncation
  int J = 16;
  double tol = 1e-12;
  int max_iter = 400;
  int oversample = 3;
  NormWeights norm{0.0, 1.0};
};

struct Q2Result {
  SpectralField v2;
  double contraction_rate;  // max observed ratio of successive differences
  int iterations;
};

struct Q2ContractionError : std::runtime_error {
  Q2ContractionError(const std::string& m, double r) : std::runtime_error(m), rate(r) {}
  double rate;
};

/// Fixed point of v2 -> (-Delta)^{-1} Pi_V2 g(delta, x, v1 + w + v2).
Q2Result solve_Q2(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                  const SpectralField& w, const Q2Params& q2,
                  const SpectralField* start = nullptr);

/// Directional derivative dv2/dw [h] (also used for dv2/dv1), solving the
/// linearized fixed-point equation with the same contraction.
SpectralField dv2_direction(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                            const SpectralField& h, const Q2Params& q2);

struct Psi0Result {
  double value;
  SpectralField gradient;  // in V1
  SpectralField v2;        // the slaved component v2(0, v1, 0)
};

/// Psi0(v1) = Phi0(v1 + v2(0,v1,0)); gradient through the tangency identity
/// (no dv2 term).
Psi0Result reduced_psi0(const SpectralField& v1, const NonlinearitySpec& spec,
                        const Q2Params& q2);

// ---------------------------------------------------------------------------
// Critical circles

/// A functional on R^n with a circle symmetry generated by time translation.
/// DOF coordinates are scaled so the Euclidean inner product realizes the L2
/// pairing of the underlying fields.
class CircleProblem {
 public:
  virtual ~CircleProblem() = default;
  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  /// d/dtheta (theta * x) at theta = 0
  virtual Eigen::VectorXd phase_direction(const Eigen::VectorXd& x) const = 0;
};

struct CircleSearchParams {
  double newton_tol = 1e-12;
  double gap_threshold = 0.1;
  int max_newton = 80;
  int max_descent = 600;
  double descent_grad_tol = 1e-4;
  double nontrivial_tol = 1e-6;
};

struct CriticalCircle {
  Eigen::VectorXd dofs;
  double value = 0.0;
  double grad_norm = 0.0;
  int kernel_dim_mod_translation = 0;
  double second_eigenvalue_gap = 0.0;
  int seed_index = -1;
};

struct CircleSearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mountain-pass search: Nehari ray scaling, projected descent, then Newton
/// with the phase fixed by a bordered row orthogonal to the translation
/// direction.  Certifies nondegeneracy of the Hessian modulo translation.
/// Throws CircleSearchError if no seed converges to a nontrivial
/// nondegenerate point.
CriticalCircle find_critical_circle(const CircleProblem& prob,
                                    std::span<const Eigen::VectorXd> seeds,
                                    const CircleSearchParams& params, int threads = 1);

/// Phi0 over the V-truncation l = 1..Lv (DOFs: sqrt(2)/pi * cos/sin basis).
class Phi0Problem : public CircleProblem {
 public:
  Phi0Problem(const NonlinearitySpec& spec, int Lv, int oversample = 3);
  int dim() const override { return 2 * Lv_; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd phase_direction(const Eigen::VectorXd& x) const override;
  SpectralField unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack_gradient(const SpectralField& g) const;

 private:
  NonlinearitySpec spec_;
  int Lv_, oversample_;
};

/// Reduced functional Psi0 over V1 (2N DOFs); Hessian includes the dv2 chain
/// term computed through the linearized (Q2) solve.
class Psi0Problem : public CircleProblem {
 public:
  Psi0Problem(const NonlinearitySpec& spec, const Q2Params& q2);
  int dim() const override { return 2 * q2_.N; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd phase_direction(const Eigen::VectorXd& x) const override;
  SpectralField unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack_gradient(const SpectralField& g) const;

 private:
  NonlinearitySpec spec_;
  Q2Params q2_;
};

// ---------------------------------------------------------------------------
// Reduced one-dimensional functionals

struct LoopFunctionalResult {
  double value;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Psi(eta) = 1/2 int eta'^2 - 1/4 int eta^4 - (3/8pi) (int eta^2)^2,
/// in normalized loop DOFs x = sqrt(pi) (a_m, b_m).
LoopFunctionalResult psi_cubic_core(const Eigen::VectorXd& x);

/// R_n(v) = (1/8pi) int_Omega b(x) (H_n v)^4 with b = a3/<a3> - 1 and
/// v the loop field of eta.  Throws if <a3> = 0.
LoopFunctionalResult cubic_remainder_Rn(const Eigen::VectorXd& x, int n,
                                        const TrigPolynomial& a3, int oversample = 3);

/// Psi(eta) = 1/2 int eta'^2 - 1/4 (int eta^2)^2 (quadratic case).
LoopFunctionalResult psi_quadratic(const Eigen::VectorXd& x);
/// L2 norm of the Euler-Lagrange residual eta'' + (int eta^2) eta.
double psi_quadratic_el_residual(const Eigen::VectorXd& x);

/// Phi0 of the quadratic case: ||v||_H1^2/2 + (a2^2/2) int v^2 L^{-1} Pi_W v^2,
/// evaluated at the (Lq, Jq) working truncation.
double phi0_quadratic(const SpectralField& v, double a2, int Lq, int Jq, int oversample = 3);

/// Search functional Psi + R_n of the cubic case over loop DOFs.
class PsiCubicProblem : public CircleProblem {
 public:
  PsiCubicProblem(int n, const TrigPolynomial& a3, int M, int oversample = 3);
  int dim() const override { return 2 * M_; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd phase_direction(const Eigen::VectorXd& x) const override;

 private:
  int n_, M_, oversample_;
  TrigPolynomial a3_;
  bool has_remainder_;
};

class PsiQuadraticProblem : public CircleProblem {
 public:
  explicit PsiQuadraticProblem(int M) : M_(M) {}
  int dim() const override { return 2 * M_; }
  double value(const Eigen::VectorXd& x) const override { return psi_quadratic(x).value; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return psi_quadratic(x).gradient;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    return psi_quadratic(x).hessian;
  }
  Eigen::VectorXd phase_direction(const Eigen::VectorXd& x) const override;

 private:
  int M_;
};

/// Normalized loop DOFs <-> LoopFunction
LoopFunction loop_from_dofs(const Eigen::VectorXd& x);
Eigen::VectorXd dofs_from_loop(const LoopFunction& eta, int M);
/// translation phase direction in loop DOFs
Eigen::VectorXd loop_phase_direction(const Eigen::VectorXd& x);

/// L2-normalized V-block DOFs (cos/sin per frequency l = 1..Lmax) <-> fields
SpectralField v_field_from_dofs(const Eigen::VectorXd& x, int Lmax, int L, int J);
Eigen::VectorXd v_dofs_from_field(const SpectralField& v, int Lmax);
/// gradient field -> DOF gradient under the L2 pairing
Eigen::VectorXd v_dofs_pack_gradient(const SpectralField& g, int Lmax);
Eigen::VectorXd v_dofs_phase_direction(const Eigen::VectorXd& x, int Lmax);

}  // namespace resowave
