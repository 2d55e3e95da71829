#include "resowave/nashmoser.hpp"

#include <cmath>
#include <thread>

namespace resowave {

double SchemeParams::sigma_n(int n) const {
  double sig = sigma_bar;
  for (int i = 0; i < n; ++i) sig -= gamma0 / (double(i) * i + 1.0);
  return sig;
}

void SchemeParams::validate() const {
  if (N < 1) throw std::invalid_argument("scheme: N must be >= 1");
  if (L0 < 1) throw std::invalid_argument("scheme: L0 must be >= 1");
  if (!(tau > 1.0 && tau < 2.0)) throw std::invalid_argument("scheme: tau must lie in (1,2)");
  if (!(chi > 1.0 && chi < 2.0)) throw std::invalid_argument("scheme: chi must lie in (1,2)");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("scheme: gamma must lie in [0,1)");
  if (sigma_bar <= 0.0) throw std::invalid_argument("scheme: sigma_bar must be positive");
  if (2.0 * s <= 1.0) throw std::invalid_argument("scheme: need 2s > 1 for the algebra norm");
  // total analyticity loss: sum_{n>=0} gamma0/(n^2+1) <= sigma_bar/2
  const double series = 2.0767;  // sum 1/(n^2+1), slight overestimate
  if (gamma0 * series > 0.5 * sigma_bar * (1.0 + 1e-12))
    throw std::invalid_argument("scheme: gamma0 too large, total loss exceeds sigma_bar/2");
  if (n_max < 1) throw std::invalid_argument("scheme: n_max must be >= 1");
}

namespace {

struct GammaEval {
  SpectralField gamma_field;  // Pi_W Galerkin(g) at the work truncation
  SpectralField v2;
  double rate;
};

// Gamma(delta, v1, w) = g(delta, x, v1 + w + v2(delta, v1, w))
GammaEval eval_Gamma(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                     const SpectralField& w, const Q2Params& q2, const SpectralField* v2_start) {
  Q2Result q = solve_Q2(spec, delta, v1, w, q2, v2_start);
  SpectralField u = v1.resized(q2.L, q2.J);
  u += w;
  u += q.v2;
  SpectralField g = eval_nonlinearity(spec, delta, u, q2.oversample, q2.L, q2.J);
  return {project(g, Subspace::W), std::move(q.v2), q.contraction_rate};
}

}  // namespace

SpectralField residual_field(const NonlinearitySpec& spec, double delta, const SpectralField& u,
                             int oversample) {
  double omega = spec.omega(delta);
  double eps = spec.epsilon(delta);
  SpectralField g = eval_nonlinearity(spec, delta, u, oversample);
  SpectralField r = apply_L_omega(u, omega);
  g *= eps;
  r -= g;
  return r;
}

double residual_norm(const NonlinearitySpec& spec, const SpectralField& u, double omega,
                     NormWeights weights, int oversample) {
  double eps = (omega * omega - 1.0) / 2.0;
  if (eps * spec.s_star < 0.0)
    throw std::invalid_argument("residual_norm: omega inconsistent with s_star");
  int q = (spec.pathway == NonlinearitySpec::Pathway::quadratic) ? 2 : spec.p - 1;
  double delta = std::pow(std::abs(eps), 1.0 / q);
  return norm_sigma_s(residual_field(spec, delta, u, oversample), weights);
}

BranchPoint nash_moser_solve(const NonlinearitySpec& spec, double delta, const SpectralField& v1,
                             const SchemeParams& prm) {
  prm.validate();
  BranchPoint bp;
  bp.delta = delta;
  bp.omega = spec.omega(delta);
  bp.epsilon = spec.epsilon(delta);

  if (prm.R > 0.0) {
    double nv1 = norm_sigma_s(v1, {0.0, prm.s});
    if (nv1 > 2.0 * prm.R)
      throw std::invalid_argument("nash_moser_solve: ||v1||_{0,s} exceeds 2R");
  }

  int Lw = std::max(prm.Ln(prm.n_max), prm.N);
  int Jw = prm.Jn(prm.n_max);
  Q2Params q2;
  q2.N = prm.N;
  q2.L = Lw;
  q2.J = Jw;
  q2.tol = prm.tol_q2;
  q2.oversample = prm.oversample;
  q2.norm = NormWeights{0.0, prm.s};

  bp.v1 = v1.resized(Lw, Jw);
  bp.w = SpectralField(Lw, Jw);

  if (delta == 0.0) {
    // eps = 0 kills the range equation: w = 0 immediately
    Q2Result q = solve_Q2(spec, 0.0, bp.v1, bp.w, q2);
    bp.v2 = std::move(q.v2);
    bp.accepted = true;
    bp.stages_completed = 0;
  } else {
    SpectralField v2_warm(Lw, Jw);
    bool have_warm = false;
    std::vector<BracketTerm> decomposition;
    for (int n = 1; n <= prm.n_max; ++n) {
      StageRecord rec;
      rec.n = n;
      int Ln = prm.Ln(n), Jn = prm.Jn(n);
      double sig_n = prm.sigma_n(n);
      NormWeights stage_norm{sig_n, prm.s};

      LnAssemblyParams lp;
      lp.N = prm.N;
      lp.L_work = Lw;
      lp.J_work = Jw;
      lp.oversample = prm.oversample;
      lp.q2_tol = prm.tol_q2;
      LnOperator op = assemble_Ln(spec, delta, bp.v1, bp.w, Ln, Jn, lp);
      bp.m_value = op.M_value;

      rec.melnikov = melnikov_test(delta, spec, op.M_value, Ln, prm.gamma, prm.tau);
      rec.melnikov_accepted = rec.melnikov.accepted;
      if (!rec.melnikov.accepted) {
        rec.note = "melnikov rejection";
        bp.history.push_back(std::move(rec));
        bp.accepted = false;
        break;
      }

      Eigen::MatrixXcd Linv;
      try {
        Linv = invert_Ln_direct(op, prm.ln_floor);
      } catch (const ResonantLinearizationError& e) {
        rec.note = e.what();
        rec.melnikov_accepted = false;
        bp.history.push_back(std::move(rec));
        bp.accepted = false;
        break;
      }

      // frozen-Jacobian contraction for h in W^(n)
      SpectralField h(Ln, Jn);
      double prev_diff = -1.0;
      bool contracted = false;
      for (int it = 0; it < 80; ++it) {
        SpectralField wtrial = bp.w;
        wtrial += h.resized(Lw, Jw);
        GammaEval ge = eval_Gamma(spec, delta, bp.v1, wtrial, q2, have_warm ? &v2_warm : nullptr);
        v2_warm = ge.v2;
        have_warm = true;
        SpectralField F = apply_L_omega(wtrial.resized(Ln, Jn), bp.omega);
        SpectralField rhs = project(ge.gamma_field, Subspace::Pn, Ln).resized(Ln, Jn);
        rhs *= bp.epsilon;
        F -= rhs;
        double fres = norm_sigma_s(F, stage_norm);
        if (fres <= prm.tol_stage) {
          rec.stage_residual = fres;
          contracted = true;
          break;
        }
        Eigen::VectorXcd dvec = Linv * field_to_vec(F, op.basis);
        SpectralField d = vec_to_field(dvec, op.basis, Ln, Jn);
        h -= d;
        double diff = norm_sigma_s(d, stage_norm);
        if (prev_diff > 0.0) {
          double r = diff / prev_diff;
          rec.contraction_rate = std::max(rec.contraction_rate, r);
          if (r >= 1.0 && diff > 1e-13) {
            rec.note = "stage contraction failed (rate " + std::to_string(r) +
                       "): smallness condition |eps| gamma^{-1} <= eps0 violated";
            break;
          }
        }
        prev_diff = diff;
      }
      if (!contracted) {
        if (rec.note.empty()) rec.note = "stage iteration did not converge";
        bp.history.push_back(std::move(rec));
        bp.accepted = false;
        break;
      }
      rec.h_norm = norm_sigma_s(h, stage_norm);
      decomposition.push_back({h, sig_n});
      bp.w += h.resized(Lw, Jw);
      bp.stages_completed = n;
      bp.history.push_back(std::move(rec));
      bp.accepted = (n == prm.n_max);
    }
    Q2Result q = solve_Q2(spec, delta, bp.v1, bp.w, q2, have_warm ? &v2_warm : nullptr);
    bp.v2 = std::move(q.v2);
    bp.bracket = bracket_norm(decomposition, 0.5 * prm.sigma_bar, NormWeights{0.0, prm.s},
                              prm.tau, prm.beta_conv);
  }

  // full residual at the truncation, measured at the limit width sigma_bar/2
  SpectralField u = bp.v1;
  u += bp.w;
  u += bp.v2;
  NormWeights rw{0.5 * prm.sigma_bar, prm.s};
  SpectralField res = residual_field(spec, delta, u, prm.oversample);
  bp.residual = norm_sigma_s(res, rw);
  bp.residual_Q1 = norm_sigma_s(project(res, Subspace::V1, prm.N), rw);
  bp.residual_Q2 = norm_sigma_s(project(res, Subspace::V2, prm.N), rw);
  bp.residual_P = norm_sigma_s(project(res, Subspace::W), rw);
  return bp;
}

namespace {

// one quasi-Newton pass on the (Q1)-map with w frozen:
//   H(v1) = -Delta v1 - Pi_V1 g(delta, v1 + w + v2(delta, v1, w))
// using the approximate Jacobian -Delta - Pi_V1 (a .)|_V1 and a bordered
// phase row. Returns the V1 residual norm after the step.
double q1_newton_step(const NonlinearitySpec& spec, double delta, SpectralField& v1,
                      const SpectralField& w, const SchemeParams& prm, const Q2Params& q2) {
  int N = prm.N;
  auto q1_map = [&](const SpectralField& v1c) {
    Q2Result q = solve_Q2(spec, delta, v1c, w, q2);
    SpectralField u = v1c.resized(q2.L, q2.J);
    u += w;
    u += q.v2;
    SpectralField g = eval_nonlinearity(spec, delta, u, q2.oversample, q2.L, q2.J);
    SpectralField H(q2.L, q2.J);
    for (int l = -N; l <= N; ++l) {
      int j = std::abs(l);
      if (l != 0 && j <= q2.J) H.set(l, j, 2.0 * double(l) * l * v1c.at(l, j));
    }
    H -= project(g, Subspace::V1, N);
    return std::pair{H, u};
  };

  auto [H0, upt] = q1_map(v1);
  Eigen::VectorXd rhsv = v_dofs_pack_gradient(H0, N);

  // approximate Jacobian columns through the multiplication by du g at upt
  int n = 2 * N;
  Eigen::MatrixXd J(n, n);
  Fourier2D A = nonlinearity_derivative_table(spec, delta, upt, prm.oversample);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(k) = 1.0;
    SpectralField ek = v_field_from_dofs(e, N, q2.L, q2.J);
    SpectralField col(q2.L, q2.J);
    for (int l = -N; l <= N; ++l) {
      int j = std::abs(l);
      if (l != 0 && j <= q2.J) col.set(l, j, 2.0 * double(l) * l * ek.at(l, j));
    }
    // Pi_V1 (a e_k) from the exact multiplication integrals
    SpectralField me(q2.L, q2.J);
    for (int l = -N; l <= N; ++l) {
      if (l == 0) continue;
      int j = std::abs(l);
      if (j > q2.J) continue;
      complexd acc{0.0, 0.0};
      for (int lp = -N; lp <= N; ++lp) {
        if (lp == 0) continue;
        int jp = std::abs(lp);
        if (std::abs(l - lp) > A.Lt) continue;
        XTrig prof = A.x_profile(l - lp);
        acc += ((prof.integral_cos(std::abs(j - jp)) - prof.integral_cos(j + jp)) / kPi) *
               ek.at(lp, jp);
      }
      me.set(l, j, acc);
    }
    col -= me;
    J.col(k) = v_dofs_pack_gradient(col, N);
  }

  Eigen::VectorXd x = v_dofs_from_field(v1, N);
  Eigen::VectorXd b = v_dofs_phase_direction(x, N);
  if (b.norm() > 0) b.normalize();
  Eigen::MatrixXd Ab(n + 1, n + 1);
  Ab.topLeftCorner(n, n) = J;
  Ab.topRightCorner(n, 1) = b;
  Ab.bottomLeftCorner(1, n) = b.transpose();
  Ab(n, n) = 0.0;
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = -rhsv;
  rhs(n) = 0.0;
  Eigen::VectorXd sol = Ab.fullPivLu().solve(rhs);
  x += sol.head(n);
  v1 = v_field_from_dofs(x, N, v1.L(), v1.J());
  return norm_sigma_s(q1_map(v1).first, NormWeights{0.0, prm.s});
}

}  // namespace

std::vector<BranchPoint> continue_branch_Q1(const NonlinearitySpec& spec,
                                            const SpectralField& vbar1,
                                            std::span<const double> delta_grid,
                                            const SchemeParams& prm) {
  prm.validate();
  std::vector<BranchPoint> branch;
  int Lw = std::max(prm.Ln(prm.n_max), prm.N);
  int Jw = prm.Jn(prm.n_max);
  Q2Params q2;
  q2.N = prm.N;
  q2.L = Lw;
  q2.J = Jw;
  q2.tol = prm.tol_q2;
  q2.oversample = prm.oversample;
  q2.norm = NormWeights{0.0, prm.s};

  SpectralField v1 = vbar1.resized(Lw, Jw);
  for (double delta : delta_grid) {
    bool converged = false;
    BranchPoint bp;
    for (int outer = 0; outer < 14; ++outer) {
      bp = nash_moser_solve(spec, delta, v1, prm);
      double res = std::numeric_limits<double>::infinity();
      for (int inner = 0; inner < 10; ++inner) {
        res = q1_newton_step(spec, delta, v1, bp.w, prm, q2);
        if (res <= 0.2 * prm.tol_newton) break;
      }
      if (!std::isfinite(res) || res > 1e3) break;  // Newton divergence
      // outer convergence: v1 consistent with the deepest iterate's w
      SpectralField dv = v1;
      dv -= bp.v1;
      if (norm_sigma_s(dv, {0.0, prm.s}) <= prm.tol_newton && res <= prm.tol_newton) {
        converged = true;
        break;
      }
    }
    if (!converged) break;  // branch terminated at the last good delta
    bp = nash_moser_solve(spec, delta, v1, prm);
    branch.push_back(std::move(bp));
  }
  return branch;
}

PhysicalSolution rescale_solution(const BranchPoint& point, const NonlinearitySpec& spec,
                                  NormWeights weights, int oversample) {
  PhysicalSolution out;
  out.delta = point.delta;
  out.omega = point.omega;
  SpectralField u = point.v1;
  u += point.w;
  u += point.v2;
  out.u_tilde = u;
  out.u_tilde *= point.delta;

  SpectralField res = residual_field(spec, point.delta, u, oversample);
  out.residual_rescaled = norm_sigma_s(res, weights);
  // the f-form defect of the unrescaled equation is delta times the g-form one
  SpectralField phys = res;
  phys *= point.delta;
  out.residual_physical = norm_sigma_s(phys, weights);

  auto [nt, nx] = grid_sizes(phys.L(), phys.J(), 2);
  TensorGrid grid(nt, nx);
  out.residual_grid_max = grid.synth(phys).cwiseAbs().maxCoeff();
  return out;
}

DecayFit fit_superexponential(std::span<const double> h_norms) {
  std::vector<double> y;
  std::vector<int> idx;
  for (size_t i = 0; i < h_norms.size(); ++i)
    if (h_norms[i] > 0.0) {
      y.push_back(std::log(h_norms[i]));
      idx.push_back(static_cast<int>(i) + 1);
    }
  DecayFit fit;
  if (y.size() < 2) return fit;
  double best_rms = std::numeric_limits<double>::infinity();
  for (double chi = 1.01; chi < 2.0; chi += 0.005) {
    // least squares y ~ a - c chi^i
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(y.size());
    for (int i = 0; i < n; ++i) {
      double xv = std::pow(chi, idx[i]);
      sx += xv;
      sy += y[i];
      sxx += xv * xv;
      sxy += xv * y[i];
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-30) continue;
    double slope = (n * sxy - sx * sy) / det;
    double a = (sy - slope * sx) / n;
    double rms = 0;
    for (int i = 0; i < n; ++i) {
      double e = y[i] - (a + slope * std::pow(chi, idx[i]));
      rms += e * e;
    }
    rms = std::sqrt(rms / n);
    if (rms < best_rms) {
      best_rms = rms;
      fit = {chi, slope, a, rms};
    }
  }
  return fit;
}

}  // namespace resowave
