#pragma once

#include <optional>

#include "resowave/grid.hpp"

// When does int_Omega a(x) v^q vanish for every v in the d'Alembertian kernel?
// Exactly when a has the wrong parity about x = pi/2: for even q when a is
// antisymmetric, for odd q when a is symmetric.  This drives the selection of
// the sign s* and of the rescaling pathway.

namespace resowave {

struct ParityVerdict {
  int q = 0;
  double symmetric_defect = 0.0;      // max |a(pi-x) - a(x)|
  double antisymmetric_defect = 0.0;  // max |a(pi-x) + a(x)|
  bool vanishes_on_V = false;
  std::optional<SpectralField> witness;  // maximizer of |int a v^q| among trials
  double witness_integral = 0.0;
  std::optional<int> s_star;
};

ParityVerdict parity_classify(const TrigPolynomial& a, int q, double tol = 1e-9,
                              int trials = 16, uint64_t seed = 20240401,
                              double witness_tol = 1e-6);

struct ApResult {
  bool holds = false;
  SpectralField witness;
  double integral = 0.0;  // the extremal signed value
  int s_star = +1;
};

/// Maximizes |int_Omega a_p v^{p+1}| over deterministic and seeded random
/// v in V at the given truncation; picks s* = +1 when a positive value is
/// attainable.
ApResult integral_condition_ap(const TrigPolynomial& ap, int p, int trials, int truncation,
                               uint64_t seed = 20240402, double tol = 1e-9);

struct VqAuditRow {
  int sample;
  int q;
  bool matching_part;         // true: the parity-matching component was tested
  double part_norm;           // max_abs of the tested component
  double max_abs_integral;
  bool classified_correctly;
};

struct VqAudit {
  std::vector<VqAuditRow> rows;
  int misclassified = 0;
};

/// Random trig polynomials split into symmetric/antisymmetric parts: the
/// matching part must integrate to ~0 against every sampled v^q, the
/// mismatching part must admit a witness above 100x the tolerance.
VqAudit vq_equivalence_audit(int random_a_count, std::span<const int> q_list, int truncation,
                             double tol, uint64_t seed = 20240403);

}  // namespace resowave
