#pragma once

#include <cstdint>
#include <vector>

#include "reachtime/matrix.hpp"

namespace reachtime {

/// One affine constraint: constant + sum_i x_i * coefficients[i] must be PSD.
struct ConstraintBlock {
  SymMatrix constant;
  std::vector<SymMatrix> coefficients;  // one per decision variable; zero matrices allowed
};

/// Linear SDP over scalar decision variables:
///   minimize objective . x  subject to every block PSD at x.
/// Scalar lower bounds are folded in by the builders as 1x1 blocks.
struct LinearMatrixProgram {
  std::size_t var_count = 0;
  Vec objective;
  std::vector<ConstraintBlock> blocks;

  void validate() const;  // throws InvalidInputError on malformed programs
};

enum class SolveStatus { optimal, infeasible, numerical_failure };
const char* to_string(SolveStatus s);

struct SdpOptions {
  double tolerance = 1e-7;   // relative duality/KKT target
  int max_iterations = 600;  // total Newton steps across both phases
};

struct SdpSolution {
  Vec x;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  double min_block_margin = 0.0;   // smallest eigenvalue across blocks at x
  double kkt_residual = 0.0;       // max of relative duality gap and dual residual
  double infeasibility_certificate = 0.0;  // best achievable margin when infeasible
  int newton_iterations = 0;
};

/// Log-barrier path-following solve with a margin-maximizing phase I.
SdpSolution solve(const LinearMatrixProgram& prob, const SdpOptions& opts = {});

SymMatrix evaluate_block(const ConstraintBlock& b, const Vec& x);

/// min over blocks of min_eig(constant + sum_i x_i coefficients[i]);
/// the independent recheck used on every returned certificate.
double feasibility_margin(const LinearMatrixProgram& prob, const Vec& x);

}  // namespace reachtime
