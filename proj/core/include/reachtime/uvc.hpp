#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reachtime/model.hpp"
#include "reachtime/sdp.hpp"

namespace reachtime {

// Unit-vector design route. Quadratic Lyapunov function; the design LMIs work
// in the scaled variables Z = P^{-1}, Y = K P^{-1} for a fixed line-search
// scalar rho, and the certified bound is t_bound = sqrt(theta).

struct UvcCertificate {
  SymMatrix z;  // n x n positive definite
  Matrix y;     // m x n
  double mu = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  Matrix gain;           // K = Y Z^{-1}
  double t_bound = 0.0;  // sqrt(theta)
  std::optional<double> alpha_u;
  double delta = 0.0;

  double margin = 0.0;
  double hull_audit_worst = 0.0;
  bool conditioning_warning = false;
};

struct UvcAnalysisResult {
  SymMatrix p;  // scaled quadratic weight
  double nu = 0.0;
  double rho = 0.0;
  double t_bound = 0.0;  // sqrt(sigma0^T P sigma0)
};

struct RhoSweepPoint {
  double rho = 0.0;
  bool feasible = false;
  double theta = 0.0;  // valid when feasible
};

struct RhoSweep {
  std::vector<RhoSweepPoint> points;  // rho strictly increasing
};

struct UvcSynthOptions {
  SdpOptions sdp{};
  int grid_points = 40;       // coarse log-spaced scan
  double rho_rel_tol = 1e-3;  // golden-section refinement target on |drho|/rho
  int audit_samples = 50;
  std::uint64_t audit_seed = 12345;
};

struct UvcInnerSolution {
  bool feasible = false;
  double theta = 0.0;
  SymMatrix z;
  Matrix y;
  double mu = 0.0;
  SdpSolution solution;
};

struct UvcSynthesisResult {
  std::optional<UvcCertificate> certificate;
  SdpSolution solution;  // diagnostics of the solve at the chosen rho
  std::string note;
};

struct UvcAnalysisOutcome {
  std::optional<UvcAnalysisResult> result;
  SdpSolution solution;
  std::string note;
};

/// Inner program for fixed rho: N vertex blocks (3n, or 2n when delta = 0),
/// reaching block (n+1), optional control-budget block, positivity bounds.
/// Variables: upper triangle of Z, Y row-major, mu, theta. The auxiliary
/// matrix variable of the analysis route is eliminated at its binding value
/// rho P + rho^{-1} I before assembly.
LinearMatrixProgram build_uvc_inner(const PolytopicPlant& plant, const Vec& sigma0,
                                    double rho, std::optional<double> alpha_u);

UvcInnerSolution solve_uvc_inner(const PolytopicPlant& plant, const Vec& sigma0,
                                 double rho, std::optional<double> alpha_u,
                                 const SdpOptions& opts = {});

/// Outer line search on rho: log-spaced grid scan then golden-section
/// refinement around the best grid point, falling back to the best evaluated
/// point if the profile is not unimodal.
UvcSynthesisResult synthesize_uvc(const PolytopicPlant& plant, const Vec& sigma0,
                                  double rho_lo, double rho_hi,
                                  std::optional<double> alpha_u,
                                  const UvcSynthOptions& opts = {});

/// Certifies a fixed gain: minimizes sigma0^T P sigma0 over the lifted vertex
/// LMIs in (P, nu) for each rho, with the same outer line search.
UvcAnalysisOutcome analyze_uvc(const PolytopicPlant& plant, const Matrix& gain,
                               const Vec& sigma0, double rho_lo, double rho_hi,
                               const UvcSynthOptions& opts = {});

/// theta(rho) over an explicit grid; infeasible points are data, not errors.
RhoSweep rho_sweep(const PolytopicPlant& plant, const Vec& sigma0, const Vec& rho_grid,
                   std::optional<double> alpha_u, const SdpOptions& opts = {});

/// Largest eigenvalue of the unscaled closed-loop inequality
/// K^T B^T P + P B K + (delta^2/mu) I + mu P^2 + rho P + rho^{-1} I
/// at B = combine(plant, w), with P = Z^{-1}.
double uvc_hull_inequality(const PolytopicPlant& plant, const UvcCertificate& cert,
                           const SimplexWeight& w);

Vec uvc_certificate_variables(const UvcCertificate& cert);

double uvc_certificate_margin(const PolytopicPlant& plant, const Vec& sigma0,
                              const UvcCertificate& cert);

}  // namespace reachtime
