#pragma once

#include <optional>
#include <string>

#include "reachtime/model.hpp"
#include "reachtime/sdp.hpp"

namespace reachtime {

// Sign-law design route. The Lyapunov function is a weighted 1-norm with
// diagonal weights; the design LMIs work in the scaled variables
// Zd = Pd^{-1}, Y = K Pd^{-1}, and the certified bound is t_bound = 2*theta.

struct VscCertificate {
  Matrix zd;   // diagonal n x n, positive
  Matrix y;    // m x n
  double beta = 0.0;
  double theta = 0.0;
  Matrix gain;          // K = Y Zd^{-1}
  double t_bound = 0.0;  // 2 * theta
  std::optional<double> alpha_u;
  double delta = 0.0;

  // recorded verification results
  double margin = 0.0;            // feasibility margin of all blocks at the certificate
  double hull_audit_worst = 0.0;  // largest eigenvalue of the unscaled inequality over sampled weights
  bool conditioning_warning = false;
};

struct VscAnalysisResult {
  Matrix pd;  // diagonal n x n (scaled weights)
  double nu = 0.0;
  double t_bound = 0.0;  // 2 * sum_j pd_jj |sigma0_j|
};

struct VscSynthOptions {
  SdpOptions sdp{};
  int audit_samples = 50;
  std::uint64_t audit_seed = 12345;
};

struct VscSynthesisResult {
  std::optional<VscCertificate> certificate;
  SdpSolution solution;
  std::string note;  // reason when no certificate is returned
};

struct VscAnalysisOutcome {
  std::optional<VscAnalysisResult> result;
  SdpSolution solution;
  std::string note;
};

/// Assembles the synthesis program: N vertex blocks (3n, or 2n when delta = 0),
/// the reaching-time block (n+1), the optional control-budget block (m+n), and
/// 1x1 positivity bounds. Variables: diag(Zd), Y row-major, beta, theta.
LinearMatrixProgram build_vsc_synthesis(const PolytopicPlant& plant, const Vec& sigma0,
                                        std::optional<double> alpha_u);

VscSynthesisResult synthesize_vsc(const PolytopicPlant& plant, const Vec& sigma0,
                                  std::optional<double> alpha_u,
                                  const VscSynthOptions& opts = {});

/// Certifies a fixed gain: minimizes the reaching bound 2 sum p_j |sigma0_j|
/// over the lifted vertex LMIs in (Pd, nu).
VscAnalysisOutcome analyze_vsc(const PolytopicPlant& plant, const Matrix& gain,
                               const Vec& sigma0, const SdpOptions& opts = {});

/// v(sigma) = sum_j pd_jj |sigma_j|.
double vsc_lyapunov_value(const Matrix& pd, const Vec& sigma);

/// Largest eigenvalue of the unscaled closed-loop inequality
/// K^T B^T Pd + Pd B K + (1 + delta^2/beta) I + beta Pd^2 at B = combine(plant, w);
/// negative for every hull member when the certificate is sound.
double vsc_hull_inequality(const PolytopicPlant& plant, const VscCertificate& cert,
                           const SimplexWeight& w);

/// Decision vector of the synthesis program at this certificate (for rechecks).
Vec vsc_certificate_variables(const VscCertificate& cert);

/// Rebuilds the synthesis program and evaluates the margin at the certificate.
double vsc_certificate_margin(const PolytopicPlant& plant, const Vec& sigma0,
                              const VscCertificate& cert);

}  // namespace reachtime
