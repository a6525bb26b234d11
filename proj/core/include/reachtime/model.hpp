#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reachtime/matrix.hpp"

namespace reachtime {

/// Nonnegative weights summing to one; parameterizes the vertex hull.
struct SimplexWeight {
  Vec lambda;

  explicit SimplexWeight(Vec w);
  std::size_t size() const { return lambda.size(); }
};

/// Uncertain input matrix as the convex hull of known vertices, plus the
/// disturbance norm bound the plant is exposed to.
struct PolytopicPlant {
  std::size_t n = 0;  // state dimension
  std::size_t m = 0;  // input dimension
  std::vector<Matrix> vertices;
  double delta = 0.0;  // disturbance norm bound, >= 0

  PolytopicPlant(std::vector<Matrix> verts, double delta_bound);
  std::size_t vertex_count() const { return vertices.size(); }
};

enum class ControlKind { vsc_sign, uvc_unit_vector };
const char* to_string(ControlKind k);

struct Controller {
  ControlKind kind = ControlKind::vsc_sign;
  Matrix gain;  // m x n
};

/// Switching direction of the control law: componentwise sign (sign(0) = 0)
/// for VSC, normalized state for UVC (zero vector at the origin).
Vec phi(ControlKind kind, const Vec& sigma);

/// Convex combination of the plant vertices.
Matrix combine(const PolytopicPlant& plant, const SimplexWeight& w);

/// Planar visual-servoing plant: nominal rotation angle phi_bar with the
/// camera misalignment bounded by delta_bar. Four hull corners, ordered
/// (cos d, sin d), (1, sin d), (cos d, -sin d), (1, -sin d).
PolytopicPlant make_servoing_plant(double phi_bar, double delta_bar, double delta);

/// Weight that reproduces the nominal (zero-misalignment) servoing matrix.
SimplexWeight servoing_nominal_weight();

/// Over-actuated underwater vehicle: three-state body-velocity model with four
/// propellers and uncertain gains on channels 1 and 3. Vertices in
/// lexicographic (g1, g3) order over {g_lo, g_hi}^2.
PolytopicPlant make_rov_plant(double m0, double Iz, double psi1, double psi2,
                              double g_lo, double g_hi, double delta);

struct RankReport {
  bool pass = false;
  double min_singular_value = 0.0;
  std::optional<SimplexWeight> offending_weight;  // set on failure
  std::size_t samples = 0;
};

/// Checks rank(B) = n at every vertex and at random hull samples. Sampling
/// cannot prove full rank on the whole hull; it guards implementation bugs.
RankReport validate_rank(const PolytopicPlant& plant, std::size_t sample_count,
                         std::uint64_t seed = 1);

/// Uniform simplex sample via normalized exponential draws (deterministic per seed).
SimplexWeight random_simplex_weight(std::size_t n, std::uint64_t& state);

/// xorshift-based uniform in [0,1); stable across compilers, unlike
/// std::uniform_real_distribution.
double next_uniform(std::uint64_t& state);

struct SinusoidTerm {
  double amplitude = 0.0;
  double frequency = 0.0;  // rad per time unit
  double phase = 0.0;
};

/// Disturbance as per-channel sinusoid sums plus constant offsets, with the
/// declared norm bound it must stay under.
struct DisturbanceSpec {
  std::vector<std::vector<SinusoidTerm>> channels;
  Vec offsets;
  double bound = 0.0;

  std::size_t dim() const { return offsets.size(); }
  Vec value(double t) const;
  double sampled_sup_norm(double t_end, double dt) const;
  /// Throws InvalidInputError if the sampled sup-norm exceeds bound + 1e-9.
  void validate(double t_end, double dt) const;

  static DisturbanceSpec zero(std::size_t n);
  /// sqrt(2) [sin 5t, sin 2t]^T with bound 2.
  static DisturbanceSpec servoing_example();
};

}  // namespace reachtime
