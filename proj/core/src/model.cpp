#include "reachtime/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace reachtime {

SimplexWeight::SimplexWeight(Vec w) : lambda(std::move(w)) {
  if (lambda.empty()) throw InvalidInputError("simplex weight must be nonempty");
  double sum = 0.0;
  for (double v : lambda) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidInputError("simplex weight components must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidInputError("simplex weight components must sum to one");
}

namespace {

double smallest_singular_value(const Matrix& b) {
  // sigma_min(B) = sqrt(lambda_min(B B^T)) for n <= m.
  const Matrix g = b * b.transpose();
  const double lo = min_eig(SymMatrix(g));
  return lo > 0.0 ? std::sqrt(lo) : 0.0;
}

}  // namespace

PolytopicPlant::PolytopicPlant(std::vector<Matrix> verts, double delta_bound)
    : vertices(std::move(verts)), delta(delta_bound) {
  if (vertices.empty()) throw InvalidInputError("plant needs at least one vertex");
  n = vertices.front().rows();
  m = vertices.front().cols();
  if (n == 0 || m == 0 || n > m)
    throw InvalidInputError("plant vertices must be n x m with n <= m");
  if (!(std::isfinite(delta)) || delta < 0.0)
    throw InvalidInputError("disturbance bound must be finite and >= 0");
  for (const auto& v : vertices) {
    if (v.rows() != n || v.cols() != m)
      throw InvalidInputError("plant vertices must share dimensions");
    if (!v.all_finite()) throw InvalidInputError("plant vertices must be finite");
    const double smin = smallest_singular_value(v);
    if (smin <= 1e-12 * std::max(1.0, v.max_abs()))
      throw InvalidInputError("plant vertex is rank deficient");
  }
}

const char* to_string(ControlKind k) {
  return k == ControlKind::vsc_sign ? "vsc" : "uvc";
}

Vec phi(ControlKind kind, const Vec& sigma) {
  for (double v : sigma)
    if (!std::isfinite(v)) throw InvalidInputError("phi: state must be finite");
  Vec out(sigma.size(), 0.0);
  if (kind == ControlKind::vsc_sign) {
    for (std::size_t i = 0; i < sigma.size(); ++i)
      out[i] = sigma[i] > 0.0 ? 1.0 : (sigma[i] < 0.0 ? -1.0 : 0.0);
  } else {
    const double nrm = norm2(sigma);
    if (nrm > 0.0)
      for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = sigma[i] / nrm;
  }
  return out;
}

Matrix combine(const PolytopicPlant& plant, const SimplexWeight& w) {
  if (w.size() != plant.vertex_count())
    throw InvalidInputError("combine: weight length must match vertex count");
  Matrix b(plant.n, plant.m);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w.lambda[i] != 0.0) b += w.lambda[i] * plant.vertices[i];
  return b;
}

PolytopicPlant make_servoing_plant(double phi_bar, double delta_bar, double delta) {
  if (!(delta_bar >= 0.0 && delta_bar <= std::numbers::pi / 2.0))
    throw InvalidInputError("servoing: delta_bar must lie in [0, pi/2]");
  const Matrix nominal = Matrix::from_rows(
      {{std::cos(phi_bar), std::sin(phi_bar)},
       {-std::sin(phi_bar), std::cos(phi_bar)}});
  const double c = std::cos(delta_bar);
  const double s = std::sin(delta_bar);
  const double corners[4][2] = {{c, s}, {1.0, s}, {c, -s}, {1.0, -s}};
  std::vector<Matrix> verts;
  verts.reserve(4);
  for (const auto& cs : corners) {
    const Matrix rot = Matrix::from_rows({{cs[0], cs[1]}, {-cs[1], cs[0]}});
    verts.push_back(rot * nominal);
  }
  return PolytopicPlant(std::move(verts), delta);
}

SimplexWeight servoing_nominal_weight() {
  // (1, 0) is the midpoint of corners (1, sin d) and (1, -sin d).
  return SimplexWeight(Vec{0.0, 0.5, 0.0, 0.5});
}

PolytopicPlant make_rov_plant(double m0, double Iz, double psi1, double psi2,
                              double g_lo, double g_hi, double delta) {
  if (!(m0 > 0.0) || !(Iz > 0.0))
    throw InvalidInputError("rov: mass and inertia must be positive");
  if (!(g_lo > 0.0) || !(g_lo <= g_hi))
    throw InvalidInputError("rov: need 0 < g_lo <= g_hi");
  const Matrix minv = Matrix::diag(Vec{1.0 / m0, 1.0 / m0, 1.0 / Iz});
  const Matrix thrust = Matrix::from_rows({{psi1, psi1, psi1, psi1},
                                           {psi1, -psi1, -psi1, psi1},
                                           {-psi2, psi2, -psi2, psi2}});
  std::vector<Matrix> verts;
  verts.reserve(4);
  for (double g1 : {g_lo, g_hi})
    for (double g3 : {g_lo, g_hi}) {
      const Matrix gains = Matrix::diag(Vec{g1, 1.0, g3, 1.0});
      verts.push_back(minv * thrust * gains);
    }
  return PolytopicPlant(std::move(verts), delta);
}

double next_uniform(std::uint64_t& state) {
  // xorshift64*; top 53 bits mapped to [0, 1)
  state ^= state >> 12;
  state ^= state << 25;
  state ^= state >> 27;
  const std::uint64_t z = state * 0x2545F4914F6CDD1DULL;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

SimplexWeight random_simplex_weight(std::size_t n, std::uint64_t& state) {
  Vec w(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = next_uniform(state);
    if (u <= 0.0) u = 0x1.0p-53;
    w[i] = -std::log(u);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  // renormalize exactly enough for the 1e-12 invariant
  double total = 0.0;
  for (double v : w) total += v;
  w.back() += 1.0 - total;
  if (w.back() < 0.0) w.back() = 0.0;
  return SimplexWeight(std::move(w));
}

RankReport validate_rank(const PolytopicPlant& plant, std::size_t sample_count,
                         std::uint64_t seed) {
  RankReport rep;
  rep.min_singular_value = std::numeric_limits<double>::infinity();
  rep.pass = true;

  auto check = [&](const Matrix& b, const SimplexWeight& w) {
    const double smin = smallest_singular_value(b);
    if (smin < rep.min_singular_value) rep.min_singular_value = smin;
    if (smin <= 1e-12 * std::max(1.0, b.max_abs()) && rep.pass) {
      rep.pass = false;
      rep.offending_weight = w;
    }
  };

  for (std::size_t i = 0; i < plant.vertex_count(); ++i) {
    Vec e(plant.vertex_count(), 0.0);
    e[i] = 1.0;
    check(plant.vertices[i], SimplexWeight(e));
  }
  std::uint64_t state = seed ? seed : 1;
  for (std::size_t s = 0; s < sample_count; ++s) {
    SimplexWeight w = random_simplex_weight(plant.vertex_count(), state);
    check(combine(plant, w), w);
    ++rep.samples;
  }
  return rep;
}

Vec DisturbanceSpec::value(double t) const {
  Vec f(offsets);
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (const auto& term : channels[i])
      f[i] += term.amplitude * std::sin(term.frequency * t + term.phase);
  return f;
}

double DisturbanceSpec::sampled_sup_norm(double t_end, double dt) const {
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw InvalidInputError("disturbance: bad sampling grid");
  double sup = 0.0;
  for (double t = 0.0; t <= t_end; t += dt) sup = std::max(sup, norm2(value(t)));
  return sup;
}

void DisturbanceSpec::validate(double t_end, double dt) const {
  if (channels.size() != offsets.size())
    throw InvalidInputError("disturbance: channel/offset count mismatch");
  if (sampled_sup_norm(t_end, dt) > bound + 1e-9)
    throw InvalidInputError("disturbance exceeds its declared bound");
}

DisturbanceSpec DisturbanceSpec::zero(std::size_t n) {
  DisturbanceSpec d;
  d.channels.resize(n);
  d.offsets.assign(n, 0.0);
  d.bound = 0.0;
  return d;
}

DisturbanceSpec DisturbanceSpec::servoing_example() {
  DisturbanceSpec d;
  const double a = std::sqrt(2.0);
  d.channels = {{SinusoidTerm{a, 5.0, 0.0}}, {SinusoidTerm{a, 2.0, 0.0}}};
  d.offsets = {0.0, 0.0};
  d.bound = 2.0;
  return d;
}

}  // namespace reachtime
