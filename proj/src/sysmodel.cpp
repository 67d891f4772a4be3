#include "cbfcert/sysmodel.hpp"

#include "cbfcert/errors.hpp"

#include <cmath>
#include <string>

namespace cbfcert {

std::string_view to_string(DynamicsModel model) {
  switch (model) {
    case DynamicsModel::single_integrator: return "single_integrator";
    case DynamicsModel::double_integrator: return "double_integrator";
  }
  return "unknown";
}

std::string_view to_string(NoiseDistribution dist) {
  switch (dist) {
    case NoiseDistribution::ball: return "ball";
    case NoiseDistribution::sphere: return "sphere";
  }
  return "unknown";
}

void SystemConfig::validate() const {
  if (n_agents < 2) throw ConfigError("n_agents must be >= 2");
  if (state_dim < 1 || control_dim < 1) throw ConfigError("state_dim and control_dim must be >= 1");
  if (dynamics == DynamicsModel::single_integrator && control_dim != state_dim)
    throw ConfigError("single_integrator requires control_dim == state_dim");
  if (dynamics == DynamicsModel::double_integrator && state_dim != 2 * control_dim)
    throw ConfigError("double_integrator requires state_dim == 2 * control_dim");
  if (!(std::isfinite(noise_bound) && noise_bound >= 0.0)) throw ConfigError("noise_bound must be finite and >= 0");
  if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("dt must be finite and > 0");
  if (horizon_steps < 1) throw ConfigError("horizon_steps must be >= 1");
  if (!(std::isfinite(domain_half_width) && domain_half_width > 0.0))
    throw ConfigError("domain_half_width must be finite and > 0");
  if (!(std::isfinite(min_initial_separation) && min_initial_separation >= 0.0))
    throw ConfigError("min_initial_separation must be finite and >= 0");
}

std::size_t SystemConfig::position_dim() const {
  return dynamics == DynamicsModel::double_integrator ? control_dim : state_dim;
}

SystemState::SystemState(Eigen::MatrixXd x, double t) : x_(std::move(x)), t_(t) {
  if (!x_.allFinite() || !std::isfinite(t_)) throw InputError("SystemState: non-finite entry");
}

ControlVector::ControlVector(Eigen::MatrixXd u) : u_(std::move(u)) {
  if (!u_.allFinite()) throw InputError("ControlVector: non-finite entry");
}

ControlVector ControlVector::zero(std::size_t n_agents, std::size_t control_dim) {
  return ControlVector(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_agents),
                                             static_cast<Eigen::Index>(control_dim)));
}

DisturbanceSample DisturbanceSample::zero(std::size_t n_agents, std::size_t state_dim) {
  return DisturbanceSample(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_agents),
                                                 static_cast<Eigen::Index>(state_dim)));
}

namespace {

Eigen::VectorXd unit_direction(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

// Rounding in the direction normalisation can leave the norm an ulp above
// the radius; shrink until the bound holds exactly.
void clamp_to_radius(Eigen::VectorXd& v, double radius) {
  while (v.norm() > radius) v *= std::nextafter(1.0, 0.0);
}

}  // namespace

Eigen::VectorXd sample_ball(Rng& rng, std::size_t dim, double radius) {
  if (radius == 0.0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd dir = unit_direction(rng, dim);
  const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
  Eigen::VectorXd w = r * dir;
  clamp_to_radius(w, radius);
  return w;
}

Eigen::VectorXd sample_sphere(Rng& rng, std::size_t dim, double radius) {
  if (radius == 0.0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  Eigen::VectorXd w = radius * unit_direction(rng, dim);
  clamp_to_radius(w, radius);
  return w;
}

SystemModel::SystemModel(SystemConfig config) : config_(config) { config_.validate(); }

Eigen::VectorXd SystemModel::drift(const SystemState& state, std::size_t agent) const {
  const auto n = static_cast<Eigen::Index>(config_.state_dim);
  if (config_.dynamics == DynamicsModel::single_integrator) return Eigen::VectorXd::Zero(n);
  const auto m = static_cast<Eigen::Index>(config_.control_dim);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  f.head(m) = state.agent(agent).tail(m);
  return f;
}

Eigen::MatrixXd SystemModel::actuation(const SystemState& /*state*/, std::size_t /*agent*/) const {
  const auto n = static_cast<Eigen::Index>(config_.state_dim);
  const auto m = static_cast<Eigen::Index>(config_.control_dim);
  if (config_.dynamics == DynamicsModel::single_integrator) return Eigen::MatrixXd::Identity(n, m);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, m);
  g.bottomRows(m).setIdentity();
  return g;
}

Eigen::MatrixXd SystemModel::nominal_velocity(const SystemState& state, const ControlVector& u) const {
  Eigen::MatrixXd v(state.x().rows(), state.x().cols());
  for (std::size_t i = 0; i < state.n_agents(); ++i) {
    v.row(static_cast<Eigen::Index>(i)) =
        (drift(state, i) + actuation(state, i) * u.agent(i)).transpose();
  }
  return v;
}

SystemState SystemModel::step(const SystemState& state, const ControlVector& u,
                              const DisturbanceSample& w, double dt) const {
  const auto rows = static_cast<Eigen::Index>(config_.n_agents);
  const auto n = static_cast<Eigen::Index>(config_.state_dim);
  const auto m = static_cast<Eigen::Index>(config_.control_dim);
  if (state.x().rows() != rows || state.x().cols() != n || u.u().rows() != rows ||
      u.u().cols() != m || w.w().rows() != rows || w.w().cols() != n) {
    throw ConfigError("step: dimension mismatch between state, control, disturbance and config");
  }
  Eigen::MatrixXd next = state.x() + dt * (nominal_velocity(state, u) + w.w());
  return SystemState(std::move(next), state.t() + dt);
}

DisturbanceSample SystemModel::sample_noise(Rng& rng) const {
  const auto rows = static_cast<Eigen::Index>(config_.n_agents);
  Eigen::MatrixXd w(rows, static_cast<Eigen::Index>(config_.state_dim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    w.row(i) = (config_.noise == NoiseDistribution::ball
                    ? sample_ball(rng, config_.state_dim, config_.noise_bound)
                    : sample_sphere(rng, config_.state_dim, config_.noise_bound))
                   .transpose();
  }
  return DisturbanceSample(std::move(w));
}

SystemState SystemModel::sample_initial_state(Rng& rng) const {
  const auto rows = static_cast<Eigen::Index>(config_.n_agents);
  const auto d = static_cast<Eigen::Index>(config_.position_dim());
  std::uniform_real_distribution<double> uniform(0.0, config_.domain_half_width);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(config_.state_dim));
  const double sep2 = config_.min_initial_separation * config_.min_initial_separation;

  for (int round = 0; round < kMaxRejectionRounds; ++round) {
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < d; ++k) x(i, k) = uniform(rng);
    bool separated = true;
    for (Eigen::Index i = 0; i < rows && separated; ++i)
      for (Eigen::Index j = i + 1; j < rows && separated; ++j)
        separated = (x.row(i).head(d) - x.row(j).head(d)).squaredNorm() >= sep2;
    if (separated) return SystemState(x, 0.0);
  }
  throw SetupError("sample_initial_state: no configuration with pairwise separation " +
                   std::to_string(config_.min_initial_separation) + " found in " +
                   std::to_string(kMaxRejectionRounds) + " rounds (domain too crowded)");
}

}  // namespace cbfcert
