#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace cbfcert {

using Rng = std::mt19937_64;

enum class DynamicsModel {
  single_integrator,  // f = 0, g = I, m = n
  double_integrator,  // x = (p, v), f = (v, 0), g = [0; I], n = 2m
};

enum class NoiseDistribution {
  ball,    // uniform on the closed ball of radius w_bar
  sphere,  // uniform on the sphere of radius w_bar (worst-case norm)
};

std::string_view to_string(DynamicsModel model);
std::string_view to_string(NoiseDistribution dist);

struct SystemConfig {
  std::size_t n_agents = 2;
  std::size_t state_dim = 2;
  std::size_t control_dim = 2;
  double noise_bound = 0.03;
  double dt = 0.1;
  std::size_t horizon_steps = 50;
  /// Side length L of the square [0, L]^2 that initial positions are drawn from.
  double domain_half_width = 10.0;
  double min_initial_separation = 1.0;
  DynamicsModel dynamics = DynamicsModel::single_integrator;
  NoiseDistribution noise = NoiseDistribution::ball;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Number of leading state components that are positions.
  std::size_t position_dim() const;
};

/// Joint state of all agents; row i is agent i. Entries are always finite.
class SystemState {
 public:
  SystemState(Eigen::MatrixXd x, double t = 0.0);

  const Eigen::MatrixXd& x() const { return x_; }
  double t() const { return t_; }
  std::size_t n_agents() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t state_dim() const { return static_cast<std::size_t>(x_.cols()); }
  Eigen::VectorXd agent(std::size_t i) const { return x_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  Eigen::MatrixXd x_;
  double t_;
};

/// Joint control; row i is agent i's input. Entries are always finite.
class ControlVector {
 public:
  explicit ControlVector(Eigen::MatrixXd u);
  static ControlVector zero(std::size_t n_agents, std::size_t control_dim);

  const Eigen::MatrixXd& u() const { return u_; }
  Eigen::VectorXd agent(std::size_t i) const { return u_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  Eigen::MatrixXd u_;
};

/// One disturbance vector per agent (row i), each with norm <= w_bar.
class DisturbanceSample {
 public:
  explicit DisturbanceSample(Eigen::MatrixXd w) : w_(std::move(w)) {}
  static DisturbanceSample zero(std::size_t n_agents, std::size_t state_dim);

  const Eigen::MatrixXd& w() const { return w_; }

 private:
  Eigen::MatrixXd w_;
};

/// Control-affine multi-agent dynamics x_i' = f(x_i) + g(x_i) u_i + w_i,
/// integrated with explicit Euler.
class SystemModel {
 public:
  explicit SystemModel(SystemConfig config);

  const SystemConfig& config() const { return config_; }

  Eigen::VectorXd drift(const SystemState& state, std::size_t agent) const;
  Eigen::MatrixXd actuation(const SystemState& state, std::size_t agent) const;

  /// Noise-free velocity f(x_i) + g(x_i) u_i for every agent (row i).
  Eigen::MatrixXd nominal_velocity(const SystemState& state, const ControlVector& u) const;

  SystemState step(const SystemState& state, const ControlVector& u,
                   const DisturbanceSample& w, double dt) const;

  DisturbanceSample sample_noise(Rng& rng) const;

  /// Uniform positions on [0, L]^d with whole-configuration rejection until
  /// all pairwise distances reach min_initial_separation. Non-position
  /// components start at zero. Throws SetupError after 10,000 rejections.
  SystemState sample_initial_state(Rng& rng) const;

  static constexpr int kMaxRejectionRounds = 10000;

 private:
  SystemConfig config_;
};

/// Uniform draw from the closed Euclidean ball of radius `radius` in R^dim.
Eigen::VectorXd sample_ball(Rng& rng, std::size_t dim, double radius);

/// Uniform draw from the sphere of radius `radius` in R^dim.
Eigen::VectorXd sample_sphere(Rng& rng, std::size_t dim, double radius);

}  // namespace cbfcert
