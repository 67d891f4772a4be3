#pragma once

#include "cbfcert/controller.hpp"
#include "cbfcert/safety.hpp"
#include "cbfcert/sysmodel.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace cbfcert {

struct ExperimentConfig {
  std::size_t groups = 100;
  std::size_t rollouts_per_group = 50;
  double theta = 0.1;
  double delta = 0.1;
  std::uint64_t base_seed = 1;
  SystemConfig system;
  SafetyParams safety;
  ControllerOptions controller;
  /// Initial states are redrawn until every pair has psi-weighted margin >= h_min.
  double h_min = 0.05;
  /// Floor on the margin normaliser.
  double eps_norm = 1e-9;
  /// Scores within this distance of the group minimum count as tied support.
  double tol_support = 1e-9;
  /// Keep every state and control of every rollout (memory heavy; debug only).
  bool store_trajectories = false;

  void validate() const;
};

struct TrajectoryPoint {
  double t = 0.0;
  Eigen::MatrixXd x;  // N x n
  Eigen::MatrixXd u;  // N x m, control evaluated at x
  double min_pair_margin = 0.0;
};

struct RolloutRecord {
  /// Minimum over time and pairs of the psi-weighted margin at the applied controls.
  double raw_min_margin = 0.0;
  bool violated = false;
  /// Minimum over time and pairs of the positional distance.
  double min_distance = 0.0;
  std::size_t infeasible_steps = 0;
  std::uint64_t seed = 0;
  /// Largest per-agent control norm applied; calibrates the analytic increment bound.
  double max_control_norm = 0.0;
  /// Minimum pairwise psi-weighted margin at t = 0.
  double initial_min_margin = 0.0;
  /// Number of initial configurations rejected by the h_min check.
  std::size_t initial_redraws = 0;
  std::vector<TrajectoryPoint> trajectory;
};

struct MarginScores {
  std::vector<double> z_scores;
  std::vector<std::uint8_t> x_flags;
  double h_tilde_max = 0.0;
};

struct GroupRecord {
  std::size_t group_index = 0;
  std::vector<RolloutRecord> rollouts;
  std::vector<double> z_scores;
  std::vector<std::uint8_t> x_flags;
  double h_tilde_max = 0.0;
  double theta = 0.0;
};

/// Minimum over pairs of the psi-weighted margin at (state, u).
double min_pair_margin(const SystemState& state, const ControlVector& u, const SafetyParams& params);

/// Minimum pairwise distance over the position components.
double min_pair_distance(const SystemState& state, std::size_t position_dim);

/// One closed-loop trajectory, deterministic in (config, seed). The margin
/// and distance minima cover t_0 .. t_T; the terminal control is the one the
/// controller would apply at x(T).
RolloutRecord run_rollout(const ExperimentConfig& config, std::uint64_t seed);

/// Two-pass normalisation: h_max is the largest raw_min_margin among
/// non-violated rollouts (0 if none), then Z_p = 0 for violated rollouts and
/// clamp(raw / max(h_max, eps_norm), 0, 1) otherwise; X_p = [Z_p < theta].
/// Throws InputError on an empty group.
MarginScores margin_scores(const std::vector<RolloutRecord>& group, double theta, double eps_norm);

std::uint64_t rollout_seed(const ExperimentConfig& config, std::size_t group_index, std::size_t rollout_index);

/// P rollouts with seeds base_seed + group_index * P + p on up to `jobs` threads.
GroupRecord run_group(const ExperimentConfig& config, std::size_t group_index, std::size_t jobs = 1);

/// All configured groups, parallelised over every rollout of every group.
std::vector<GroupRecord> run_groups(const ExperimentConfig& config, std::size_t jobs = 1);

/// Runs body(0..count-1) on up to `jobs` threads. If any call throws, the
/// exception from the lowest index is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace cbfcert
