#include "cbfcert/rollout.hpp"

#include "cbfcert/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace cbfcert {

void ExperimentConfig::validate() const {
  system.validate();
  safety.validate();
  controller.validate();
  if (rollouts_per_group < 2) throw ConfigError("rollouts_per_group must be >= 2");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(std::isfinite(h_min) && h_min > 0.0)) throw ConfigError("h_min must be finite and > 0");
  if (!(std::isfinite(eps_norm) && eps_norm > 0.0)) throw ConfigError("eps_norm must be finite and > 0");
  if (!(std::isfinite(tol_support) && tol_support >= 0.0)) throw ConfigError("tol_support must be finite and >= 0");
  if (system.min_initial_separation < safety.d_min)
    throw ConfigError("min_initial_separation must be >= d_min so that initial states are safe");
}

double min_pair_margin(const SystemState& state, const ControlVector& u, const SafetyParams& params) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.n_agents(); ++i)
    for (std::size_t j = i + 1; j < state.n_agents(); ++j)
      best = std::min(best, psi_safety(state.agent(i), state.agent(j), u.agent(i), u.agent(j), params));
  return best;
}

double min_pair_distance(const SystemState& state, std::size_t position_dim) {
  const auto d = static_cast<Eigen::Index>(position_dim);
  const Eigen::MatrixXd& x = state.x();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      best = std::min(best, (x.row(i).head(d) - x.row(j).head(d)).norm());
  return best;
}

namespace {

double max_agent_norm(const ControlVector& u) { return u.u().rowwise().norm().maxCoeff(); }

}  // namespace

RolloutRecord run_rollout(const ExperimentConfig& config, std::uint64_t seed) {
  const SystemModel model(config.system);
  const SystemConfig& sys = config.system;
  const double w_bar = sys.noise_bound;
  Rng rng(seed);

  RolloutRecord rec;
  rec.seed = seed;

  const ControlVector zero = ControlVector::zero(sys.n_agents, sys.control_dim);
  SystemState x = model.sample_initial_state(rng);
  auto [u, sol] = control_step(model, x, zero, config.safety, w_bar, config.controller);
  double margin = min_pair_margin(x, u, config.safety);
  while (margin < config.h_min) {
    if (++rec.initial_redraws >= static_cast<std::size_t>(SystemModel::kMaxRejectionRounds))
      throw SetupError("run_rollout: no initial state with margin >= h_min after " +
                       std::to_string(SystemModel::kMaxRejectionRounds) + " draws");
    x = model.sample_initial_state(rng);
    std::tie(u, sol) = control_step(model, x, zero, config.safety, w_bar, config.controller);
    margin = min_pair_margin(x, u, config.safety);
  }
  rec.initial_min_margin = margin;
  rec.raw_min_margin = margin;
  rec.min_distance = min_pair_distance(x, sys.position_dim());

  auto record_point = [&](const SystemState& s, const ControlVector& c, double m) {
    if (config.store_trajectories) rec.trajectory.push_back({s.t(), s.x(), c.u(), m});
  };

  for (std::size_t k = 0; k < sys.horizon_steps; ++k) {
    if (k > 0) {
      std::tie(u, sol) = control_step(model, x, u, config.safety, w_bar, config.controller);
      margin = min_pair_margin(x, u, config.safety);
      rec.raw_min_margin = std::min(rec.raw_min_margin, margin);
      rec.min_distance = std::min(rec.min_distance, min_pair_distance(x, sys.position_dim()));
    }
    if (sol.status == QPStatus::infeasible_relaxed) ++rec.infeasible_steps;
    rec.max_control_norm = std::max(rec.max_control_norm, max_agent_norm(u));
    record_point(x, u, margin);

    const DisturbanceSample w = model.sample_noise(rng);
    x = model.step(x, u, w, sys.dt);
  }

  auto [u_final, sol_final] = control_step(model, x, u, config.safety, w_bar, config.controller);
  margin = min_pair_margin(x, u_final, config.safety);
  rec.raw_min_margin = std::min(rec.raw_min_margin, margin);
  rec.min_distance = std::min(rec.min_distance, min_pair_distance(x, sys.position_dim()));
  record_point(x, u_final, margin);

  rec.violated = rec.raw_min_margin < 0.0;
  return rec;
}

MarginScores margin_scores(const std::vector<RolloutRecord>& group, double theta, double eps_norm) {
  if (group.empty()) throw InputError("margin_scores: empty group");
  MarginScores out;
  for (const auto& r : group)
    if (!r.violated) out.h_tilde_max = std::max(out.h_tilde_max, r.raw_min_margin);

  const double denom = std::max(out.h_tilde_max, eps_norm);
  out.z_scores.reserve(group.size());
  out.x_flags.reserve(group.size());
  for (const auto& r : group) {
    const double z = r.violated ? 0.0 : std::clamp(r.raw_min_margin / denom, 0.0, 1.0);
    out.z_scores.push_back(z);
    out.x_flags.push_back(z < theta ? 1 : 0);
  }
  return out;
}

std::uint64_t rollout_seed(const ExperimentConfig& config, std::size_t group_index, std::size_t rollout_index) {
  return config.base_seed + static_cast<std::uint64_t>(group_index) * config.rollouts_per_group + rollout_index;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            body(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

GroupRecord finish_group(const ExperimentConfig& config, std::size_t group_index, std::vector<RolloutRecord> rollouts) {
  GroupRecord g;
  g.group_index = group_index;
  g.theta = config.theta;
  MarginScores scores = margin_scores(rollouts, config.theta, config.eps_norm);
  g.rollouts = std::move(rollouts);
  g.z_scores = std::move(scores.z_scores);
  g.x_flags = std::move(scores.x_flags);
  g.h_tilde_max = scores.h_tilde_max;
  return g;
}

}  // namespace

GroupRecord run_group(const ExperimentConfig& config, std::size_t group_index, std::size_t jobs) {
  const std::size_t P = config.rollouts_per_group;
  std::vector<RolloutRecord> rollouts(P);
  parallel_for(P, jobs, [&](std::size_t p) { rollouts[p] = run_rollout(config, rollout_seed(config, group_index, p)); });
  return finish_group(config, group_index, std::move(rollouts));
}

std::vector<GroupRecord> run_groups(const ExperimentConfig& config, std::size_t jobs) {
  const std::size_t P = config.rollouts_per_group;
  std::vector<RolloutRecord> all(config.groups * P);
  parallel_for(all.size(), jobs, [&](std::size_t k) { all[k] = run_rollout(config, rollout_seed(config, k / P, k % P)); });

  std::vector<GroupRecord> groups;
  groups.reserve(config.groups);
  for (std::size_t g = 0; g < config.groups; ++g) {
    std::vector<RolloutRecord> rollouts(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(g * P)),
                                        std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>((g + 1) * P)));
    groups.push_back(finish_group(config, g, std::move(rollouts)));
  }
  return groups;
}

}  // namespace cbfcert
