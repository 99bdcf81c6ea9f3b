#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "skate/env.hpp"
#include "skate/policy.hpp"

namespace skate {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double learning_rate = 3e-4;
  int horizon = 24;
  int n_env = 256;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // 0 disables clipping
  long long total_steps = 2000000;
  // A run is marked failed when the diverged fraction of env steps exceeds
  // this; its J is then replaced by sentinel_j so the outer loop stays sane.
  double divergence_fail_fraction = 0.01;
  double sentinel_j = 100.0;

  void validate() const;
};

struct UpdateStats {
  double mean_reward = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double kl = 0.0;
  double entropy = 0.0;
  RewardBreakdown mean_terms;
};

struct TrainingLog {
  std::vector<UpdateStats> updates;
  std::vector<double> window_j;  // J estimates over successive training windows
  long long env_steps = 0;
  long long divergences = 0;
};

// advantages/returns from aligned (horizon x n_env) buffers; values carries
// one extra bootstrap row. dones gate both the TD residual and the recursion.
void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, double gamma, double lambda,
         Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns);

struct RolloutBatch {
  Eigen::MatrixXd obs;      // obs_dim x B
  Eigen::MatrixXd actions;  // act_dim x B
  Eigen::VectorXd logp;     // B, under the collecting policy
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// One PPO update (epochs x minibatches of Adam ascent on the clipped
// surrogate minus value loss). Returns false and leaves params untouched from
// the failing minibatch on if a loss or gradient goes non-finite.
bool ppo_update(PolicyParams& params, const RolloutBatch& batch,
                const PpoConfig& config, AdamState& adam, Rng& shuffle_rng,
                UpdateStats& stats);

struct TrainSetup {
  SimParams sim;
  TaskConfig task;
  RewardWeights rewards;
  MetricConfig metric;
  PpoConfig ppo;
};

struct TrainResult {
  PolicyParams params;
  TrainingLog log;
  double j = 0.0;
  bool failed = false;
};

// Full inner loop for one design: PPO training followed by a deterministic
// mean-action evaluation window that yields the design metric J. All
// randomness derives from seed; identical calls give identical results.
TrainResult train_policy(const DesignVector& design, const TrainSetup& setup,
                         std::uint64_t seed);

}  // namespace skate
