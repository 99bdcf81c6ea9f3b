#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "skate/mlp.hpp"
#include "skate/rng.hpp"

namespace skate {

inline constexpr double kLogStdMin = -4.0;
inline constexpr double kLogStdMax = 1.0;
inline constexpr double kLogStdInit = -0.5;

// Diagonal-Gaussian actor plus a value critic. The action mean comes from
// the policy net; the log standard deviation is a free per-dimension
// parameter kept inside [kLogStdMin, kLogStdMax].
struct PolicyParams {
  Mlp policy;
  Mlp value;
  Eigen::VectorXd log_std;

  static PolicyParams initialized(int obs_dim, int act_dim, std::uint64_t seed);

  void clamp_log_std();

  Eigen::Index parameter_count() const;
  // Fixed order: policy params, value params, log_std.
  Eigen::VectorXd flatten() const;
  void set_from_flat(const Eigen::VectorXd& flat);
};

// Column-batched diagonal-Gaussian log densities. mean and action are
// (act_dim x batch); returns one log density per column.
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& action);

// d logp / d mean for each sample (same shape as mean).
Eigen::MatrixXd gaussian_log_prob_dmean(const Eigen::MatrixXd& mean,
                                        const Eigen::VectorXd& log_std,
                                        const Eigen::MatrixXd& action);

// d logp / d log_std, summed over the batch with per-sample weights.
Eigen::VectorXd gaussian_log_prob_dlogstd(const Eigen::MatrixXd& mean,
                                          const Eigen::VectorXd& log_std,
                                          const Eigen::MatrixXd& action,
                                          const Eigen::VectorXd& weight);

double gaussian_entropy(const Eigen::VectorXd& log_std);

// One sample per column of mean, using rng.normal() per component.
Eigen::MatrixXd gaussian_sample(const Eigen::MatrixXd& mean,
                                const Eigen::VectorXd& log_std, Rng& rng);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;

  static AdamState zeros(Eigen::Index n);
};

// In-place Adam ascent step on params along grad (gradient of the objective
// being maximized is passed negated by callers doing descent).
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// Binary checkpoint with an embedded observation/action fingerprint string.
// Loading rejects checkpoints whose fingerprint differs from the current one.
void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& fingerprint);
PolicyParams load_checkpoint(const std::string& path,
                             const std::string& fingerprint);

}  // namespace skate
