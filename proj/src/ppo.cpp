#include "skate/ppo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "skate/rewards.hpp"

namespace skate {
namespace {

void accumulate(RewardBreakdown& acc, const RewardBreakdown& x, double w) {
  acc.lin_track += w * x.lin_track;
  acc.yaw_track += w * x.yaw_track;
  acc.action_rate += w * x.action_rate;
  acc.effort += w * x.effort;
  acc.leg_extension += w * x.leg_extension;
  acc.workspace += w * x.workspace;
  acc.total += w * x.total;
}

void fisher_yates(std::vector<int>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
}

}  // namespace

void PpoConfig::validate() const {
  if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("ppo: gamma must be in (0,1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw std::invalid_argument("ppo: gae_lambda must be in [0,1]");
  if (clip_ratio <= 0.0) throw std::invalid_argument("ppo: clip_ratio must be positive");
  if (learning_rate <= 0.0) throw std::invalid_argument("ppo: learning_rate must be positive");
  if (horizon <= 0) throw std::invalid_argument("ppo: horizon must be positive");
  if (n_env <= 0) throw std::invalid_argument("ppo: n_env must be positive");
  if (epochs <= 0) throw std::invalid_argument("ppo: epochs must be positive");
  if (minibatches <= 0) throw std::invalid_argument("ppo: minibatches must be positive");
  if ((static_cast<long long>(horizon) * n_env) % minibatches != 0) {
    throw std::invalid_argument("ppo: horizon*n_env must be divisible by minibatches");
  }
  if (total_steps < 0) throw std::invalid_argument("ppo: total_steps must be non-negative");
  if (sentinel_j <= 0.0) throw std::invalid_argument("ppo: sentinel_j must be positive");
}

void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, double gamma, double lambda,
         Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns) {
  const Eigen::Index horizon = rewards.rows();
  const Eigen::Index n_env = rewards.cols();
  if (values.rows() != horizon + 1 || values.cols() != n_env ||
      dones.rows() != horizon || dones.cols() != n_env) {
    throw std::invalid_argument("gae: buffer shape mismatch");
  }
  advantages.resize(horizon, n_env);
  for (Eigen::Index j = 0; j < n_env; ++j) {
    double acc = 0.0;
    for (Eigen::Index t = horizon - 1; t >= 0; --t) {
      const double not_done = 1.0 - dones(t, j);
      const double delta =
          rewards(t, j) + gamma * values(t + 1, j) * not_done - values(t, j);
      acc = delta + gamma * lambda * not_done * acc;
      advantages(t, j) = acc;
    }
  }
  returns = advantages + values.topRows(horizon);
}

bool ppo_update(PolicyParams& params, const RolloutBatch& batch,
                const PpoConfig& config, AdamState& adam, Rng& shuffle_rng,
                UpdateStats& stats) {
  const Eigen::Index batch_size = batch.obs.cols();
  if (batch_size % config.minibatches != 0) {
    throw std::invalid_argument("ppo_update: batch not divisible into minibatches");
  }
  const Eigen::Index mb_size = batch_size / config.minibatches;

  Eigen::VectorXd adv = batch.advantages;
  const double adv_mean = adv.mean();
  const double adv_std =
      std::sqrt((adv.array() - adv_mean).square().sum() /
                static_cast<double>(adv.size()));
  if (adv_std > 1e-8) adv = ((adv.array() - adv_mean) / adv_std).matrix();

  std::vector<int> order(static_cast<std::size_t>(batch_size));
  std::iota(order.begin(), order.end(), 0);

  const Eigen::Index policy_n = params.policy.parameter_count();
  const Eigen::Index value_n = params.value.parameter_count();
  const int act_dim = static_cast<int>(params.log_std.size());

  double sum_surr = 0.0, sum_vloss = 0.0, sum_kl = 0.0;
  int n_minibatch = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    for (int mb = 0; mb < config.minibatches; ++mb) {
      Eigen::MatrixXd obs(batch.obs.rows(), mb_size);
      Eigen::MatrixXd act(act_dim, mb_size);
      Eigen::VectorXd logp_old(mb_size), a_mb(mb_size), ret_mb(mb_size);
      for (Eigen::Index s = 0; s < mb_size; ++s) {
        const int src = order[static_cast<std::size_t>(mb * mb_size + s)];
        obs.col(s) = batch.obs.col(src);
        act.col(s) = batch.actions.col(src);
        logp_old[s] = batch.logp[src];
        a_mb[s] = adv[src];
        ret_mb[s] = batch.returns[src];
      }
      const double inv_m = 1.0 / static_cast<double>(mb_size);

      Mlp::Cache pi_cache;
      const Eigen::MatrixXd mean = params.policy.forward_cached(obs, pi_cache);
      const Eigen::VectorXd logp_new =
          gaussian_log_prob(mean, params.log_std, act);
      const Eigen::ArrayXd ratio = (logp_new - logp_old).array().exp();

      const Eigen::ArrayXd lo = Eigen::ArrayXd::Constant(mb_size, 1.0 - config.clip_ratio);
      const Eigen::ArrayXd hi = Eigen::ArrayXd::Constant(mb_size, 1.0 + config.clip_ratio);
      const Eigen::ArrayXd clipped = ratio.min(hi).max(lo);
      const Eigen::ArrayXd surr =
          (ratio * a_mb.array()).min(clipped * a_mb.array());
      const double surr_mean = surr.mean();

      // The clipped branch has zero gradient when the ratio sits outside the
      // band on the side the advantage pushes toward.
      Eigen::VectorXd dlogp(mb_size);
      for (Eigen::Index s = 0; s < mb_size; ++s) {
        const bool gated = (a_mb[s] > 0.0 && ratio[s] > 1.0 + config.clip_ratio) ||
                           (a_mb[s] < 0.0 && ratio[s] < 1.0 - config.clip_ratio);
        dlogp[s] = gated ? 0.0 : ratio[s] * a_mb[s] * inv_m;
      }

      Eigen::MatrixXd dmean =
          gaussian_log_prob_dmean(mean, params.log_std, act);
      for (Eigen::Index s = 0; s < mb_size; ++s) dmean.col(s) *= dlogp[s];
      const Mlp::Grads pi_grads = params.policy.backward(pi_cache, dmean);

      Eigen::VectorXd dlogstd =
          gaussian_log_prob_dlogstd(mean, params.log_std, act, dlogp);
      dlogstd.array() += config.entropy_coef;

      Mlp::Cache v_cache;
      const Eigen::MatrixXd v = params.value.forward_cached(obs, v_cache);
      const Eigen::ArrayXd v_err = v.row(0).transpose().array() - ret_mb.array();
      const double v_loss = 0.5 * v_err.square().mean();
      const Eigen::MatrixXd dv =
          (-config.value_coef * inv_m * v_err).matrix().transpose();
      const Mlp::Grads v_grads = params.value.backward(v_cache, dv);

      Eigen::VectorXd grad(policy_n + value_n + act_dim);
      grad << Mlp::flatten_grads(pi_grads), Mlp::flatten_grads(v_grads), dlogstd;

      const double kl = (logp_old - logp_new).mean();
      if (!std::isfinite(surr_mean) || !std::isfinite(v_loss) ||
          !grad.allFinite()) {
        return false;
      }
      if (config.max_grad_norm > 0.0) {
        const double norm = grad.norm();
        if (norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
      }

      Eigen::VectorXd flat = params.flatten();
      adam_step(flat, grad, adam, config.learning_rate);
      params.set_from_flat(flat);
      params.clamp_log_std();

      sum_surr += surr_mean;
      sum_vloss += v_loss;
      sum_kl += kl;
      ++n_minibatch;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n_minibatch);
  stats.surrogate = sum_surr * inv_n;
  stats.value_loss = sum_vloss * inv_n;
  stats.kl = sum_kl * inv_n;
  stats.entropy = gaussian_entropy(params.log_std);
  return true;
}

TrainResult train_policy(const DesignVector& design, const TrainSetup& setup,
                         std::uint64_t seed) {
  setup.ppo.validate();
  setup.rewards.validate();
  setup.task.validate();
  setup.sim.validate();

  TrainResult result;
  result.params = PolicyParams::initialized(kObsDim, kActionDim,
                                            Rng::derive(seed, 0));
  Rng action_rng(Rng::derive(seed, 2));
  Rng shuffle_rng(Rng::derive(seed, 3));

  const PpoConfig& ppo = setup.ppo;
  const int n_env = ppo.n_env;
  const int horizon = ppo.horizon;
  const Eigen::Index batch_size =
      static_cast<Eigen::Index>(horizon) * n_env;
  const long long n_updates =
      ppo.total_steps / (static_cast<long long>(horizon) * n_env);

  VecEnv env(design, setup.sim, setup.task, setup.rewards, setup.metric, n_env,
             Rng::derive(seed, 1));
  AdamState adam = AdamState::zeros(result.params.parameter_count());

  RolloutBatch batch;
  batch.obs.resize(kObsDim, batch_size);
  batch.actions.resize(kActionDim, batch_size);
  batch.logp.resize(batch_size);
  Eigen::MatrixXd rewards(horizon, n_env), dones(horizon, n_env);
  Eigen::MatrixXd values(horizon + 1, n_env);
  Eigen::MatrixXd advantages, returns;

  MetricBuffer window(n_env, setup.metric.window_steps);
  bool update_failed = false;

  for (long long update = 0; update < n_updates && !update_failed; ++update) {
    UpdateStats stats;
    RewardBreakdown term_sums;
    double reward_sum = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Eigen::MatrixXd& obs = env.observations();
      batch.obs.middleCols(static_cast<Eigen::Index>(t) * n_env, n_env) = obs;
      const Eigen::MatrixXd mean = result.params.policy.forward(obs);
      const Eigen::MatrixXd act =
          gaussian_sample(mean, result.params.log_std, action_rng);
      batch.actions.middleCols(static_cast<Eigen::Index>(t) * n_env, n_env) = act;
      batch.logp.segment(static_cast<Eigen::Index>(t) * n_env, n_env) =
          gaussian_log_prob(mean, result.params.log_std, act);
      values.row(t) = result.params.value.forward(obs).row(0);

      const VecEnv::StepResult sr = env.step(act);
      rewards.row(t) = sr.reward.transpose();
      dones.row(t) = sr.done.transpose();
      reward_sum += sr.reward.mean();
      accumulate(term_sums, sr.mean_terms, 1.0);

      window.append_step(sr.cot, sr.fail);
      if (window.complete()) {
        result.log.window_j.push_back(
            estimate_design_metric(window, setup.metric.lambda_fail));
        window = MetricBuffer(n_env, setup.metric.window_steps);
      }
    }
    values.row(horizon) =
        result.params.value.forward(env.observations()).row(0);

    gae(rewards, values, dones, ppo.gamma, ppo.gae_lambda, advantages, returns);
    batch.advantages.resize(batch_size);
    batch.returns.resize(batch_size);
    for (int t = 0; t < horizon; ++t) {
      for (int j = 0; j < n_env; ++j) {
        const Eigen::Index b = static_cast<Eigen::Index>(t) * n_env + j;
        batch.advantages[b] = advantages(t, j);
        batch.returns[b] = returns(t, j);
      }
    }

    if (!ppo_update(result.params, batch, ppo, adam, shuffle_rng, stats)) {
      update_failed = true;
    }
    const double inv_h = 1.0 / static_cast<double>(horizon);
    stats.mean_reward = reward_sum * inv_h;
    accumulate(stats.mean_terms, term_sums, inv_h);
    result.log.updates.push_back(stats);
    result.log.env_steps += batch_size;
  }
  result.log.divergences = env.divergence_count();

  const double train_div_frac =
      env.total_cells() > 0
          ? static_cast<double>(env.divergence_count()) /
                static_cast<double>(env.total_cells())
          : 0.0;

  // Deterministic mean-action evaluation window for the design metric.
  VecEnv eval_env(design, setup.sim, setup.task, setup.rewards, setup.metric,
                  n_env, Rng::derive(seed, 4));
  MetricBuffer eval_buf(n_env, setup.metric.window_steps);
  for (int t = 0; t < setup.metric.window_steps; ++t) {
    const Eigen::MatrixXd mean =
        result.params.policy.forward(eval_env.observations());
    const VecEnv::StepResult sr = eval_env.step(mean);
    eval_buf.append_step(sr.cot, sr.fail);
  }
  result.j = estimate_design_metric(eval_buf, setup.metric.lambda_fail);

  const double eval_div_frac =
      static_cast<double>(eval_env.divergence_count()) /
      static_cast<double>(eval_env.total_cells());
  result.failed = update_failed ||
                  train_div_frac > ppo.divergence_fail_fraction ||
                  eval_div_frac > ppo.divergence_fail_fraction;
  if (result.failed) result.j = ppo.sentinel_j;
  return result;
}

}  // namespace skate
