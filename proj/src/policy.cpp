#include "skate/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace skate {
namespace {

constexpr char kMagic[8] = {'S', 'K', 'C', 'K', 'P', 'T', '0', '1'};
constexpr double kLog2Pi = 1.8378770664093453;

void write_i64(std::ofstream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int64_t read_i64(std::ifstream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

PolicyParams PolicyParams::initialized(int obs_dim, int act_dim,
                                       std::uint64_t seed) {
  Rng policy_rng(Rng::derive(seed, 0));
  Rng value_rng(Rng::derive(seed, 1));
  PolicyParams params;
  params.policy = Mlp::initialized({obs_dim, 64, 64, act_dim}, policy_rng, 0.01);
  params.value = Mlp::initialized({obs_dim, 64, 64, 1}, value_rng, 1.0);
  params.log_std = Eigen::VectorXd::Constant(act_dim, kLogStdInit);
  params.clamp_log_std();
  return params;
}

void PolicyParams::clamp_log_std() {
  log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::Index PolicyParams::parameter_count() const {
  return policy.parameter_count() + value.parameter_count() + log_std.size();
}

Eigen::VectorXd PolicyParams::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  flat << policy.flatten(), value.flatten(), log_std;
  return flat;
}

void PolicyParams::set_from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("policy flat parameter size mismatch");
  }
  Eigen::Index at = 0;
  policy.set_from_flat(flat.segment(at, policy.parameter_count()));
  at += policy.parameter_count();
  value.set_from_flat(flat.segment(at, value.parameter_count()));
  at += value.parameter_count();
  log_std = flat.segment(at, log_std.size());
}

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& action) {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  Eigen::ArrayXXd d = (action - mean).array();
  Eigen::VectorXd logp =
      (-0.5 * (d.square().colwise() * inv_var)).colwise().sum();
  const double base =
      -log_std.sum() - 0.5 * kLog2Pi * static_cast<double>(mean.rows());
  return logp.array() + base;
}

Eigen::MatrixXd gaussian_log_prob_dmean(const Eigen::MatrixXd& mean,
                                        const Eigen::VectorXd& log_std,
                                        const Eigen::MatrixXd& action) {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  return ((action - mean).array().colwise() * inv_var).matrix();
}

Eigen::VectorXd gaussian_log_prob_dlogstd(const Eigen::MatrixXd& mean,
                                          const Eigen::VectorXd& log_std,
                                          const Eigen::MatrixXd& action,
                                          const Eigen::VectorXd& weight) {
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const Eigen::ArrayXXd scaled =
      (action - mean).array().square().colwise() * inv_var;
  // d logp / d log_std_i = ((a - mu)_i^2 / sigma_i^2) - 1 per sample.
  return (scaled - 1.0).matrix() * weight;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() +
         0.5 * static_cast<double>(log_std.size()) * (kLog2Pi + 1.0);
}

Eigen::MatrixXd gaussian_sample(const Eigen::MatrixXd& mean,
                                const Eigen::VectorXd& log_std, Rng& rng) {
  Eigen::MatrixXd sample(mean.rows(), mean.cols());
  const Eigen::ArrayXd std = log_std.array().exp();
  for (Eigen::Index c = 0; c < mean.cols(); ++c) {
    for (Eigen::Index r = 0; r < mean.rows(); ++r) {
      sample(r, c) = mean(r, c) + std(r) * rng.normal();
    }
  }
  return sample;
}

AdamState AdamState::zeros(Eigen::Index n) {
  AdamState state;
  state.m = Eigen::VectorXd::Zero(n);
  state.v = Eigen::VectorXd::Zero(n);
  state.t = 0;
  return state;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step size mismatch");
  }
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v.array().matrix() +
            (1.0 - beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() += lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + eps);
}

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& fingerprint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_i64(out, static_cast<std::int64_t>(fingerprint.size()));
  out.write(fingerprint.data(), static_cast<std::streamsize>(fingerprint.size()));

  auto write_dims = [&](const Mlp& net) {
    write_i64(out, static_cast<std::int64_t>(net.dims().size()));
    for (int d : net.dims()) write_i64(out, d);
  };
  write_dims(params.policy);
  write_dims(params.value);
  write_i64(out, params.log_std.size());

  const Eigen::VectorXd flat = params.flatten();
  write_i64(out, flat.size());
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

PolicyParams load_checkpoint(const std::string& path,
                             const std::string& fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a policy checkpoint: " + path);
  }
  const std::int64_t fp_len = read_i64(in);
  if (fp_len < 0 || fp_len > 4096) {
    throw std::runtime_error("corrupt checkpoint header: " + path);
  }
  std::string fp(static_cast<std::size_t>(fp_len), '\0');
  in.read(fp.data(), fp_len);
  if (fp != fingerprint) {
    throw std::runtime_error("checkpoint fingerprint mismatch: expected \"" +
                             fingerprint + "\" got \"" + fp + "\"");
  }

  auto read_dims = [&]() {
    const std::int64_t n = read_i64(in);
    if (n < 2 || n > 64) throw std::runtime_error("corrupt checkpoint dims");
    std::vector<int> dims(static_cast<std::size_t>(n));
    for (auto& d : dims) d = static_cast<int>(read_i64(in));
    return dims;
  };
  PolicyParams params;
  params.policy = Mlp(read_dims());
  params.value = Mlp(read_dims());
  params.log_std = Eigen::VectorXd::Zero(read_i64(in));

  const std::int64_t flat_size = read_i64(in);
  if (flat_size != params.parameter_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  Eigen::VectorXd flat(flat_size);
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(flat_size * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint truncated: " + path);
  params.set_from_flat(flat);
  return params;
}

}  // namespace skate
