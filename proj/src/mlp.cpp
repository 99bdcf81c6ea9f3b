#include "skate/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace skate {

void Mlp::Grads::set_zero() {
  for (auto& m : w) m.setZero();
  for (auto& v : b) v.setZero();
}

Mlp::Grads& Mlp::Grads::operator+=(const Grads& other) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] += other.w[i];
    b[i] += other.b[i];
  }
  return *this;
}

Mlp::Mlp(const std::vector<int>& dims) : dims_(dims) {
  if (dims.size() < 2) {
    throw std::invalid_argument("Mlp needs at least input and output dims");
  }
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("Mlp layer widths must be positive");
  }
  for (std::size_t l = 1; l < dims.size(); ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(dims[l], dims[l - 1]));
    biases_.emplace_back(Eigen::VectorXd::Zero(dims[l]));
  }
}

Mlp Mlp::initialized(const std::vector<int>& dims, Rng& rng, double out_scale) {
  Mlp net(dims);
  const int last = net.n_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd& w = net.weights_[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = rng.uniform(-bound, bound);
      }
    }
    if (l == last) w *= out_scale;
  }
  return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Eigen::MatrixXd a = input;
  const int last = n_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
    a = (l < last) ? z.array().tanh().matrix() : std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& input,
                                    Cache& cache) const {
  cache.activations.assign(1, input);
  const int last = n_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z =
        (weights_[l] * cache.activations.back()).colwise() + biases_[l];
    cache.activations.push_back(l < last ? z.array().tanh().matrix()
                                         : std::move(z));
  }
  return cache.activations.back();
}

Mlp::Grads Mlp::backward(const Cache& cache,
                         const Eigen::MatrixXd& upstream) const {
  Grads grads = zero_grads();
  const int last = n_layers() - 1;
  Eigen::MatrixXd delta = upstream;
  for (int l = last; l >= 0; --l) {
    if (l < last) {
      const Eigen::MatrixXd& a = cache.activations[static_cast<std::size_t>(l) + 1];
      delta = delta.cwiseProduct((1.0 - a.array().square()).matrix());
    }
    grads.w[l] = delta * cache.activations[l].transpose();
    grads.b[l] = delta.rowwise().sum();
    if (l > 0) delta = weights_[l].transpose() * delta;
  }
  return grads;
}

Mlp::Grads Mlp::zero_grads() const {
  Grads grads;
  for (const auto& w : weights_) grads.w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : biases_) grads.b.push_back(Eigen::VectorXd::Zero(b.size()));
  return grads;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& w : weights_) n += w.size();
  for (const auto& b : biases_) n += b.size();
  return n;
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(at, weights_[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
    at += weights_[l].size();
    flat.segment(at, biases_[l].size()) = biases_[l];
    at += biases_[l].size();
  }
  return flat;
}

void Mlp::set_from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("flat parameter size mismatch");
  }
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) =
        flat.segment(at, weights_[l].size());
    at += weights_[l].size();
    biases_[l] = flat.segment(at, biases_[l].size());
    at += biases_[l].size();
  }
}

Eigen::VectorXd Mlp::flatten_grads(const Grads& grads) {
  Eigen::Index n = 0;
  for (const auto& w : grads.w) n += w.size();
  for (const auto& b : grads.b) n += b.size();
  Eigen::VectorXd flat(n);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < grads.w.size(); ++l) {
    flat.segment(at, grads.w[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(grads.w[l].data(), grads.w[l].size());
    at += grads.w[l].size();
    flat.segment(at, grads.b[l].size()) = grads.b[l];
    at += grads.b[l].size();
  }
  return flat;
}

}  // namespace skate
