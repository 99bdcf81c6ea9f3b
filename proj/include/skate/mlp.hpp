#pragma once

#include <vector>

#include <Eigen/Core>

#include "skate/rng.hpp"

namespace skate {

// Fully connected network with tanh hidden activations and a linear output
// layer. Layouts are given as layer widths, e.g. {26, 64, 64, 12}. Batches
// are column-major: one sample per column.
class Mlp {
 public:
  struct Cache {
    // activations[0] is the input, activations[l] the post-activation output
    // of layer l (linear for the last layer).
    std::vector<Eigen::MatrixXd> activations;
  };

  struct Grads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    void set_zero();
    Grads& operator+=(const Grads& other);
  };

  Mlp() = default;
  explicit Mlp(const std::vector<int>& dims);

  // Xavier-uniform weights; the last layer is scaled by out_scale.
  static Mlp initialized(const std::vector<int>& dims, Rng& rng,
                         double out_scale = 1.0);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int n_layers() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& dims() const { return dims_; }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& input,
                                 Cache& cache) const;

  // Backpropagates dL/doutput (output_dim x batch) through the cached pass.
  Grads backward(const Cache& cache, const Eigen::MatrixXd& upstream) const;

  Grads zero_grads() const;

  // Flat parameter views in fixed (W1, b1, W2, b2, ...) order.
  Eigen::Index parameter_count() const;
  Eigen::VectorXd flatten() const;
  void set_from_flat(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten_grads(const Grads& grads);

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

}  // namespace skate
