#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "skate/rng.hpp"

namespace skate {

// Quasi-random low-discrepancy sequences used for GP restarts, acquisition
// probes, and initial designs. index starts at 1.
double halton(int index, int base);
Eigen::VectorXd halton_point(int index, int dim);

struct GpHyperparams {
  Eigen::VectorXd length_scales;
  double signal_var = 1.0;
  double noise_var = 1e-3;

  static GpHyperparams defaults(int dim);
};

// sigma_f^2 exp(-1/2 sum_j ((x_j - y_j)/l_j)^2)
double se_ard_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const GpHyperparams& hp);

struct GpFitOptions {
  int n_starts = 8;
  int iterations = 150;
  double learning_rate = 0.05;
  double noise_floor = 1e-6;
};

// Exact GP regression on [0,1]^d with an SE-ARD kernel. Targets are
// standardized internally; posteriors are reported in standardized units of
// the latent function (no observation noise in the predictive variance).
class GpModel {
 public:
  explicit GpModel(int dim);

  // X: one point per row, n x dim; y: raw targets (callers pass -J).
  void set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(y_.size()); }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }
  const GpHyperparams& hyperparams() const { return hp_; }
  bool factorized() const { return factorized_; }

  // Multi-start ML-II over log hyperparameters. Returns false (retaining the
  // previous hyperparameters) when every start fails to factorize.
  bool fit(const GpFitOptions& options = GpFitOptions{});

  void set_hyperparams(const GpHyperparams& hp);

  // Standardized latent posterior at one query point.
  void posterior(const Eigen::VectorXd& x, double& mean, double& var) const;

  // Largest standardized target (incumbent for EI under maximization).
  double best_observed() const;

  double log_marginal_likelihood() const;
  // d LML / d [log l_1..d, log sigma_f^2, log sigma_n^2].
  Eigen::VectorXd lml_gradient() const;

 private:
  bool factorize();

  int dim_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;   // raw
  Eigen::VectorXd z_;   // standardized
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  GpHyperparams hp_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  bool factorized_ = false;
};

}  // namespace skate
