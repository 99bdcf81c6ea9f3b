#include "skate/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skate {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMaxJitter = 1e-4;
constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x,
                              const GpHyperparams& hp) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hp.signal_var;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = se_ard_kernel(x.row(i), x.row(j), hp);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

struct LogParams {
  Eigen::VectorXd v;  // [log l_1..d, log sf2, log sn2]

  GpHyperparams to_hyperparams(int dim) const {
    GpHyperparams hp;
    hp.length_scales = v.head(dim).array().exp();
    hp.signal_var = std::exp(v[dim]);
    hp.noise_var = std::exp(v[dim + 1]);
    return hp;
  }
};

}  // namespace

double halton(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

Eigen::VectorXd halton_point(int index, int dim) {
  if (dim > 8) throw std::invalid_argument("halton_point supports dim <= 8");
  Eigen::VectorXd p(dim);
  for (int j = 0; j < dim; ++j) p[j] = halton(index, kHaltonBases[j]);
  return p;
}

GpHyperparams GpHyperparams::defaults(int dim) {
  GpHyperparams hp;
  hp.length_scales = Eigen::VectorXd::Constant(dim, 0.3);
  hp.signal_var = 1.0;
  hp.noise_var = 1e-3;
  return hp;
}

double se_ard_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const GpHyperparams& hp) {
  const Eigen::ArrayXd d = (x - y).array() / hp.length_scales.array();
  return hp.signal_var * std::exp(-0.5 * d.square().sum());
}

GpModel::GpModel(int dim) : dim_(dim), hp_(GpHyperparams::defaults(dim)) {
  if (dim <= 0) throw std::invalid_argument("GpModel: dim must be positive");
}

void GpModel::set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() != dim_ || X.rows() != y.size()) {
    throw std::invalid_argument("GpModel::set_data: shape mismatch");
  }
  x_ = X;
  y_ = y;
  y_mean_ = y_.size() > 0 ? y_.mean() : 0.0;
  const double var =
      y_.size() > 0
          ? (y_.array() - y_mean_).square().sum() / static_cast<double>(y_.size())
          : 0.0;
  y_std_ = std::sqrt(var);
  if (y_std_ < 1e-12) y_std_ = 1.0;
  z_ = ((y_.array() - y_mean_) / y_std_).matrix();
  factorized_ = false;
}

bool GpModel::factorize() {
  factorized_ = false;
  const Eigen::Index n = z_.size();
  if (n == 0) return false;
  const Eigen::MatrixXd k = kernel_matrix(x_, hp_);
  for (double jitter = 0.0;;) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += hp_.noise_var + jitter;
    llt_.compute(kn);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      alpha_ = llt_.solve(z_);
      factorized_ = true;
      return true;
    }
    if (jitter >= kMaxJitter) return false;
    jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    if (jitter > kMaxJitter) jitter = kMaxJitter;
  }
}

void GpModel::set_hyperparams(const GpHyperparams& hp) {
  if (hp.length_scales.size() != dim_) {
    throw std::invalid_argument("GpModel::set_hyperparams: dim mismatch");
  }
  hp_ = hp;
  factorize();
}

double GpModel::log_marginal_likelihood() const {
  if (!factorized_) throw std::runtime_error("GpModel: not factorized");
  const auto n = static_cast<double>(z_.size());
  const double half_log_det =
      llt_.matrixLLT().diagonal().array().log().sum();
  return -0.5 * z_.dot(alpha_) - half_log_det - 0.5 * n * kLog2Pi;
}

Eigen::VectorXd GpModel::lml_gradient() const {
  if (!factorized_) throw std::runtime_error("GpModel: not factorized");
  const Eigen::Index n = z_.size();
  const Eigen::MatrixXd kinv =
      llt_.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd outer = alpha_ * alpha_.transpose();
  const Eigen::MatrixXd w = outer - kinv;  // 0.5 tr(w dK/dtheta)

  GpHyperparams noiseless = hp_;
  noiseless.noise_var = 0.0;
  const Eigen::MatrixXd kf = kernel_matrix(x_, noiseless);

  Eigen::VectorXd grad(dim_ + 2);
  for (int j = 0; j < dim_; ++j) {
    const double lj2 = hp_.length_scales[j] * hp_.length_scales[j];
    double acc = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        const double d = x_(a, j) - x_(b, j);
        acc += w(a, b) * kf(a, b) * (d * d / lj2);
      }
    }
    grad[j] = 0.5 * acc;
  }
  grad[dim_] = 0.5 * (w.array() * kf.array()).sum();
  grad[dim_ + 1] = 0.5 * hp_.noise_var * w.trace();
  return grad;
}

bool GpModel::fit(const GpFitOptions& options) {
  if (z_.size() < 2) {
    throw std::invalid_argument("GpModel::fit needs at least 2 observations");
  }
  const GpHyperparams previous = hp_;
  const int np = dim_ + 2;

  const double lo_len = std::log(0.05), hi_len = std::log(2.0);
  const double lo_sf = std::log(0.1), hi_sf = std::log(5.0);
  const double lo_sn = std::log(1e-5), hi_sn = std::log(0.5);
  const double log_floor = std::log(options.noise_floor);

  double best_lml = -std::numeric_limits<double>::infinity();
  LogParams best;
  bool any = false;

  for (int start = 0; start < options.n_starts; ++start) {
    LogParams p;
    p.v.resize(np);
    const Eigen::VectorXd u = halton_point(start + 1, np);
    for (int j = 0; j < dim_; ++j) p.v[j] = lo_len + u[j] * (hi_len - lo_len);
    p.v[dim_] = lo_sf + u[dim_] * (hi_sf - lo_sf);
    p.v[dim_ + 1] = lo_sn + u[dim_ + 1] * (hi_sn - lo_sn);

    Eigen::VectorXd m = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd v2 = Eigen::VectorXd::Zero(np);
    double lml = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int it = 0; it < options.iterations; ++it) {
      hp_ = p.to_hyperparams(dim_);
      if (!factorize()) {
        ok = false;
        break;
      }
      lml = log_marginal_likelihood();
      const Eigen::VectorXd g = lml_gradient();
      if (!g.allFinite() || !std::isfinite(lml)) {
        ok = false;
        break;
      }
      const double t = static_cast<double>(it + 1);
      m = 0.9 * m + 0.1 * g;
      v2 = 0.999 * v2.array().matrix() + 0.001 * g.array().square().matrix();
      const double bc1 = 1.0 - std::pow(0.9, t);
      const double bc2 = 1.0 - std::pow(0.999, t);
      p.v.array() += options.learning_rate * (m.array() / bc1) /
                     ((v2.array() / bc2).sqrt() + 1e-8);
      p.v = p.v.cwiseMax(-12.0).cwiseMin(12.0);
      p.v[dim_ + 1] = std::max(p.v[dim_ + 1], log_floor);
    }
    if (!ok) continue;

    // Adam's constant step stalls an oscillation-width short of the optimum;
    // a damped Newton polish (finite-difference Hessian over the analytic
    // gradient) takes each surviving start the rest of the way, so starts in
    // one basin agree to numerical precision. The noise floor acts as a
    // projected coordinate.
    double tau = 1e-8;
    for (int it = 0; it < 100; ++it) {
      hp_ = p.to_hyperparams(dim_);
      if (!factorize()) break;
      const double f0 = log_marginal_likelihood();
      Eigen::VectorXd g = lml_gradient();
      if (!std::isfinite(f0) || !g.allFinite()) break;
      const bool pinned =
          p.v[dim_ + 1] <= log_floor + 1e-12 && g[dim_ + 1] < 0.0;
      if (pinned) g[dim_ + 1] = 0.0;
      if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;

      Eigen::MatrixXd hess(np, np);
      const double hd = 1e-6;
      bool hess_ok = true;
      for (int j = 0; j < np; ++j) {
        LogParams q = p;
        q.v[j] += hd;
        hp_ = q.to_hyperparams(dim_);
        if (!factorize()) {
          hess_ok = false;
          break;
        }
        const Eigen::VectorXd gp = lml_gradient();
        q.v[j] -= 2.0 * hd;
        hp_ = q.to_hyperparams(dim_);
        if (!factorize()) {
          hess_ok = false;
          break;
        }
        hess.col(j) = (gp - lml_gradient()) / (2.0 * hd);
      }
      if (!hess_ok || !hess.allFinite()) break;
      hess = (0.5 * (hess + hess.transpose())).eval();
      if (pinned) {
        hess.row(dim_ + 1).setZero();
        hess.col(dim_ + 1).setZero();
        hess(dim_ + 1, dim_ + 1) = -1.0;
      }

      bool stepped = false;
      while (tau < 1e12) {
        Eigen::MatrixXd damped = -hess;
        damped.diagonal().array() += tau;
        const Eigen::LLT<Eigen::MatrixXd> dllt(damped);
        if (dllt.info() == Eigen::Success) {
          LogParams trial = p;
          trial.v += dllt.solve(g);
          trial.v = trial.v.cwiseMax(-12.0).cwiseMin(12.0);
          trial.v[dim_ + 1] = std::max(trial.v[dim_ + 1], log_floor);
          hp_ = trial.to_hyperparams(dim_);
          if (factorize()) {
            const double f1 = log_marginal_likelihood();
            if (std::isfinite(f1) &&
                f1 > f0 - 1e-11 * (1.0 + std::abs(f0))) {
              const double moved = (trial.v - p.v).lpNorm<Eigen::Infinity>();
              p = trial;
              tau = std::max(tau * 0.1, 1e-12);
              stepped = moved > 1e-13;
              break;
            }
          }
        }
        tau *= 10.0;
      }
      if (!stepped) break;
    }

    hp_ = p.to_hyperparams(dim_);
    if (!factorize()) continue;
    lml = log_marginal_likelihood();
    if (std::isfinite(lml) && lml > best_lml) {
      best_lml = lml;
      best = p;
      any = true;
    }
  }

  if (!any) {
    hp_ = previous;
    factorize();
    return false;
  }
  hp_ = best.to_hyperparams(dim_);
  return factorize();
}

void GpModel::posterior(const Eigen::VectorXd& x, double& mean,
                        double& var) const {
  if (!factorized_) throw std::runtime_error("GpModel: not factorized");
  const Eigen::Index n = z_.size();
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kx[i] = se_ard_kernel(x_.row(i), x, hp_);
  }
  mean = kx.dot(alpha_);
  Eigen::VectorXd v = kx;
  llt_.matrixL().solveInPlace(v);
  var = std::max(0.0, hp_.signal_var - v.squaredNorm());
}

double GpModel::best_observed() const {
  if (z_.size() == 0) throw std::runtime_error("GpModel: no data");
  return z_.maxCoeff();
}

}  // namespace skate
