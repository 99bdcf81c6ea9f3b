#include "skate/acquisition.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skate {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kInvSqrt2 = 0.7071067811865476;

double acquisition_value(const GpModel& model, const AcquisitionSchedule& sched,
                         int proposal, double best, const Eigen::VectorXd& x) {
  double mean = 0.0, var = 0.0;
  model.posterior(x, mean, var);
  if (sched.phase(proposal) == 3) return ei(mean, var, best);
  return ucb(mean, var, sched.beta(proposal));
}

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double ucb(double mean, double variance, double beta) {
  return mean + beta * std::sqrt(std::max(0.0, variance));
}

double ei(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  const double gap = mean - best;
  if (sigma <= 0.0) return std::max(gap, 0.0);
  const double z = gap / sigma;
  return gap * normal_cdf(z) + sigma * normal_pdf(z);
}

AcquisitionSchedule AcquisitionSchedule::from_budget(int proposals,
                                                     double beta_start,
                                                     double beta_end,
                                                     double phase1_frac,
                                                     double phase2_frac) {
  if (proposals < 0) throw std::invalid_argument("schedule: negative budget");
  if (beta_start < beta_end || beta_end <= 0.0) {
    throw std::invalid_argument("schedule: need beta_start >= beta_end > 0");
  }
  AcquisitionSchedule s;
  s.total = proposals;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.phase1_end = static_cast<int>(std::floor(phase1_frac * proposals));
  s.phase2_end =
      s.phase1_end + static_cast<int>(std::floor(phase2_frac * proposals));
  if (s.phase2_end > proposals) s.phase2_end = proposals;
  return s;
}

int AcquisitionSchedule::phase(int proposal) const {
  if (proposal < phase1_end) return 1;
  if (proposal < phase2_end) return 2;
  return 3;
}

double AcquisitionSchedule::beta(int proposal) const {
  if (proposal < phase1_end) return beta_start;
  if (proposal >= phase2_end) return beta_end;
  const int span = phase2_end - phase1_end;
  if (span <= 1) return beta_end;
  const double progress = static_cast<double>(proposal - phase1_end) /
                          static_cast<double>(span - 1);
  return beta_start + progress * (beta_end - beta_start);
}

std::string AcquisitionSchedule::phase_label(int proposal) const {
  switch (phase(proposal)) {
    case 1:
      return "ucb";
    case 2:
      return "ucb-anneal";
    default:
      return "ei";
  }
}

Eigen::VectorXd propose_next(const GpModel& model,
                             const AcquisitionSchedule& schedule, int proposal,
                             const std::vector<Eigen::VectorXd>& exclude) {
  const int d = model.dim();
  const double best = model.best_observed();
  const auto value = [&](const Eigen::VectorXd& x) {
    return acquisition_value(model, schedule, proposal, best, x);
  };
  const auto excluded = [&](const Eigen::VectorXd& x) {
    for (const auto& e : exclude) {
      if (e.size() == x.size() && (e.array() == x.array()).all()) return true;
    }
    return false;
  };

  if (d == 1) {
    Eigen::VectorXd x(1), arg(1);
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
      x[0] = static_cast<double>(i) / 1000.0;
      if (excluded(x)) continue;
      const double v = value(x);
      if (v > best_v) {
        best_v = v;
        arg = x;
      }
    }
    if (!std::isfinite(best_v)) return propose_next(model, schedule, proposal);
    return arg;
  }
  if (d == 2) {
    Eigen::VectorXd x(2), arg(2);
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100; ++i) {
      x[0] = static_cast<double>(i) / 100.0;
      for (int j = 0; j <= 100; ++j) {
        x[1] = static_cast<double>(j) / 100.0;
        if (excluded(x)) continue;
        const double v = value(x);
        if (v > best_v) {
          best_v = v;
          arg = x;
        }
      }
    }
    if (!std::isfinite(best_v)) return propose_next(model, schedule, proposal);
    return arg;
  }

  Eigen::VectorXd arg = halton_point(1, d);
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 4096; ++i) {
    const Eigen::VectorXd x = halton_point(i, d);
    if (excluded(x)) continue;
    const double v = value(x);
    if (v > best_v) {
      best_v = v;
      arg = x;
    }
  }
  Eigen::VectorXd x = arg;
  for (int pass = 0; pass < 4; ++pass) {
    for (int j = 0; j < d; ++j) {
      double coord_best = best_v;
      double coord_arg = x[j];
      for (int i = 0; i <= 100; ++i) {
        x[j] = static_cast<double>(i) / 100.0;
        if (excluded(x)) continue;
        const double v = value(x);
        if (v > coord_best) {
          coord_best = v;
          coord_arg = x[j];
        }
      }
      x[j] = coord_arg;
      best_v = coord_best;
    }
  }
  return x;
}

}  // namespace skate
