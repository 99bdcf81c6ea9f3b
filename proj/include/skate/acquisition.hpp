#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "skate/gp.hpp"

namespace skate {

double normal_pdf(double z);
double normal_cdf(double z);

// mean + beta * sqrt(variance)
double ucb(double mean, double variance, double beta);
// Expected improvement over best on the maximization convention; the sigma=0
// limit is max(mean - best, 0).
double ei(double mean, double variance, double best);

// Three-phase schedule over the proposals that follow the initial design:
// constant high-beta UCB, UCB with beta annealed linearly from beta_start to
// beta_end, then EI.
struct AcquisitionSchedule {
  int phase1_end = 0;  // proposals [0, phase1_end)
  int phase2_end = 0;  // proposals [phase1_end, phase2_end)
  int total = 0;
  double beta_start = 4.0;
  double beta_end = 1.0;

  // Splits a proposal budget 40/40/20 by default.
  static AcquisitionSchedule from_budget(int proposals, double beta_start = 4.0,
                                         double beta_end = 1.0,
                                         double phase1_frac = 0.4,
                                         double phase2_frac = 0.4);

  int phase(int proposal) const;  // 1, 2, or 3
  double beta(int proposal) const;
  std::string phase_label(int proposal) const;  // "ucb", "ucb-anneal", "ei"
};

// Maximizes the phase's acquisition over [0,1]^d: dense grids for d <= 2
// (1001 points in 1D, 101x101 in 2D, ties broken by lowest index), 4096
// quasi-random probes refined by coordinate ascent for d >= 3. Candidates
// exactly equal to an excluded point are skipped (the GP's noise floor keeps
// variance alive at evaluated points, which would otherwise be re-proposed
// forever on deterministic objectives).
Eigen::VectorXd propose_next(const GpModel& model,
                             const AcquisitionSchedule& schedule, int proposal,
                             const std::vector<Eigen::VectorXd>& exclude = {});

}  // namespace skate
