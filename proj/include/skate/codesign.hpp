#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skate/acquisition.hpp"
#include "skate/design_space.hpp"
#include "skate/gp.hpp"

namespace skate {

struct BoConfig {
  CouplingMode mode = CouplingMode::Coupled1D;
  int budget = 20;  // total evaluations, initial design included
  double beta_start = 4.0;
  double beta_end = 1.0;
  double phase1_frac = 0.4;
  double phase2_frac = 0.4;
  GpFitOptions fit;

  void validate() const;
  int initial_design_size() const;
};

struct EvalRecord {
  int iteration = 0;
  std::string phase;        // "init", "ucb", "ucb-anneal", "ei"
  Eigen::VectorXd u;        // unit-cube design coordinates (authoritative)
  Eigen::VectorXd reduced;  // radians
  DesignVector design;
  std::uint64_t seed = 0;
  double j = 0.0;
  bool failed = false;
  std::string checkpoint;
  double wall_time_s = 0.0;  // written to the timing sidecar, not the log
};

struct InnerEval {
  double j = 0.0;
  bool failed = false;
  std::string checkpoint;
};

using Evaluator =
    std::function<InnerEval(const DesignVector& design, std::uint64_t seed,
                            int iteration)>;

struct CodesignResult {
  std::vector<EvalRecord> records;
  int best_index = -1;

  const EvalRecord& best() const;
};

std::string eval_record_to_json_line(const EvalRecord& record,
                                     CouplingMode mode);
// Throws std::runtime_error naming the 1-based line number on corrupt input.
std::vector<EvalRecord> read_codesign_log(const std::string& path,
                                          CouplingMode mode);

// Outer loop: space-filling initial design of 2*d_free+2 points, then
// fit -> propose -> evaluate until budget evaluations exist. Each record is
// appended to log_path (JSON lines) before the next evaluation starts, so an
// interrupted run resumes exactly. Empty log_path keeps everything in memory.
// Per-evaluation RL seeds derive from (master_seed, iteration).
CodesignResult run_codesign(const BoConfig& config, std::uint64_t master_seed,
                            const Evaluator& evaluate,
                            const std::string& log_path = std::string(),
                            bool resume = false);

}  // namespace skate
