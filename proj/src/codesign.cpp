#include "skate/codesign.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "skate/rng.hpp"

namespace skate {
namespace {

constexpr double kRadToDeg = 57.29577951308232;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void BoConfig::validate() const {
  if (budget < initial_design_size()) {
    throw std::invalid_argument(
        "bo: budget smaller than the initial design (2*d_free+2)");
  }
  if (beta_start < beta_end || beta_end <= 0.0) {
    throw std::invalid_argument("bo: need beta_start >= beta_end > 0");
  }
  if (phase1_frac < 0.0 || phase2_frac < 0.0 ||
      phase1_frac + phase2_frac > 1.0) {
    throw std::invalid_argument("bo: bad phase fractions");
  }
}

int BoConfig::initial_design_size() const { return 2 * free_dimension(mode) + 2; }

const EvalRecord& CodesignResult::best() const {
  if (best_index < 0 || best_index >= static_cast<int>(records.size())) {
    throw std::runtime_error("codesign: no best record");
  }
  return records[static_cast<std::size_t>(best_index)];
}

std::string eval_record_to_json_line(const EvalRecord& record,
                                     CouplingMode mode) {
  nlohmann::json j;
  j["iteration"] = record.iteration;
  j["phase"] = record.phase;
  j["mode"] = to_string(mode);
  j["u"] = to_std(record.u);
  j["reduced_deg"] = to_std(record.reduced * kRadToDeg);
  j["angles_deg"] = to_std(record.design.angles() * kRadToDeg);
  j["seed"] = record.seed;
  j["J"] = record.j;
  j["failed"] = record.failed;
  j["checkpoint"] = record.checkpoint;
  return j.dump();
}

std::vector<EvalRecord> read_codesign_log(const std::string& path,
                                          CouplingMode mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open codesign log: " + path);
  std::vector<EvalRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      EvalRecord r;
      r.iteration = j.at("iteration").get<int>();
      r.phase = j.at("phase").get<std::string>();
      if (j.at("mode").get<std::string>() != to_string(mode)) {
        throw std::runtime_error("coupling mode mismatch");
      }
      const auto u = j.at("u").get<std::vector<double>>();
      r.u = Eigen::Map<const Eigen::VectorXd>(u.data(),
                                              static_cast<Eigen::Index>(u.size()));
      r.reduced = from_unit_cube(r.u, mode);
      r.design = expand_design(r.reduced, mode);
      r.seed = j.at("seed").get<std::uint64_t>();
      r.j = j.at("J").get<double>();
      r.failed = j.at("failed").get<bool>();
      r.checkpoint = j.at("checkpoint").get<std::string>();
      if (r.iteration != static_cast<int>(records.size())) {
        throw std::runtime_error("iteration index out of sequence");
      }
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("corrupt codesign log at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

CodesignResult run_codesign(const BoConfig& config, std::uint64_t master_seed,
                            const Evaluator& evaluate,
                            const std::string& log_path, bool resume) {
  config.validate();
  const int d = free_dimension(config.mode);
  const int n_init = config.initial_design_size();
  const AcquisitionSchedule schedule = AcquisitionSchedule::from_budget(
      config.budget - n_init, config.beta_start, config.beta_end,
      config.phase1_frac, config.phase2_frac);

  CodesignResult result;
  if (resume) {
    if (log_path.empty()) {
      throw std::invalid_argument("codesign: resume needs a log path");
    }
    result.records = read_codesign_log(log_path, config.mode);
    if (static_cast<int>(result.records.size()) > config.budget) {
      throw std::runtime_error("codesign: log longer than budget");
    }
  }

  for (int it = static_cast<int>(result.records.size()); it < config.budget;
       ++it) {
    EvalRecord record;
    record.iteration = it;
    if (it < n_init) {
      record.phase = "init";
      record.u = halton_point(it + 1, d);
    } else {
      Eigen::MatrixXd x(it, d);
      Eigen::VectorXd y(it);
      std::vector<Eigen::VectorXd> seen(static_cast<std::size_t>(it));
      for (int k = 0; k < it; ++k) {
        x.row(k) = result.records[static_cast<std::size_t>(k)].u.transpose();
        y[k] = -result.records[static_cast<std::size_t>(k)].j;
        seen[static_cast<std::size_t>(k)] =
            result.records[static_cast<std::size_t>(k)].u;
      }
      GpModel gp(d);
      gp.set_data(x, y);
      gp.fit(config.fit);
      const int proposal = it - n_init;
      record.phase = schedule.phase_label(proposal);
      record.u = propose_next(gp, schedule, proposal, seen);
    }
    record.reduced = from_unit_cube(record.u, config.mode);
    record.design = expand_design(record.reduced, config.mode);
    record.seed =
        Rng::derive(master_seed, 1000 + static_cast<std::uint64_t>(it));

    const auto t0 = std::chrono::steady_clock::now();
    const InnerEval eval = evaluate(record.design, record.seed, it);
    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    record.j = eval.j;
    record.failed = eval.failed;
    record.checkpoint = eval.checkpoint;

    if (!log_path.empty()) {
      std::ofstream out(log_path, std::ios::app);
      if (!out) throw std::runtime_error("cannot append to codesign log: " + log_path);
      out << eval_record_to_json_line(record, config.mode) << "\n";
      out.flush();
      if (!out) throw std::runtime_error("codesign log write failed: " + log_path);
      std::ofstream timing(log_path + ".timing", std::ios::app);
      if (timing) {
        timing << record.iteration << " " << record.wall_time_s << "\n";
      }
    }
    result.records.push_back(std::move(record));
  }

  for (std::size_t k = 0; k < result.records.size(); ++k) {
    if (result.best_index < 0 ||
        result.records[k].j <
            result.records[static_cast<std::size_t>(result.best_index)].j) {
      result.best_index = static_cast<int>(k);
    }
  }
  return result;
}

}  // namespace skate
