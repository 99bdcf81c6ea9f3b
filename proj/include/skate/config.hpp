#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "skate/codesign.hpp"
#include "skate/ppo.hpp"

namespace skate {

// One self-describing experiment: every field has a default, unknown keys are
// rejected with the section and key named, and the fully materialized config
// is persisted next to the run outputs.
struct ExperimentConfig {
  SimParams sim;
  TaskConfig task;
  RewardWeights rewards;
  MetricConfig metric;
  PpoConfig ppo;
  BoConfig bo;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  TrainSetup train_setup() const;
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& config);

}  // namespace skate
