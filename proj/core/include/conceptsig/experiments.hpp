#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace conceptsig {

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string bound;  // human-readable requirement, empty for report-only values
  bool ok = true;
};

struct ExperimentResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

// Acceptance experiments in order; each is deterministic given the seed.
const std::vector<std::string>& experiment_ids();

// Throws InputError for an unknown id.
ExperimentResult run_experiment(const std::string& id, std::uint64_t seed = 0);

nlohmann::json experiment_to_json(const ExperimentResult& r);

}  // namespace conceptsig
