#pragma once

// Experiment configuration: a single JSON file describing the struct
// layout, region, plan, workload, cache hierarchy, DRAM geometry/policy and
// measurement mode.  Everything is validated up front; a ConfigError names
// the offending key path so nothing fails halfway through a simulation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "remapsim/engine.hpp"
#include "remapsim/layout.hpp"
#include "remapsim/workload.hpp"

namespace remapsim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error("config error at '" + path + "': " + message),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ExperimentConfig {
  StructLayout layout;
  RegionSpec region;
  RemapPlan plan;  // identity when the config gives none
  WorkloadSpec workload;
  HierarchyConfig hierarchy;
  DramConfig dram;
  RunOptions options;
  std::string output;  // empty = command default
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace remapsim
