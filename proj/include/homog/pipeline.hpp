#pragma once

#include <string>
#include <vector>

#include "homog/config.hpp"

namespace homog {

// Process exit codes shared with the CLI.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_solver = 3;
inline constexpr int exit_validation = 4;

struct PipelineOptions {
  std::string out_dir;  // empty: config [run] out
  int log_level = 1;    // 0 quiet, 1 info, 2 debug
};

const std::vector<std::string>& all_stages();

// Runs one stage against the artifact directory; returns an exit code.
// Stages communicate only through serialized artifacts.
int run_stage(const SimConfig& cfg, const std::string& stage, const PipelineOptions& opt);

// Runs stages in pipeline order (deduplicated, `all` expands to every stage).
int run_pipeline(const SimConfig& cfg, std::vector<std::string> stages,
                 const PipelineOptions& opt);

// Corrector artifacts round trip (directory of field files plus manifest).
void save_corrector_set(const std::string& dir, const CorrectorSet& cs);
CorrectorSet load_corrector_set(const std::string& dir);

}  // namespace homog
