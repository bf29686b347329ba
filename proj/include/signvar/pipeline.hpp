#pragma once

#include "signvar/config.hpp"
#include "signvar/diagnostics.hpp"
#include "signvar/gibbs.hpp"
#include "signvar/restrictions.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace signvar {

/// Worker threads from SIGNVAR_WORKERS (default 1). Throws ConfigError on a
/// malformed value.
int worker_count();

struct PipelineResult {
  ModelSpec spec;
  std::vector<std::string> variables;
  NiwParams posterior;
  RestrictionSet restrictions;
  std::vector<PosteriorDraws> chains;  // one entry for accept-reject
  IrfBands bands;
  nlohmann::json diagnostics;
};

/// Runs load -> regressors -> prior -> posterior -> sampler -> summaries and
/// writes every output. `stage` names the step in progress, so callers can
/// report where a failure happened.
PipelineResult execute(const RunConfig& config, std::string& stage, std::ostream& log);

/// execute() with errors reported on `err`; returns the process exit code
/// (0, or 2 config, 3 data, 4 infeasible, 5 numerical, 1 other).
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// Reads the config file, then run().
int run_file(const std::string& config_path, std::ostream& log, std::ostream& err);

}  // namespace signvar
