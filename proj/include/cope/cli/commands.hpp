#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/pipeline/run.hpp"
#include "cope/stats/metrics.hpp"
#include "cope/util/error.hpp"

namespace cope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitBackend = 4;
inline constexpr int kExitPartial = 5;

int exit_code_for(ErrorKind kind);

/// Everything persisted in a run directory.
struct RunData {
  std::filesystem::path dir;
  pipeline::RunManifest manifest;
  std::vector<pipeline::PredictionRecord> predictions;
  corpus::Cohort cohort;  // the records the run was asked to score
};

/// Throws DataError when the directory lacks a manifest, predictions or
/// cohort snapshot.
RunData load_run(const std::filesystem::path& dir);

/// Labeled cohort records with an ok prediction, in patient id order.
/// `excluded` receives the number of cohort records left out.
stats::PairedOutcomes outcomes_of(const RunData& run, std::size_t& excluded);

/// Entry point of the `cope` tool. Results go to `out`; failures produce a
/// JSON object {"error": {kind, message, details}} on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cope::cli
