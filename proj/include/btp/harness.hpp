#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "btp/errors.hpp"
#include "btp/exit.hpp"
#include "btp/random.hpp"

namespace btp {

inline constexpr const char* kVersion = "btplab 1.0.0";

/// Bad experiment name, unknown key or unparseable value. The message names
/// the offending key.
class UsageError : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

struct RunConfig {
  std::string experiment;
  std::map<std::string, std::string> params;  // raw text values, parsed per experiment
  Seed seed{};
  std::string output_path;  // empty: <experiment>.csv
};

/// marginal, pde-residual, exit, thm4, halfgen, converge.
const std::vector<std::string>& experiment_names();

/// Keys an experiment accepts (besides seed and out).
const std::vector<std::string>& experiment_keys(const std::string& experiment);

/// `key = value` lines; blank lines and `#` comments are skipped. Throws
/// UsageError on malformed lines or repeated keys.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct ExperimentOutput {
  std::vector<VerificationReport> reports;
  /// Effective parameters including defaults, as recorded in the CSV.
  std::map<std::string, std::string> parameters;

  bool pass() const;
};

/// Runs the experiment without writing anything. Throws UsageError for
/// configuration problems.
ExperimentOutput execute(const RunConfig& config);

/// Header row plus data rows (no comment lines); a pure function of the output.
std::string csv_payload(const ExperimentOutput& output);

/// Comment metadata lines (including a timestamp) followed by csv_payload.
std::string csv_document(const RunConfig& config, const ExperimentOutput& output);

void write_summary(std::ostream& os, const RunConfig& config, const ExperimentOutput& output);

/// execute + CSV file + summary. Returns 0 iff every report passes.
int run(const RunConfig& config, std::ostream& summary);

}  // namespace btp
