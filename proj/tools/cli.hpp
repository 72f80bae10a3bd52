#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "robin/experiments.hpp"

namespace robin::cli {

/// iter,residual,beta,rel_change,rel_error with 17 significant digits.
void write_history_csv(std::ostream& out, const ExperimentResult& result);
/// y,gamma_exact,gamma_reconstructed over the inaccessible-segment nodes.
void write_profile_csv(std::ostream& out, const ExperimentResult& result);

nlohmann::json spec_json(const ExperimentSpec& spec);
nlohmann::json summary_json(const ExperimentResult& result);

/// Runs one experiment and writes history.csv, profile.csv and summary.json
/// into `dir`. Exceptions raised before the iteration starts (bad mesh size,
/// unknown example) still produce a summary carrying the message. Returns
/// true when the run did not fail.
bool run_and_write(const ExperimentSpec& spec, const std::filesystem::path& dir,
                   ExperimentResult* out = nullptr, std::string* error = nullptr);

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace robin::cli
