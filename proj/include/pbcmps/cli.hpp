#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pbcmps/optimizer.hpp"

namespace pbcmps {

enum class RunMode { optimize, scan, observables, oracle, report };
const char* to_string(RunMode mode);
RunMode parse_mode(const std::string& s);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int validation = 2;
inline constexpr int not_converged = 3;
inline constexpr int oracle_mismatch = 4;
}  // namespace exit_code

/// One batch run. Serialized as key=value lines; parse(serialize(s)) == s.
struct RunSpec {
  std::string model = "ising:B=1";
  long long N = 12;
  int D = 4;
  RunMode mode = RunMode::optimize;
  /// Defaults: m = (N-2)/2, n = D^2.
  std::optional<int> m;
  std::optional<int> n;
  ScanConfig scan;
  OptimizeConfig optimize;
  InitStrategy init = InitStrategy::perturbed_product;
  /// Tensor file for init=file, the source tensor for init=continuation and
  /// the state for mode=observables.
  std::filesystem::path tensor_file;
  std::filesystem::path out = "results";
  /// Directory scanned by mode=report.
  std::filesystem::path results;
  std::uint64_t seed = 1;

  friend bool operator==(const RunSpec& a, const RunSpec& b);
};

std::string serialize(const RunSpec& spec);
/// Unknown keys and malformed values throw ValidationError.
RunSpec parse_spec(const std::string& text);
RunSpec load_spec(const std::filesystem::path& file);
/// Applies one key=value assignment.
void set_field(RunSpec& spec, const std::string& key, const std::string& value);
void validate(const RunSpec& spec);

/// Executes the spec, writes artifacts under spec.out and prints a one-line
/// summary to log. Returns one of the exit codes above.
int run(const RunSpec& spec, std::ostream& log);

/// Aggregates every result.json below results_dir into report.csv (relative
/// error against the oracle reference) and fits.csv (power-law fits per
/// model and N), both written into out_dir.
int report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace pbcmps
