#pragma once

#include "fraclab/flow.hpp"
#include "fraclab/morse.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace fraclab {

// ---------------------------------------------------------------------------
// Field files: optional leading '#' comment lines, a header line
// "n sigma L symmetry" (symmetry 0 full, 1 zonal, 2 axial) and then one
// coefficient per line in basis order.

struct StoredField {
  SpectralField field;
  double sigma = 0.0;
};

void write_field(const std::string& path, const SpectralField& field, double sigma,
                 const std::string& comment = "");
/// Throws InputError for unreadable or malformed files.
StoredField read_field(const std::string& path);

int symmetry_code(Symmetry s);
Symmetry symmetry_from_code(int code);
Symmetry parse_symmetry(const std::string& name);

// ---------------------------------------------------------------------------
// Run configuration: "key = value" lines, '#' comments, [section] headers.
// Keys outside a section are global; "K.family = linear" is the same as
// "family = linear" under [K].

struct KSpec {
  std::string family = "constant";  // constant, linear, two-peak, harmonic
  double value = 1.0;               // constant
  double a = 2.0, b = 1.0;          // linear: a + b xi_j
  int j = 0;                        // linear; 0 means n + 1
  double base = 1.0, eps = 0.005;   // two-peak: base + eps (sum w_i xi_i^2 - center)
  double center = std::numeric_limits<double>::quiet_NaN();  // NaN: the mean
  double anisotropy = 0.2;
  std::string file;  // harmonic: a field file
};

/// Throws ConfigurationError for an unknown family, InputError for an unreadable file.
SphereFunction make_k(const KSpec& spec, int n);

struct RunConfig {
  std::string command;
  int n = 3;
  double sigma = 0.25;
  int truncation = 64;
  Symmetry symmetry = Symmetry::zonal;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  KSpec k;

  int spectrum_k_max = 10;

  double residual_lambda = 2.0;
  std::vector<int> residual_truncations{16, 32, 64};

  CalibrationOptions calibration;

  FlowOptions flow;
  std::string flow_initial = "perturbed-constant";  // perturbed-constant, constant, file
  double flow_perturbation = 0.1;
  std::string flow_initial_file;
  bool flow_trace = true;

  int p_max = 2;
  CriticalPointOptions critical;

  std::map<std::string, std::string> entries;  // canonical "section.key" -> value
  std::string digest;                          // SHA-256 of the canonical entries
};

inline const std::vector<std::string> kCommands{"spectrum", "bubble-residual", "expansion-verify", "flow",
                                                "existence"};

/// Parses and validates. `command` (or a global "command" key) enables the
/// command's own range checks. Collects every problem and throws one
/// ConfigurationError listing them all.
RunConfig parse_config(const std::string& text, const std::string& command = "");
RunConfig load_config(const std::string& path, const std::string& command = "");

/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& text);

/// Exit statuses of run_command.
enum ExitStatus { kSuccess = 0, kNegativeOutcome = 1, kConfigurationFailure = 2, kNumericalFailure = 3 };

/// Runs one command, writing CSV and JSON artifacts into config.output_dir.
/// Library errors are mapped to exit statuses and reported on stderr.
int run_command(const std::string& name, const RunConfig& config, bool quiet = false);

}  // namespace fraclab
