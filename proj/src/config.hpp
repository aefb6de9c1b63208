#pragma once

// Run configuration: flat key=value text, named presets and the canonical
// serialization used for round trips and output metadata.

#include <string>
#include <string_view>
#include <vector>

#include "fock_core.hpp"
#include "quasiprob.hpp"

namespace ionjc {

enum class Mode {
  Sigma22ClassicalOrdered,
  Sigma22ClassicalNoOrdering,
  Sigma22Quantized,
  CompareOrdering,
  ComparePump,
  PFunction,
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct RunConfig {
  Mode mode = Mode::Sigma22Quantized;
  std::string name = "run";
  ModelParams params;

  // Classical pump: tau = |kappa beta_cl| t, r = delta_omega / |kappa beta_cl|.
  double r = 0.0;

  int initial_level = 1;
  double alpha0_abs = 0.0;
  double alpha0_arg = 0.0;
  double beta0_abs = 0.0;
  double beta0_arg = 0.0;

  // tau for the classical and compare modes, t~ for sigma22-quantized.
  double t_start = 0.0;
  double t_end = 1.0;
  int n_points = 101;
  std::vector<double> t_snapshots;  // pfunction
  std::vector<double> beta0_list;   // compare-pump

  std::string filter_kind = "radial";
  quasiprob::FilterSpec filter;
  quasiprob::GridSpec grid;

  double tail_epsilon = 1e-12;
  int n_max_motion = 0;  // 0 selects the cutoff from tail_epsilon
  int m_max_pump = 0;
  double ode_tol = 1e-10;
  double threshold = 0.1;  // compare-ordering gap of interest

  std::string output;  // base file name; defaults to `name`
  std::string cache_dir = ".ionjc-cache";

  cd alpha0() const { return std::polar(alpha0_abs, alpha0_arg); }
  cd beta0() const { return std::polar(beta0_abs, beta0_arg); }
  std::string output_stem() const { return output.empty() ? name : output; }
  /// Evenly spaced grid t_start .. t_end with n_points entries.
  std::vector<double> time_grid() const;

  /// Throws ValidationError naming the offending key.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates. ParseError carries the line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Every key, one per line, doubles at 17 significant digits.
std::string serialize(const RunConfig& config);

/// fig2, fig3-weak, fig3-strong, fig4. Throws UnknownPreset.
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// FNV-1a digest of the serialized config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace ionjc
