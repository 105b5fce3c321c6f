#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rpres/hopf_sde.hpp"
#include "rpres/partition.hpp"

namespace rpres {

inline constexpr int kConfigSchemaVersion = 1;

struct LagConfig {
  double tau = 4.0;
  double dtau = 0.1;
};

struct EigenConfig {
  int k = 15;
  double tol = 1e-10;
  double kappa_max = 5.0;
  double pairing_threshold = 0.5;
  int max_restarts = 30;
  int krylov_dim = 60;  // 0 selects max(2k + 10, 40)
};

/// Observables: "x", "y", "r2" (x^2 + y^2), "x2my2" (x^2 - y^2), "const".
struct SpectralConfig {
  std::int64_t max_lag = 600;      // correlation lags, in samples
  std::int64_t t_points = 301;     // rows of the correlation CSV
  double omega_max = 3.0;          // last angular frequency in the PSD CSV
  std::int64_t welch_segment = 0;  // 0 selects N / 8
  double welch_overlap = 0.5;
  std::string observable = "x";
};

struct OracleConfig {
  int max_order = 4;  // fixed-point lattice: l + n <= max_order
  int max_n = 4;      // limit-cycle lattice: |n| <= max_n
  int max_l = 2;      //                      l <= max_l
  int n_quad = 4096;
};

struct IoConfig {
  std::filesystem::path output_dir = "out";
  std::string stem = "run";
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  HopfParams hopf{-0.2, 1.0, 0.0, 0.1};
  SimConfig sim;
  GridSpec grid;
  LagConfig lags;
  EigenConfig eigen;
  SpectralConfig spectral;
  OracleConfig oracle;
  IoConfig io;
  unsigned threads = 1;
  std::optional<std::string> time_unit_label;

  /// Throws Error(InvalidArgument) on any inconsistency, including lags
  /// that are not integer multiples of the sampling interval or dtau >= tau.
  void validate() const;

  std::int64_t tau_steps() const;
  std::int64_t dtau_steps() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON; parse_config(serialize_config(c)) == c field by field.
std::string serialize_config(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

} // namespace rpres
