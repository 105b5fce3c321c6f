#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpres/config.hpp"
#include "rpres/io.hpp"
#include "rpres/spectral.hpp"

namespace rpres {

// In-process stages. The cmd_* wrappers below add file I/O and manifests.

struct EstimatedMatrices {
  TransitionMatrix a;  // lag tau
  TransitionMatrix b;  // lag tau + dtau
  SojournDensity density;       // full grid
  std::vector<double> m_kept;   // restricted to the shared kept set
  Standardization affine;
};

/// Standardizes `traj`, counts both lags (pairs never straddle segments
/// when given) and normalizes both on their common support.
EstimatedMatrices estimate_matrices(const RunConfig& cfg, const Trajectory& traj,
                                    std::span<const SampleRange> segments = {});

struct ResonanceEstimate {
  ResonanceSet set;  // paired, filtered, sorted
  std::vector<EigenPair> pairs_a;
  std::vector<EigenPair> pairs_b;
  std::vector<cplx> single_a;
  std::vector<cplx> single_b;
};

ResonanceEstimate estimate_resonances(const RunConfig& cfg, const TransitionMatrix& a,
                                      const TransitionMatrix& b, std::span<const double> m);

/// Observable in physical coordinates.
double observable_value(const std::string& name, const State& s);
ObservableVec observable_on_boxes(const std::string& name, const GridSpec& grid,
                                  const Standardization& affine, std::span<const BoxIndex> kept);

struct Reconstruction {
  std::vector<double> t;
  std::vector<double> c_reconstructed;
  std::vector<double> c_sample;
  std::vector<double> omega;
  std::vector<double> freq;
  std::vector<double> s_reconstructed;  // one-sided, per cycle: 4 pi S(2 pi f)
  std::vector<double> s_sample;         // Welch, one-sided, per cycle
  std::vector<cplx> weights;
  std::pair<double, double> means;
  double rmse_correlation = 0.0;
  double rmse_psd = 0.0;
  double psd_peak_height = 0.0;  // max of s_sample over the reported band
  double max_imag_residue = 0.0;
  std::size_t welch_segment = 0;
};

Reconstruction reconstruct(const RunConfig& cfg, const ResonanceSet& set, std::span<const BoxIndex> kept,
                           std::span<const double> m, const Standardization& affine, const Trajectory& traj);

OracleFile run_oracle(const RunConfig& cfg);

struct LatticeMatch {
  int estimate = -1;
  int lattice = -1;
  cplx estimated;
  cplx predicted;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / |predicted|, +inf for the zero point
};

struct CompareReport {
  Regime regime = Regime::Subcritical;
  std::vector<LatticeMatch> matches;  // in estimate order
  std::vector<int> unmatched_estimates;
};

/// Greedy by complex distance: the globally closest (estimate, lattice point)
/// pair is fixed first; a lattice point absorbs at most `multiplicity` estimates.
CompareReport compare_to_lattice(std::span<const cplx> estimates, const ResonanceLattice& lattice);

// File-level stages. Each writes its outputs, then a manifest, under an
// exclusive lock on the output directory, and returns every path written.

struct StageOutput {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

struct Paths {
  explicit Paths(const RunConfig& cfg);
  std::filesystem::path dir;
  std::string stem;
  std::filesystem::path trajectory() const;
  std::filesystem::path density() const;
  std::filesystem::path matrix_a() const;
  std::filesystem::path matrix_b() const;
  std::filesystem::path resonances() const;
  std::filesystem::path correlation() const;
  std::filesystem::path psd() const;
  std::filesystem::path reconstruct_summary() const;
  std::filesystem::path weighted_resonances() const;
  std::filesystem::path oracle() const;
  std::filesystem::path compare() const;
  std::filesystem::path manifest(const std::string& stage) const;
  std::filesystem::path lock() const;
};

struct EstimateOptions {
  std::optional<std::filesystem::path> trajectory;
  int jackknife = 0;                          // 0 disables
  std::vector<std::int64_t> converge_grid;    // boxes per dimension
  std::vector<double> converge_lag;           // tau values
};

StageOutput cmd_simulate(const RunConfig& cfg);
StageOutput cmd_estimate(const RunConfig& cfg, const EstimateOptions& opts = {});
StageOutput cmd_resonances(const RunConfig& cfg, const std::optional<std::filesystem::path>& matrix_a = {},
                           const std::optional<std::filesystem::path>& matrix_b = {},
                           const std::optional<std::filesystem::path>& density = {});
StageOutput cmd_reconstruct(const RunConfig& cfg, const std::optional<std::filesystem::path>& resonances = {},
                            const std::optional<std::filesystem::path>& trajectory = {});
StageOutput cmd_oracle(const RunConfig& cfg);
StageOutput cmd_compare(const RunConfig& cfg, const std::optional<std::filesystem::path>& resonances = {},
                        const std::optional<std::filesystem::path>& oracle = {});

std::string software_version();

} // namespace rpres
