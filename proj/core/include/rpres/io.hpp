#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpres/oracle.hpp"
#include "rpres/partition.hpp"
#include "rpres/resonance.hpp"
#include "rpres/transfer.hpp"

namespace rpres {

namespace fs = std::filesystem;

/// 17 significant digits, as printf("%.17g").
std::string format_double(double v);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// Trajectory CSV: header `t,x,y` (the t column label carries the optional
/// time unit as `t[unit]`), row n at t = n * sampling_interval.
void write_trajectory_csv(const fs::path& path, const Trajectory& traj,
                          const std::string& time_unit_label = "");
Trajectory read_trajectory_csv(const fs::path& path);

/// Sojourn density CSV: header `box,m`, one row per box of the full grid.
void write_density_csv(const fs::path& path, const SojournDensity& m);
SojournDensity read_density_csv(const fs::path& path);

/// Matrix file: first line `# ` followed by a one-line JSON header
/// {lag, lag_steps, dim, full_dim, kept_boxes, grid, standardization},
/// then the triplet CSV `i,j,p` with original (full-grid) box indices,
/// column-major order.
struct MatrixFile {
  TransitionMatrix matrix;
  GridSpec grid;
  Standardization affine;
};
void write_matrix_file(const fs::path& path, const TransitionMatrix& T, const GridSpec& grid,
                       const Standardization& affine);
MatrixFile read_matrix_file(const fs::path& path);

/// Eigenvector CSV: header `box,re,im` with original box indices.
void write_vector_csv(const fs::path& path, std::span<const BoxIndex> boxes,
                      const Eigen::VectorXcd& v);
std::pair<std::vector<BoxIndex>, Eigen::VectorXcd> read_vector_csv(const fs::path& path);

/// Resonance JSON and its per-resonance eigenvector CSVs. Vector files sit
/// in `<json stem>_vectors/` and are referenced relative to the JSON file.
struct ResonanceFile {
  HopfParams hopf;
  GridSpec grid;
  std::vector<BoxIndex> kept_boxes;
  ResonanceSet set;
  std::vector<cplx> single_lag_a;  // to_generator of every eigenvalue at tau
  std::vector<cplx> single_lag_b;  // same at tau + dtau
  std::vector<std::optional<cplx>> weights;  // empty or one per resonance
};
/// Returns every file written (JSON last).
std::vector<fs::path> write_resonance_json(const fs::path& path, const ResonanceFile& file);
ResonanceFile read_resonance_json(const fs::path& path, bool load_vectors = true);

struct OracleFile {
  HopfParams hopf;
  ResonanceLattice lattice;
  std::optional<FloquetData> floquet;
  std::optional<double> phi_analytic;
};
void write_oracle_json(const fs::path& path, const OracleFile& file);
OracleFile read_oracle_json(const fs::path& path);

/// Rewrites `path` only through a temporary sibling and a rename.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

} // namespace rpres
