#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rpres/hopf_sde.hpp"

namespace rpres {

using BoxIndex = std::uint32_t;

/// Rectangular partition of [lo, hi) into n_per_dim[0] x n_per_dim[1]
/// half-open boxes. Boxes are numbered row-major: i = ix + n0 * iy.
struct GridSpec {
  std::array<double, 2> lo{-4.5, -4.5};
  std::array<double, 2> hi{4.5, 4.5};
  std::array<std::int64_t, 2> n_per_dim{50, 50};

  void validate() const;
  std::size_t box_count() const {
    return static_cast<std::size_t>(n_per_dim[0] * n_per_dim[1]);
  }
  double width(int dim) const {
    return (hi[dim] - lo[dim]) / static_cast<double>(n_per_dim[dim]);
  }
  State center(BoxIndex box) const;
};

std::optional<BoxIndex> locate(const GridSpec& grid, const State& point);

/// Box index of every sample; nullopt for out-of-domain samples.
std::vector<std::optional<BoxIndex>> locate_all(const GridSpec& grid,
                                                std::span<const State> points);

struct Standardization {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stddev{1.0, 1.0};

  State forward(const State& s) const {
    return {(s[0] - mean[0]) / stddev[0], (s[1] - mean[1]) / stddev[1]};
  }
  State inverse(const State& s) const {
    return {s[0] * stddev[0] + mean[0], s[1] * stddev[1] + mean[1]};
  }
};

struct StandardizedTrajectory {
  Trajectory trajectory;
  Standardization affine;
};

/// Zero-mean, unit (population) standard deviation per dimension.
/// Throws Error(DegenerateVariance) when a dimension has std < 1e-14.
StandardizedTrajectory standardize(const Trajectory& traj);

struct SojournDensity {
  std::vector<double> values;
  std::int64_t n_samples_in_domain = 0;
};

/// Box occupancy counts (integer, exact). `threads` > 1 shards the samples.
std::vector<std::int64_t> occupancy_counts(const GridSpec& grid,
                                           std::span<const State> points,
                                           unsigned threads = 1);

/// Relative occupancy of each box among in-domain samples.
/// Throws Error(EmptyDomain) when no sample lies in the domain.
SojournDensity sojourn_density(const GridSpec& grid, const Trajectory& traj);
SojournDensity density_from_counts(std::span<const std::int64_t> counts);

} // namespace rpres
