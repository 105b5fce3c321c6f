#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rpres/partition.hpp"
#include "rpres/sparse.hpp"

namespace rpres {

/// Orientation used throughout: column j of a transition matrix holds the
/// probabilities of moving FROM box j, so T acts on densities from the left
/// (1^T T = 1^T) and T^T acts on observables.
struct CountEntry {
  BoxIndex to;
  BoxIndex from;
  std::int64_t count;
};

struct TransitionCounts {
  std::int64_t lag_steps = 1;
  std::size_t dim = 0;
  // Sorted by (from, to), counts > 0, no duplicates.
  std::vector<CountEntry> entries;
  std::int64_t admissible_pairs = 0;

  std::int64_t total() const;
  std::vector<std::int64_t> outgoing() const;
};

/// Half-open sample range [begin, end).
using SampleRange = std::pair<std::size_t, std::size_t>;

/// Counts pairs (Y_n, Y_{n+lag}) with both endpoints in the domain.
/// Throws Error(LagTooLong) when no admissible pair exists.
TransitionCounts count_transitions(const GridSpec& grid, const Trajectory& traj,
                                   std::int64_t lag_steps, unsigned threads = 1);

/// Same, but pairs never straddle segment boundaries; used for block
/// deletion (jackknife) runs.
TransitionCounts count_transitions(const GridSpec& grid, const Trajectory& traj,
                                   std::int64_t lag_steps,
                                   std::span<const SampleRange> segments,
                                   unsigned threads = 1);

/// Contiguous segments covering [0, n) except block `left_out` of `blocks`.
std::vector<SampleRange> leave_one_block_out(std::size_t n, std::size_t blocks,
                                             std::size_t left_out);

struct TransitionMatrix {
  double lag = 1.0;              // physical lag tau
  std::int64_t lag_steps = 1;    // lag in samples
  std::size_t full_dim = 0;      // M
  std::vector<BoxIndex> kept_boxes;  // strictly increasing, size M'
  CscMatrix matrix;              // M' x M', local indices into kept_boxes

  std::size_t dim() const { return kept_boxes.size(); }
};

/// Boxes whose outgoing transitions stay inside the kept set, found by
/// repeatedly removing boxes with zero outgoing count into the survivors.
std::vector<BoxIndex> support(const TransitionCounts& counts);

/// Fixed point of the same pruning applied to several count sets at once;
/// every returned box has outgoing mass into the set under every lag.
std::vector<BoxIndex> common_support(std::span<const TransitionCounts> counts);

/// Column-normalized matrix restricted to support(counts).
TransitionMatrix normalize(const TransitionCounts& counts, double sampling_interval);

/// Column-normalized matrix restricted to `kept` (sorted). Transitions into
/// boxes outside `kept` are dropped before normalization.
TransitionMatrix normalize_on(const TransitionCounts& counts, std::span<const BoxIndex> kept,
                              double sampling_interval);

/// Restriction of m to kept boxes, renormalized to unit mass.
/// Throws Error(ZeroMass) when the restricted mass vanishes.
std::vector<double> restrict_density(const SojournDensity& m, std::span<const BoxIndex> kept);

} // namespace rpres
