#include "rpres/partition.hpp"

#include <cmath>
#include <thread>

#include "rpres/error.hpp"

namespace rpres {

void GridSpec::validate() const {
  for (int d = 0; d < 2; ++d) {
    if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || !(lo[d] < hi[d]))
      fail(ErrorKind::InvalidArgument, "GridSpec: lo must be < hi in every dimension");
    if (n_per_dim[d] < 1)
      fail(ErrorKind::InvalidArgument, "GridSpec: n_per_dim must be >= 1");
  }
  if (n_per_dim[0] * n_per_dim[1] > (std::int64_t{1} << 31))
    fail(ErrorKind::InvalidArgument, "GridSpec: too many boxes");
}

State GridSpec::center(BoxIndex box) const {
  const auto ix = static_cast<std::int64_t>(box) % n_per_dim[0];
  const auto iy = static_cast<std::int64_t>(box) / n_per_dim[0];
  return {lo[0] + (static_cast<double>(ix) + 0.5) * width(0),
          lo[1] + (static_cast<double>(iy) + 0.5) * width(1)};
}

std::optional<BoxIndex> locate(const GridSpec& grid, const State& point) {
  std::array<std::int64_t, 2> k{};
  for (int d = 0; d < 2; ++d) {
    const double v = point[d];
    if (!(v >= grid.lo[d] && v < grid.hi[d])) return std::nullopt;
    auto idx = static_cast<std::int64_t>(
        std::floor((v - grid.lo[d]) / (grid.hi[d] - grid.lo[d]) *
                   static_cast<double>(grid.n_per_dim[d])));
    // v < hi can still round up to n at the last box edge.
    if (idx >= grid.n_per_dim[d]) idx = grid.n_per_dim[d] - 1;
    if (idx < 0) idx = 0;
    k[d] = idx;
  }
  return static_cast<BoxIndex>(k[0] + grid.n_per_dim[0] * k[1]);
}

std::vector<std::optional<BoxIndex>> locate_all(const GridSpec& grid,
                                                std::span<const State> points) {
  std::vector<std::optional<BoxIndex>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(locate(grid, p));
  return out;
}

StandardizedTrajectory standardize(const Trajectory& traj) {
  if (traj.empty()) fail(ErrorKind::InvalidArgument, "standardize: empty trajectory");
  const auto n = static_cast<double>(traj.size());
  Standardization affine;
  for (int d = 0; d < 2; ++d) {
    double sum = 0.0;
    for (const auto& s : traj.states) sum += s[d];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : traj.states) ss += (s[d] - mean) * (s[d] - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd >= 1e-14))
      fail(ErrorKind::DegenerateVariance,
           "standardize: dimension " + std::to_string(d) + " has zero variance");
    affine.mean[d] = mean;
    affine.stddev[d] = sd;
  }
  StandardizedTrajectory out{{traj.sampling_interval, {}}, affine};
  out.trajectory.states.reserve(traj.size());
  for (const auto& s : traj.states) out.trajectory.states.push_back(affine.forward(s));
  return out;
}

std::vector<std::int64_t> occupancy_counts(const GridSpec& grid,
                                           std::span<const State> points,
                                           unsigned threads) {
  grid.validate();
  const std::size_t m = grid.box_count();
  auto count_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> counts(m, 0);
    for (std::size_t n = begin; n < end; ++n)
      if (const auto box = locate(grid, points[n])) ++counts[*box];
    return counts;
  };
  if (threads <= 1 || points.size() < 2 * static_cast<std::size_t>(threads))
    return count_range(0, points.size());

  std::vector<std::vector<std::int64_t>> shards(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = points.size() / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = (t + 1 == threads) ? points.size() : b + chunk;
      workers.emplace_back([&, t, b, e] { shards[t] = count_range(b, e); });
    }
  }
  std::vector<std::int64_t> total(m, 0);
  for (const auto& s : shards)
    for (std::size_t i = 0; i < m; ++i) total[i] += s[i];
  return total;
}

SojournDensity density_from_counts(std::span<const std::int64_t> counts) {
  std::int64_t inside = 0;
  for (auto c : counts) inside += c;
  if (inside == 0) fail(ErrorKind::EmptyDomain, "sojourn_density: no sample inside the domain");
  SojournDensity out;
  out.n_samples_in_domain = inside;
  out.values.resize(counts.size());
  const auto denom = static_cast<double>(inside);
  for (std::size_t i = 0; i < counts.size(); ++i)
    out.values[i] = static_cast<double>(counts[i]) / denom;
  return out;
}

SojournDensity sojourn_density(const GridSpec& grid, const Trajectory& traj) {
  return density_from_counts(occupancy_counts(grid, traj.states));
}

} // namespace rpres
