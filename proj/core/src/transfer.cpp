#include "rpres/transfer.hpp"

#include <algorithm>
#include <thread>

#include "rpres/error.hpp"

namespace rpres {

std::int64_t TransitionCounts::total() const {
  std::int64_t t = 0;
  for (const auto& e : entries) t += e.count;
  return t;
}

std::vector<std::int64_t> TransitionCounts::outgoing() const {
  std::vector<std::int64_t> out(dim, 0);
  for (const auto& e : entries) out[e.from] += e.count;
  return out;
}

namespace {

using Key = std::uint64_t;

std::vector<CountEntry> run_length(std::vector<Key>& keys, std::size_t dim) {
  std::sort(keys.begin(), keys.end());
  std::vector<CountEntry> out;
  for (std::size_t k = 0; k < keys.size();) {
    std::size_t e = k;
    while (e < keys.size() && keys[e] == keys[k]) ++e;
    out.push_back({static_cast<BoxIndex>(keys[k] % dim), static_cast<BoxIndex>(keys[k] / dim),
                   static_cast<std::int64_t>(e - k)});
    k = e;
  }
  return out;
}

std::vector<CountEntry> merge_entries(std::vector<std::vector<CountEntry>> shards) {
  std::vector<CountEntry> all;
  for (auto& s : shards) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end(), [](const CountEntry& a, const CountEntry& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  std::vector<CountEntry> out;
  for (const auto& e : all) {
    if (!out.empty() && out.back().from == e.from && out.back().to == e.to)
      out.back().count += e.count;
    else
      out.push_back(e);
  }
  return out;
}

} // namespace

std::vector<SampleRange> leave_one_block_out(std::size_t n, std::size_t blocks,
                                             std::size_t left_out) {
  if (blocks < 2 || left_out >= blocks)
    fail(ErrorKind::InvalidArgument, "leave_one_block_out: need blocks >= 2 and left_out < blocks");
  const std::size_t b = n * left_out / blocks;
  const std::size_t e = n * (left_out + 1) / blocks;
  std::vector<SampleRange> segs;
  if (b > 0) segs.emplace_back(0, b);
  if (e < n) segs.emplace_back(e, n);
  return segs;
}

TransitionCounts count_transitions(const GridSpec& grid, const Trajectory& traj,
                                   std::int64_t lag_steps, unsigned threads) {
  const SampleRange all{0, traj.size()};
  return count_transitions(grid, traj, lag_steps, std::span<const SampleRange>(&all, 1), threads);
}

TransitionCounts count_transitions(const GridSpec& grid, const Trajectory& traj,
                                   std::int64_t lag_steps,
                                   std::span<const SampleRange> segments, unsigned threads) {
  grid.validate();
  if (lag_steps < 1) fail(ErrorKind::InvalidArgument, "count_transitions: lag must be >= 1");
  if (static_cast<std::size_t>(lag_steps) >= traj.size())
    fail(ErrorKind::LagTooLong, "count_transitions: lag must be shorter than the trajectory");
  const std::size_t dim = grid.box_count();
  const auto lag = static_cast<std::size_t>(lag_steps);
  const auto boxes = locate_all(grid, traj.states);

  // Work items: (segment-start, pair-start range).
  std::vector<SampleRange> pair_ranges;
  for (const auto& [b, e] : segments) {
    if (b > e || e > traj.size()) fail(ErrorKind::InvalidArgument, "count_transitions: bad segment");
    if (e - b > lag) pair_ranges.emplace_back(b, e - lag);
  }

  auto count_range = [&](std::size_t begin, std::size_t end, std::int64_t& admissible) {
    std::vector<Key> keys;
    keys.reserve(end - begin);
    for (std::size_t n = begin; n < end; ++n) {
      const auto& a = boxes[n];
      const auto& b = boxes[n + lag];
      if (a && b) keys.push_back(static_cast<Key>(*a) * dim + *b);
    }
    admissible += static_cast<std::int64_t>(keys.size());
    return run_length(keys, dim);
  };

  // Split every pair range into `threads` chunks; the merge is exact.
  struct Job {
    std::size_t begin, end;
    std::vector<CountEntry> result;
    std::int64_t admissible = 0;
  };
  std::vector<Job> jobs;
  const unsigned parts = std::max(1u, threads);
  for (const auto& [b, e] : pair_ranges) {
    const std::size_t len = e - b;
    for (unsigned t = 0; t < parts; ++t) {
      const std::size_t jb = b + len * t / parts;
      const std::size_t je = b + len * (t + 1) / parts;
      if (je > jb) jobs.push_back({jb, je, {}, 0});
    }
  }
  if (parts > 1) {
    std::vector<std::jthread> workers;
    for (auto& job : jobs)
      workers.emplace_back([&job, &count_range] { job.result = count_range(job.begin, job.end, job.admissible); });
  } else {
    for (auto& job : jobs) job.result = count_range(job.begin, job.end, job.admissible);
  }

  TransitionCounts counts;
  counts.lag_steps = lag_steps;
  counts.dim = dim;
  std::vector<std::vector<CountEntry>> shards;
  for (auto& job : jobs) {
    counts.admissible_pairs += job.admissible;
    shards.push_back(std::move(job.result));
  }
  counts.entries = merge_entries(std::move(shards));
  if (counts.admissible_pairs == 0)
    fail(ErrorKind::LagTooLong, "count_transitions: no pair with both endpoints in the domain");
  return counts;
}

std::vector<BoxIndex> common_support(std::span<const TransitionCounts> counts) {
  if (counts.empty()) return {};
  const std::size_t dim = counts.front().dim;
  for (const auto& c : counts)
    if (c.dim != dim) fail(ErrorKind::InvalidArgument, "common_support: dimension mismatch");

  std::vector<char> alive(dim, 1);
  for (const auto& c : counts) {
    const auto out = c.outgoing();
    for (std::size_t i = 0; i < dim; ++i)
      if (out[i] == 0) alive[i] = 0;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : counts) {
      std::vector<std::int64_t> inside(dim, 0);
      for (const auto& e : c.entries)
        if (alive[e.to]) inside[e.from] += e.count;
      for (std::size_t i = 0; i < dim; ++i)
        if (alive[i] && inside[i] == 0) {
          alive[i] = 0;
          changed = true;
        }
    }
  }
  std::vector<BoxIndex> kept;
  for (std::size_t i = 0; i < dim; ++i)
    if (alive[i]) kept.push_back(static_cast<BoxIndex>(i));
  return kept;
}

std::vector<BoxIndex> support(const TransitionCounts& counts) {
  return common_support(std::span<const TransitionCounts>(&counts, 1));
}

TransitionMatrix normalize_on(const TransitionCounts& counts, std::span<const BoxIndex> kept,
                              double sampling_interval) {
  if (kept.empty()) fail(ErrorKind::InvalidArgument, "normalize: no column with outgoing transitions");
  if (!std::is_sorted(kept.begin(), kept.end()) ||
      std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    fail(ErrorKind::InvalidArgument, "normalize: kept boxes must be strictly increasing");

  std::vector<std::int64_t> local(counts.dim, -1);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (kept[k] >= counts.dim) fail(ErrorKind::InvalidArgument, "normalize: kept box out of range");
    local[kept[k]] = static_cast<std::int64_t>(k);
  }
  std::vector<std::int64_t> colsum(kept.size(), 0);
  for (const auto& e : counts.entries)
    if (local[e.from] >= 0 && local[e.to] >= 0) colsum[local[e.from]] += e.count;
  for (std::size_t k = 0; k < kept.size(); ++k)
    if (colsum[k] == 0)
      fail(ErrorKind::InvalidArgument,
           "normalize: kept box " + std::to_string(kept[k]) + " has no transitions inside the kept set");

  std::vector<Triplet> t;
  t.reserve(counts.entries.size());
  for (const auto& e : counts.entries) {
    const auto j = local[e.from];
    const auto i = local[e.to];
    if (j >= 0 && i >= 0)
      t.push_back({i, j, static_cast<double>(e.count) / static_cast<double>(colsum[j])});
  }
  TransitionMatrix T;
  T.lag_steps = counts.lag_steps;
  T.lag = static_cast<double>(counts.lag_steps) * sampling_interval;
  T.full_dim = counts.dim;
  T.kept_boxes.assign(kept.begin(), kept.end());
  T.matrix = CscMatrix(static_cast<std::int64_t>(kept.size()), std::move(t));
  return T;
}

TransitionMatrix normalize(const TransitionCounts& counts, double sampling_interval) {
  const auto kept = support(counts);
  return normalize_on(counts, kept, sampling_interval);
}

std::vector<double> restrict_density(const SojournDensity& m, std::span<const BoxIndex> kept) {
  std::vector<double> out;
  out.reserve(kept.size());
  double mass = 0.0;
  for (auto b : kept) {
    if (b >= m.values.size()) fail(ErrorKind::InvalidArgument, "restrict_density: box out of range");
    out.push_back(m.values[b]);
    mass += m.values[b];
  }
  if (!(mass > 0.0)) fail(ErrorKind::ZeroMass, "restrict_density: kept boxes carry no mass");
  for (auto& v : out) v /= mass;
  return out;
}

} // namespace rpres
