#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "rpres/error.hpp"
#include "rpres/partition.hpp"
#include "rpres/transfer.hpp"

using namespace rpres;

namespace {

GridSpec unit_grid(std::int64_t n) {
  GridSpec g;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.n_per_dim = {n, n};
  return g;
}

Trajectory from_states(std::vector<State> s) {
  Trajectory t;
  t.states = std::move(s);
  return t;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an rpres::Error");
  return ErrorKind::Io;
}

// Box centres of the 2x2 unit grid.
const State kBox[4] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};

Trajectory three_cycle(std::size_t n) {
  std::vector<State> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(kBox[i % 3]);
  return from_states(s);
}

Trajectory hopf_run(std::int64_t n) {
  SimConfig cfg;
  cfg.n_samples = n;
  cfg.seed = 17;
  return standardize(simulate({-0.2, 1.0, 0.0, 0.1}, cfg)).trajectory;
}

} // namespace

// ---------------------------------------------------------------- counting

TEST_CASE("constant series counts L - 1 self transitions") {
  const auto c = count_transitions(unit_grid(2), from_states(std::vector<State>(50, kBox[1])), 1);
  REQUIRE(c.entries.size() == 1);
  CHECK(c.entries[0].to == 1);
  CHECK(c.entries[0].from == 1);
  CHECK(c.entries[0].count == 49);
  CHECK(c.total() == 49);
}

TEST_CASE("three-cycle counts only the cycle edges") {
  const auto c = count_transitions(unit_grid(2), three_cycle(301), 1);
  REQUIRE(c.entries.size() == 3);
  for (const auto& e : c.entries) CHECK(e.to == (e.from + 1) % 3);
}

TEST_CASE("pairs with an out-of-domain endpoint are skipped") {
  const auto c = count_transitions(unit_grid(2), from_states({kBox[0], {3.0, 3.0}, kBox[0], kBox[1]}), 1);
  CHECK(c.total() == 1);
  CHECK(c.admissible_pairs == 1);
}

TEST_CASE("lag beyond any admissible pair is rejected") {
  CHECK(kind_of([] { count_transitions(unit_grid(2), three_cycle(5), 5); }) == ErrorKind::LagTooLong);
  CHECK(kind_of([] { count_transitions(unit_grid(2), three_cycle(5), 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("two-state chain is recovered within three standard errors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double stay[2] = {0.9, 0.8};
  std::vector<State> s;
  s.reserve(1'000'000);
  int state = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    s.push_back(kBox[state]);
    if (u(rng) >= stay[state]) state = 1 - state;
  }
  const auto c = count_transitions(unit_grid(2), from_states(s), 1);
  const auto T = normalize(c, 1.0);
  REQUIRE(T.dim() == 2);
  const auto out = c.outgoing();
  const Eigen::MatrixXd P = T.matrix.to_dense();
  const double expect[2][2] = {{0.9, 0.2}, {0.1, 0.8}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double p = expect[i][j];
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(out[j]));
      CHECK(std::abs(P(i, j) - p) <= 3 * se);
    }
}

TEST_CASE("counts sum to the admissible pairs") {
  const auto tr = hopf_run(50'000);
  for (std::int64_t lag : {1, 7, 40}) {
    const auto c = count_transitions(GridSpec{}, tr, lag);
    CHECK(c.total() == c.admissible_pairs);
    CHECK(c.admissible_pairs <= static_cast<std::int64_t>(tr.size()) - lag);
    for (const auto& e : c.entries) CHECK(e.count > 0);
    CHECK(std::is_sorted(c.entries.begin(), c.entries.end(), [](const auto& a, const auto& b) {
      return std::pair(a.from, a.to) < std::pair(b.from, b.to);
    }));
  }
}

TEST_CASE("sharded counting equals the sequential count") {
  const auto tr = hopf_run(50'000);
  const auto seq = count_transitions(GridSpec{}, tr, 13, 1);
  for (unsigned t : {2u, 5u, 16u}) {
    const auto par = count_transitions(GridSpec{}, tr, 13, t);
    REQUIRE(par.entries.size() == seq.entries.size());
    for (std::size_t i = 0; i < seq.entries.size(); ++i) {
      CHECK(par.entries[i].to == seq.entries[i].to);
      CHECK(par.entries[i].from == seq.entries[i].from);
      CHECK(par.entries[i].count == seq.entries[i].count);
    }
  }
}

// ---------------------------------------------------------------- segments

TEST_CASE("leave-one-block-out covers everything but one block") {
  const auto seg = leave_one_block_out(103, 10, 4);
  std::vector<int> covered(103, 0);
  for (const auto& [b, e] : seg)
    for (std::size_t i = b; i < e; ++i) ++covered[i];
  std::size_t missing = 0;
  for (int c : covered) {
    CHECK(c <= 1);
    missing += (c == 0);
  }
  CHECK(missing >= 10);
  CHECK(missing <= 11);
}

TEST_CASE("segmented counting never straddles a gap") {
  const auto tr = three_cycle(30);
  const std::vector<SampleRange> seg{{0, 10}, {20, 30}};
  const auto c = count_transitions(unit_grid(2), tr, 1, seg);
  CHECK(c.total() == 18);
  const auto whole = count_transitions(unit_grid(2), tr, 1, std::vector<SampleRange>{{0, 30}});
  CHECK(whole.total() == 29);
}

// ---------------------------------------------------------------- normalize

TEST_CASE("single self count normalizes to the unit matrix") {
  TransitionCounts c;
  c.dim = 4;
  c.entries = {{0, 0, 5}};
  c.admissible_pairs = 5;
  const auto T = normalize(c, 0.5);
  CHECK(T.kept_boxes == std::vector<BoxIndex>{0});
  CHECK(T.matrix.to_dense()(0, 0) == 1.0);
  CHECK(T.lag == 0.5);
  CHECK(T.full_dim == 4);
}

TEST_CASE("three-cycle normalizes to a permutation") {
  const auto T = normalize(count_transitions(unit_grid(2), three_cycle(300), 1), 1.0);
  CHECK(T.kept_boxes == std::vector<BoxIndex>{0, 1, 2});
  const Eigen::MatrixXd P = T.matrix.to_dense();
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) CHECK(P(i, j) == (i == (j + 1) % 3 ? 1.0 : 0.0));
}

TEST_CASE("boxes without outgoing mass are pruned") {
  // Box 3 is only ever entered at the final sample.
  const auto c = count_transitions(unit_grid(2), from_states({kBox[0], kBox[1], kBox[0], kBox[1], kBox[3]}), 1);
  CHECK(support(c) == std::vector<BoxIndex>{0, 1});
  const auto T = normalize(c, 1.0);
  const Eigen::VectorXd sums = T.matrix.column_sums();
  for (Eigen::Index j = 0; j < sums.size(); ++j) CHECK(std::abs(sums[j] - 1.0) <= 1e-12);
}

TEST_CASE("estimated matrices are column-stochastic and stationary") {
  const auto tr = hopf_run(200'000);
  const GridSpec grid;
  const auto ca = count_transitions(grid, tr, 400);
  const auto cb = count_transitions(grid, tr, 410);
  const std::vector<TransitionCounts> both{ca, cb};
  const auto kept = common_support(both);
  REQUIRE(kept.size() > 100);
  CHECK(std::is_sorted(kept.begin(), kept.end()));
  for (const auto& c : both) {
    const auto T = normalize_on(c, kept, tr.sampling_interval);
    CHECK(T.kept_boxes == kept);
    CHECK(T.lag == doctest::Approx(c.lag_steps * tr.sampling_interval));
    const Eigen::VectorXd sums = T.matrix.column_sums();
    for (Eigen::Index j = 0; j < sums.size(); ++j) CHECK(std::abs(sums[j] - 1.0) <= 1e-12);
    for (double v : T.matrix.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto m = restrict_density(sojourn_density(grid, tr), kept);
    const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
    CHECK((T.matrix.apply(Eigen::VectorXd(mv)) - mv).lpNorm<1>() <= 0.05);
  }
}

// ---------------------------------------------------------------- restrict_density

TEST_CASE("restriction to all boxes is the identity") {
  SojournDensity m{{0.1, 0.2, 0.7}, 10};
  const std::vector<BoxIndex> all{0, 1, 2};
  const auto r = restrict_density(m, all);
  CHECK(r[0] == doctest::Approx(0.1));
  CHECK(r[1] == doctest::Approx(0.2));
  CHECK(r[2] == doctest::Approx(0.7));
}

TEST_CASE("restriction renormalizes") {
  const std::vector<BoxIndex> k01{0, 1}, k2{2};
  CHECK(restrict_density({{0.5, 0.5, 0.0}, 2}, k01) == std::vector<double>{0.5, 0.5});
  CHECK(restrict_density({{0.2, 0.3, 0.5}, 10}, k2) == std::vector<double>{1.0});
}

TEST_CASE("restriction onto empty boxes has zero mass") {
  const std::vector<BoxIndex> k{2};
  CHECK(kind_of([&] { restrict_density({{0.5, 0.5, 0.0}, 2}, k); }) == ErrorKind::ZeroMass);
}
