#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rpres/error.hpp"
#include "rpres/partition.hpp"

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

} // namespace

// ---------------------------------------------------------------- standardize

TEST_CASE("standardize uses the population deviation") {
  const auto st = standardize(from_states({{0, 0}, {2, 1}, {-2, 0}, {0, 1}}));
  const auto& s = st.trajectory.states;
  CHECK(s[0][0] == doctest::Approx(0.0));
  CHECK(s[1][0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(s[2][0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(s[3][0] == doctest::Approx(0.0));
  CHECK(st.affine.mean[0] == doctest::Approx(0.0));
  CHECK(st.affine.stddev[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("constant series has degenerate variance") {
  CHECK(kind_of([] { standardize(from_states({{1, 2}, {1, 2}, {1, 2}})); }) ==
        ErrorKind::DegenerateVariance);
}

TEST_CASE("standardize round-trips through the affine map") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(5.0, 3.0);
  std::vector<State> pts(1000);
  for (auto& p : pts) p = {g(rng), -2.0 * g(rng)};
  const auto st = standardize(from_states(pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto back = st.affine.inverse(st.trajectory.states[i]);
    CHECK(std::abs(back[0] - pts[i][0]) <= 1e-12 * std::max(1.0, std::abs(pts[i][0])));
    CHECK(std::abs(back[1] - pts[i][1]) <= 1e-12 * std::max(1.0, std::abs(pts[i][1])));
  }
}

// ---------------------------------------------------------------- locate

TEST_CASE("locate numbers boxes row-major") {
  const auto g = unit_grid(2);
  CHECK(locate(g, {0.25, 0.25}) == BoxIndex{0});
  CHECK(locate(g, {0.75, 0.25}) == BoxIndex{1});
  CHECK(locate(g, {0.25, 0.75}) == BoxIndex{2});
  CHECK(locate(g, {0.75, 0.75}) == BoxIndex{3});
}

TEST_CASE("locate excludes the upper boundary and includes the lower") {
  const auto g = unit_grid(2);
  CHECK_FALSE(locate(g, {1.0, 0.5}).has_value());
  CHECK_FALSE(locate(g, {0.5, 1.0}).has_value());
  CHECK_FALSE(locate(g, {-1e-300, 0.5}).has_value());
  CHECK(locate(g, {0.0, 0.0}) == BoxIndex{0});
  CHECK(locate(g, {0.5, 0.5}) == BoxIndex{3});
  CHECK_FALSE(locate(g, {std::nan(""), 0.5}).has_value());
}

TEST_CASE("boxes tile the domain") {
  GridSpec g;
  g.lo = {-1.3, 0.2};
  g.hi = {2.1, 1.7};
  g.n_per_dim = {7, 5};
  std::vector<int> hits(g.box_count(), 0);
  const int probes = 211;
  for (int a = 0; a < probes; ++a)
    for (int b = 0; b < probes; ++b) {
      const State p{g.lo[0] + (g.hi[0] - g.lo[0]) * (a + 0.5) / probes,
                    g.lo[1] + (g.hi[1] - g.lo[1]) * (b + 0.5) / probes};
      const auto box = locate(g, p);
      REQUIRE(box.has_value());
      const auto c = g.center(*box);
      // The probe lies inside the half-open box it was assigned to.
      CHECK(p[0] >= c[0] - 0.5 * g.width(0) - 1e-12);
      CHECK(p[0] < c[0] + 0.5 * g.width(0) + 1e-12);
      CHECK(p[1] >= c[1] - 0.5 * g.width(1) - 1e-12);
      CHECK(p[1] < c[1] + 0.5 * g.width(1) + 1e-12);
      ++hits[*box];
    }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    CHECK(hits[i] > 0);
    CHECK(locate(g, g.center(static_cast<BoxIndex>(i))) == static_cast<BoxIndex>(i));
  }
}

TEST_CASE("invalid grids are rejected") {
  GridSpec g = unit_grid(2);
  g.n_per_dim = {0, 2};
  CHECK(kind_of([&] { g.validate(); }) == ErrorKind::InvalidArgument);
  g = unit_grid(2);
  g.hi = {0.0, 1.0};
  CHECK(kind_of([&] { g.validate(); }) == ErrorKind::InvalidArgument);
}

// ---------------------------------------------------------------- sojourn density

TEST_CASE("single occupied box gets all the mass") {
  const auto m = sojourn_density(unit_grid(2), from_states({{0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}}));
  CHECK(m.values == std::vector<double>{0, 0, 1, 0});
  CHECK(m.n_samples_in_domain == 3);
}

TEST_CASE("alternating samples split the mass exactly") {
  std::vector<State> s;
  for (int i = 0; i < 1000; ++i) s.push_back(i % 2 ? State{0.1, 0.1} : State{0.9, 0.9});
  const auto m = sojourn_density(unit_grid(2), from_states(s));
  CHECK(m.values[0] == 0.5);
  CHECK(m.values[3] == 0.5);
}

TEST_CASE("out-of-domain samples are dropped from both counts") {
  const auto m = sojourn_density(unit_grid(2), from_states({{0.1, 0.1}, {5.0, 0.1}, {0.9, 0.1}, {1.0, 1.0}}));
  CHECK(m.n_samples_in_domain == 2);
  CHECK(m.values[0] == 0.5);
  CHECK(m.values[1] == 0.5);
}

TEST_CASE("no in-domain sample is an empty-domain error") {
  CHECK(kind_of([] { sojourn_density(unit_grid(2), from_states({{2.0, 2.0}})); }) == ErrorKind::EmptyDomain);
}

TEST_CASE("uniform samples give equal box masses") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<State> s(1'000'000);
  for (auto& p : s) p = {u(rng), u(rng)};
  const auto m = sojourn_density(unit_grid(2), from_states(s));
  double sum = 0.0;
  for (double v : m.values) {
    CHECK(std::abs(v - 0.25) <= 0.005);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("density is invariant under reordering") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  GridSpec grid;
  grid.n_per_dim = {13, 9};
  std::vector<State> s(20'000);
  for (auto& p : s) p = {g(rng), 2.0 * g(rng)};
  const auto a = sojourn_density(grid, from_states(s));
  std::shuffle(s.begin(), s.end(), rng);
  const auto b = sojourn_density(grid, from_states(s));
  CHECK(a.values == b.values);
  CHECK(std::abs(std::accumulate(a.values.begin(), a.values.end(), 0.0) - 1.0) <= 1e-12);
}

TEST_CASE("sharded occupancy equals the sequential count") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.5);
  GridSpec grid;
  std::vector<State> s(100'003);
  for (auto& p : s) p = {g(rng), g(rng)};
  const auto seq = occupancy_counts(grid, s, 1);
  for (unsigned t : {2u, 3u, 8u}) CHECK(occupancy_counts(grid, s, t) == seq);
}
