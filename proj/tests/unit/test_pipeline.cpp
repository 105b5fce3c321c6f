#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"
#include "rpres/config.hpp"
#include "rpres/error.hpp"
#include "rpres/io.hpp"
#include "rpres/pipeline.hpp"
#include "support.hpp"

using namespace rpres;
using json = nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rpres_pipe_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small supercritical run that exercises every stage in about a second.
RunConfig small_config(const fs::path& dir) {
  RunConfig c;
  c.hopf = {0.2, 1.0, 1.0, 0.05};
  c.sim.n_samples = 60'000;
  c.sim.seed = 5;
  c.grid.n_per_dim = {20, 20};
  c.eigen.k = 6;
  c.eigen.krylov_dim = 0;
  c.spectral.max_lag = 100;
  c.spectral.t_points = 51;
  c.oracle.n_quad = 256;
  c.io.output_dir = dir;
  return c;
}

void run_all(const RunConfig& c) {
  cmd_simulate(c);
  cmd_estimate(c);
  cmd_resonances(c);
  cmd_reconstruct(c);
  cmd_oracle(c);
  cmd_compare(c);
}

// SHA-256 of every non-manifest output, keyed by file name.
std::map<std::string, std::string> checksums(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = fs::relative(e.path(), dir).string();
    if (name.find("_manifest.json") != std::string::npos) continue;
    out[name] = sha256_file(e.path());
  }
  return out;
}

json load_json(const fs::path& p) { return json::parse(read_text(p)); }

Trajectory three_cycle(std::size_t n) {
  const State pts[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  Trajectory t;
  t.sampling_interval = 0.1;
  for (std::size_t i = 0; i < n; ++i) t.states.push_back(pts[i % 3]);
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

// ---------------------------------------------------------------- determinism

TEST_CASE("stages are deterministic, idempotent and recomposable") {
  TempDir a("det_a"), b("det_b");
  const auto ca = small_config(a.path), cb = small_config(b.path);
  run_all(ca);
  run_all(cb);
  const auto sa = checksums(a.path);
  CHECK(sa.size() >= 10);
  CHECK(sa == checksums(b.path));

  // Rerun in place.
  run_all(ca);
  CHECK(checksums(a.path) == sa);

  // Drop every intermediate after the trajectory and rebuild.
  const Paths p(ca);
  for (const auto& f : {p.matrix_a(), p.matrix_b(), p.density(), p.resonances(), p.oracle()}) fs::remove(f);
  fs::remove_all(p.dir / (p.stem + "_resonances_vectors"));
  cmd_estimate(ca);
  cmd_resonances(ca);
  cmd_reconstruct(ca);
  cmd_oracle(ca);
  cmd_compare(ca);
  CHECK(checksums(a.path) == sa);

  // Manifests list a checksum for every output.
  const auto man = load_json(p.manifest("estimate"));
  CHECK(man.at("stage") == "estimate");
  CHECK(man.at("seed") == 5);
  CHECK(man.at("outputs").size() == 3);
  for (const auto& [name, sha] : man.at("outputs").items()) CHECK(sha == sa.at(name));
  CHECK(!fs::exists(p.lock()));
}

TEST_CASE("a held lock blocks a second writer") {
  TempDir d("lock");
  const auto c = small_config(d.path);
  write_text_atomic(Paths(c).lock(), "");
  CHECK_THROWS_AS(cmd_oracle(c), Error);
}

// ---------------------------------------------------------------- estimate

TEST_CASE("three-cycle trajectory gives permutation matrices") {
  TempDir d("cycle");
  RunConfig c = small_config(d.path);
  c.sim.dt = 0.1;
  c.sim.sample_stride = 1;
  c.lags = {0.4, 0.1};
  c.eigen.k = 3;
  write_trajectory_csv(d.path / "cyc.csv", three_cycle(3000));
  EstimateOptions o;
  o.trajectory = d.path / "cyc.csv";
  cmd_estimate(c, o);
  const Paths p(c);
  for (const auto& f : {p.matrix_a(), p.matrix_b()}) {
    const auto m = read_matrix_file(f);
    REQUIRE(m.matrix.dim() == 3);
    const Eigen::MatrixXd D = m.matrix.matrix.to_dense();
    CHECK((D.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(((D.array() == 0.0) || (D.array() == 1.0)).all());
    CHECK(D.trace() == 0.0);
  }
  cmd_resonances(c);
  const auto rf = read_resonance_json(p.resonances());
  REQUIRE(rf.set.resonances.size() == 3);
  for (const auto& r : rf.set.resonances) {
    CHECK(std::abs(std::abs(r.zeta_a) - 1.0) <= 1e-12);
    CHECK(std::abs(r.lambda.real()) <= 1e-10);
  }
}

TEST_CASE("trajectory interval must match the config") {
  TempDir d("interval");
  RunConfig c = small_config(d.path);
  auto t = three_cycle(300);
  t.sampling_interval = 0.05;
  write_trajectory_csv(d.path / "t.csv", t);
  EstimateOptions o;
  o.trajectory = d.path / "t.csv";
  CHECK(kind_of([&] { cmd_estimate(c, o); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("jackknife writes one matrix set per left-out block") {
  TempDir d("jk");
  RunConfig c = small_config(d.path);
  cmd_simulate(c);
  EstimateOptions o;
  o.jackknife = 10;
  cmd_estimate(c, o);
  for (int b = 0; b < 10; ++b) {
    const auto stem = d.path / ("run_jk" + std::to_string(b));
    CHECK(fs::exists(stem.string() + "_T_tau.csv"));
    CHECK(fs::exists(stem.string() + "_T_tau_dtau.csv"));
    CHECK(fs::exists(stem.string() + "_density.csv"));
  }
}

// ---------------------------------------------------------------- resonances

TEST_CASE("matrix exponentials of a generator give back its spectrum") {
  TempDir d("expq");
  const int n = 30;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      if (i != j && u(rng) < 0.3) Q(i, j) = u(rng);
    Q((j + 1) % n, j) += 0.5;
    Q(j, j) = -Q.col(j).sum();
  }
  RunConfig c = small_config(d.path);
  c.sim.dt = 0.01;
  c.sim.sample_stride = 1;
  c.lags = {0.1, 0.01};
  c.grid.n_per_dim = {6, 5};
  c.eigen.k = 10;
  c.eigen.kappa_max = 1e6;
  const Paths p(c);
  std::vector<BoxIndex> all(n);
  for (int i = 0; i < n; ++i) all[i] = static_cast<BoxIndex>(i);
  for (const auto& [lag, path] : {std::pair{0.1, p.matrix_a()}, std::pair{0.11, p.matrix_b()}}) {
    TransitionMatrix T;
    T.lag = lag;
    T.lag_steps = static_cast<std::int64_t>(std::lround(lag / 0.01));
    T.full_dim = n;
    T.kept_boxes = all;
    T.matrix = CscMatrix::from_dense((lag * Q).exp());
    write_matrix_file(path, T, c.grid, {});
  }
  // Stationary density of Q.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
  Eigen::VectorXd pi = lu.kernel().col(0);
  pi /= pi.sum();
  write_density_csv(p.density(), {std::vector<double>(pi.data(), pi.data() + n), 1});
  cmd_resonances(c);
  const auto rf = read_resonance_json(p.resonances());
  std::vector<cplx> got;
  for (const auto& r : rf.set.resonances) got.push_back(r.lambda);
  REQUIRE(got.size() >= 10);
  got.resize(10);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(Q).eigenvalues();
  std::vector<cplx> ref(ev.data(), ev.data() + n);
  testing::sort_like_resonances(ref);
  ref.resize(10);
  CHECK(testing::matched_distance(got, ref) <= 1e-8);
}

TEST_CASE("kappa filter removes ill-conditioned entries") {
  TempDir d("kappa");
  RunConfig c = small_config(d.path);
  c.hopf = {-0.2, 1.0, 0.0, 0.1};
  cmd_simulate(c);
  cmd_estimate(c);
  c.eigen.kappa_max = 1e300;
  cmd_resonances(c);
  const auto loose = read_resonance_json(Paths(c).resonances(), false);
  c.eigen.kappa_max = 1.05;
  cmd_resonances(c);
  const auto tight = read_resonance_json(Paths(c).resonances(), false);
  CHECK(tight.set.resonances.size() < loose.set.resonances.size());
  for (const auto& r : tight.set.resonances) CHECK(r.kappa <= 1.05);
}

// ---------------------------------------------------------------- reconstruct

TEST_CASE("constant observable reconstructs a zero correlation") {
  TempDir d("const");
  RunConfig c = small_config(d.path);
  c.spectral.observable = "const";
  cmd_simulate(c);
  cmd_estimate(c);
  cmd_resonances(c);
  cmd_reconstruct(c);
  const auto text = read_text(Paths(c).correlation());
  CHECK(text.rfind("t,C_reconstructed,C_sample\n", 0) == 0);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    CHECK(std::abs(std::stod(line.substr(a + 1, b - a - 1))) <= 1e-10);
    ++rows;
  }
  CHECK(rows == 51);
}

TEST_CASE("summary reports finite errors and peaks near the cycle frequency") {
  TempDir d("summary");
  const RunConfig c = small_config(d.path);
  run_all(c);
  const auto s = load_json(Paths(c).reconstruct_summary());
  CHECK(std::isfinite(s.at("rmse_correlation").get<double>()));
  CHECK(std::isfinite(s.at("rmse_psd").get<double>()));
  CHECK(read_text(Paths(c).psd()).rfind("omega,freq,S_reconstructed,S_sample\n", 0) == 0);
  const auto cmp = load_json(Paths(c).compare());
  CHECK(cmp.at("regime") == "supercritical");
}

// ---------------------------------------------------------------- compare

TEST_CASE("oracle fed back into compare gives zero error") {
  const HopfParams h{-0.2, 1.0, 0.0, 0.1};
  const auto lat = hopf_fp_lattice(h, 3);
  std::vector<cplx> est;
  for (const auto& e : lat.entries)
    for (int k = 0; k < e.multiplicity; ++k) est.push_back(e.lambda);
  const auto rep = compare_to_lattice(est, lat);
  CHECK(rep.unmatched_estimates.empty());
  CHECK(rep.matches.size() == est.size());
  for (const auto& m : rep.matches) CHECK(m.abs_error == 0.0);
}

TEST_CASE("compare refuses a regime mismatch") {
  TempDir d("regime");
  RunConfig c = small_config(d.path);
  c.hopf = {-0.2, 1.0, 0.0, 0.1};
  cmd_simulate(c);
  cmd_estimate(c);
  cmd_resonances(c);
  c.hopf.delta = 0.2;
  cmd_oracle(c);
  CHECK(kind_of([&] { cmd_compare(c); }) == ErrorKind::Regime);
}

// ---------------------------------------------------------------- executable

#ifdef RPRES_CLI_PATH
TEST_CASE("command-line exit codes") {
  TempDir d("cli");
  auto run = [&](const RunConfig& c, const std::string& sub) {
    const auto cfg = d.path / "cfg.json";
    write_text_atomic(cfg, serialize_config(c));
    const std::string cmd = std::string(RPRES_CLI_PATH) + " " + sub + " --config " + cfg.string() + " > " +
                            (d.path / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  RunConfig c = small_config(d.path);
  CHECK(run(c, "oracle") == 0);
  CHECK(fs::exists(Paths(c).oracle()));
  CHECK(run(c, "frobnicate") == 2);

  const auto bad = d.path / "bad.json";
  write_text_atomic(bad, R"({"sim": {"n_samples": 0}})");
  CHECK(WEXITSTATUS(std::system((std::string(RPRES_CLI_PATH) + " simulate --config " + bad.string() +
                                 " > /dev/null 2>&1").c_str())) == 2);

  RunConfig blow = small_config(d.path);
  blow.hopf = {1.0, 1.0, 0.0, 0.0};
  blow.sim.dt = 1.0;
  blow.sim.sample_stride = 1;
  blow.lags = {4.0, 1.0};
  blow.sim.initial_state = {10.0, 0.0};
  CHECK(run(blow, "simulate") == 3);
}
#endif
