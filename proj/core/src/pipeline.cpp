#include "rpres/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fcntl.h>
#include <unistd.h>

#include "json.hpp"
#include "rpres/error.hpp"

#ifndef RPRES_VERSION
#define RPRES_VERSION "0.0.0"
#endif

namespace rpres {

using json = nlohmann::ordered_json;

namespace {

class DirLock {
public:
  explicit DirLock(const fs::path& lock) : path_(lock) {
    fs::create_directories(lock.parent_path());
    fd_ = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      fail(ErrorKind::Io, lock.string() + ": output directory is locked by another run (remove the file if stale)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

private:
  fs::path path_;
  int fd_ = -1;
};

class Timer {
public:
  void start(const std::string& name) {
    name_ = name;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    timings_[name_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  const json& timings() const { return timings_; }

private:
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
  json timings_ = json::object();
};

json checksums(const std::vector<fs::path>& files, const fs::path& base) {
  json out = json::object();
  for (const auto& f : files) out[fs::relative(f, base).generic_string()] = sha256_file(f);
  return out;
}

fs::path write_manifest(const RunConfig& cfg, const Paths& paths, const std::string& stage,
                        const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                        const Timer& timer) {
  const json doc = {
      {"schema_version", 1},
      {"stage", stage},
      {"software_version", software_version()},
      {"seed", cfg.sim.seed},
      {"config", json::parse(serialize_config(cfg))},
      {"inputs", checksums(inputs, paths.dir)},
      {"outputs", checksums(outputs, paths.dir)},
      {"timings_seconds", timer.timings()},
  };
  const fs::path m = paths.manifest(stage);
  write_text_atomic(m, doc.dump(2) + "\n");
  return m;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double rmse(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(a.size()));
}

Regime regime_of(const HopfParams& p) {
  if (p.delta < 0.0) return Regime::Subcritical;
  if (p.delta > 0.0) return Regime::Supercritical;
  fail(ErrorKind::Regime, "delta = 0: no small-noise expansion at the bifurcation point");
}

const char* regime_name(Regime r) { return r == Regime::Subcritical ? "subcritical" : "supercritical"; }

// Re lambda of the leading nonzero resonances, at most `count`.
std::vector<double> leading_real_parts(const ResonanceSet& set, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 1; i < set.resonances.size() && out.size() < count; ++i)
    out.push_back(set.resonances[i].lambda.real());
  return out;
}

json convergence_sweep(const RunConfig& base, const Trajectory& traj, const std::string& key,
                       const std::vector<double>& values) {
  json steps = json::array();
  std::vector<double> prev;
  bool converged = false;
  for (const double v : values) {
    RunConfig cfg = base;
    if (key == "grid") {
      cfg.grid.n_per_dim = {static_cast<std::int64_t>(v), static_cast<std::int64_t>(v)};
    } else {
      cfg.lags.tau = v;
    }
    cfg.validate();
    const auto em = estimate_matrices(cfg, traj);
    const auto re = estimate_resonances(cfg, em.a, em.b, em.m_kept);
    const auto cur = leading_real_parts(re.set, 10);
    json step = {{key, v}, {"re_lambda", cur}};
    if (!prev.empty()) {
      double worst = 0.0;
      const std::size_t n = std::min(prev.size(), cur.size());
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(cur[i] - prev[i]) / std::max(std::abs(prev[i]), 1e-300));
      step["max_relative_change"] = worst;
      step["below_1_percent"] = worst < 0.01;
      converged = worst < 0.01;
    }
    steps.push_back(std::move(step));
    prev = cur;
  }
  return {{"parameter", key}, {"steps", std::move(steps)}, {"converged", converged}};
}

} // namespace

std::string software_version() { return RPRES_VERSION; }

EstimatedMatrices estimate_matrices(const RunConfig& cfg, const Trajectory& traj,
                                    std::span<const SampleRange> segments) {
  const auto st = standardize(traj);
  const double interval = traj.sampling_interval;
  const std::int64_t la = cfg.tau_steps();
  const std::int64_t lb = la + cfg.dtau_steps();
  std::vector<TransitionCounts> counts;
  if (segments.empty()) {
    counts.push_back(count_transitions(cfg.grid, st.trajectory, la, cfg.threads));
    counts.push_back(count_transitions(cfg.grid, st.trajectory, lb, cfg.threads));
  } else {
    counts.push_back(count_transitions(cfg.grid, st.trajectory, la, segments, cfg.threads));
    counts.push_back(count_transitions(cfg.grid, st.trajectory, lb, segments, cfg.threads));
  }
  const auto kept = common_support(counts);
  if (kept.empty()) fail(ErrorKind::EmptyDomain, "estimate: no box has outgoing mass under both lags");

  EstimatedMatrices out;
  out.affine = st.affine;
  out.a = normalize_on(counts[0], kept, interval);
  out.b = normalize_on(counts[1], kept, interval);
  if (segments.empty()) {
    out.density = sojourn_density(cfg.grid, st.trajectory);
  } else {
    std::vector<std::int64_t> total(cfg.grid.box_count(), 0);
    const std::span<const State> all(st.trajectory.states);
    for (const auto& [b, e] : segments) {
      const auto c = occupancy_counts(cfg.grid, all.subspan(b, e - b), cfg.threads);
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += c[i];
    }
    out.density = density_from_counts(total);
  }
  out.m_kept = restrict_density(out.density, kept);
  return out;
}

ResonanceEstimate estimate_resonances(const RunConfig& cfg, const TransitionMatrix& a,
                                      const TransitionMatrix& b, std::span<const double> m) {
  if (a.kept_boxes != b.kept_boxes)
    fail(ErrorKind::InvalidArgument, "resonances: the two matrices do not share one kept-box set");
  if (!(b.lag > a.lag)) fail(ErrorKind::InvalidArgument, "resonances: second lag must exceed the first");
  EigenOptions eo;
  eo.k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.eigen.k), a.dim() - 1));
  eo.tol = cfg.eigen.tol;
  eo.max_restarts = cfg.eigen.max_restarts;
  eo.krylov_dim = cfg.eigen.krylov_dim;

  ResonanceEstimate out;
  out.pairs_a = leading_eigenpairs(a, eo);
  out.pairs_b = leading_eigenpairs(b, eo);
  for (const auto& p : out.pairs_a)
    if (p.value != 0.0) out.single_a.push_back(to_generator(p.value, a.lag));
  for (const auto& p : out.pairs_b)
    if (p.value != 0.0) out.single_b.push_back(to_generator(p.value, b.lag));
  PairingOptions po;
  po.quality_threshold = cfg.eigen.pairing_threshold;
  out.set = filter_and_sort(pair_and_ratio(out.pairs_a, out.pairs_b, a.lag, b.lag - a.lag, m, po),
                            cfg.eigen.kappa_max);
  return out;
}

double observable_value(const std::string& name, const State& s) {
  if (name == "x") return s[0];
  if (name == "y") return s[1];
  if (name == "r2") return s[0] * s[0] + s[1] * s[1];
  if (name == "x2my2") return s[0] * s[0] - s[1] * s[1];
  if (name == "const") return 1.0;
  fail(ErrorKind::InvalidArgument, "unknown observable '" + name + "'");
}

ObservableVec observable_on_boxes(const std::string& name, const GridSpec& grid,
                                  const Standardization& affine, std::span<const BoxIndex> kept) {
  ObservableVec f;
  f.label = name;
  f.values.reserve(kept.size());
  for (const BoxIndex b : kept) f.values.push_back(observable_value(name, affine.inverse(grid.center(b))));
  return f;
}

Reconstruction reconstruct(const RunConfig& cfg, const ResonanceSet& set, std::span<const BoxIndex> kept,
                           std::span<const double> m, const Standardization& affine, const Trajectory& traj) {
  const auto& sc = cfg.spectral;
  const ObservableVec f = observable_on_boxes(sc.observable, cfg.grid, affine, kept);
  Reconstruction out;
  out.weights = weights(f, f, m, set);
  double mean = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) mean += m[i] * f.values[i];
  out.means = {mean, mean};

  std::vector<double> series(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) series[n] = observable_value(sc.observable, traj.states[n]);

  const auto max_lag = static_cast<std::size_t>(sc.max_lag);
  const auto sample_c = sample_correlation(series, series, max_lag);
  std::vector<std::size_t> lags;
  const auto points = std::min<std::size_t>(static_cast<std::size_t>(sc.t_points), max_lag + 1);
  for (std::size_t i = 0; i < points; ++i) {
    const auto k = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(max_lag) / static_cast<double>(points - 1)));
    if (lags.empty() || k != lags.back()) lags.push_back(k);
  }
  for (const auto k : lags) {
    out.t.push_back(static_cast<double>(k) * traj.sampling_interval);
    out.c_sample.push_back(sample_c[k]);
  }
  const Series c = reconstruct_correlation(set, out.weights, out.means, out.t);
  out.c_reconstructed = c.values;
  out.max_imag_residue = c.max_imag_residue;

  out.welch_segment = sc.welch_segment > 0 ? static_cast<std::size_t>(sc.welch_segment)
                                           : std::max<std::size_t>(2, series.size() / 8);
  const Periodogram pg = sample_psd(series, out.welch_segment, sc.welch_overlap, traj.sampling_interval);
  for (std::size_t k = 0; k < pg.freq.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * pg.freq[k];
    if (omega > sc.omega_max) break;
    out.omega.push_back(omega);
    out.freq.push_back(pg.freq[k]);
    out.s_sample.push_back(pg.psd[k]);
  }
  const Series s = reconstruct_psd(set, out.weights, out.omega);
  out.s_reconstructed.resize(s.values.size());
  for (std::size_t k = 0; k < s.values.size(); ++k) out.s_reconstructed[k] = 4.0 * std::numbers::pi * s.values[k];
  out.max_imag_residue = std::max(out.max_imag_residue, 4.0 * std::numbers::pi * s.max_imag_residue);

  out.rmse_correlation = rmse(out.c_reconstructed, out.c_sample);
  out.rmse_psd = rmse(out.s_reconstructed, out.s_sample);
  for (const double v : out.s_sample) out.psd_peak_height = std::max(out.psd_peak_height, v);
  return out;
}

OracleFile run_oracle(const RunConfig& cfg) {
  OracleFile f;
  f.hopf = cfg.hopf;
  if (regime_of(cfg.hopf) == Regime::Subcritical) {
    f.lattice = hopf_fp_lattice(cfg.hopf, cfg.oracle.max_order);
  } else {
    f.lattice = po_lattice(cfg.hopf, cfg.oracle.max_n, cfg.oracle.max_l);
    f.floquet = floquet_analysis(cfg.hopf, cfg.oracle.n_quad);
    f.phi_analytic = phase_diffusion_analytic(cfg.hopf);
  }
  return f;
}

CompareReport compare_to_lattice(std::span<const cplx> estimates, const ResonanceLattice& lattice) {
  struct Candidate {
    double dist;
    int est;
    int lat;
  };
  std::vector<Candidate> cand;
  cand.reserve(estimates.size() * lattice.entries.size());
  for (std::size_t i = 0; i < estimates.size(); ++i)
    for (std::size_t j = 0; j < lattice.entries.size(); ++j)
      cand.push_back({std::abs(estimates[i] - lattice.entries[j].lambda), static_cast<int>(i), static_cast<int>(j)});
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.est != b.est) return a.est < b.est;
    return a.lat < b.lat;
  });
  std::vector<int> assigned(estimates.size(), -1);
  std::vector<int> uses(lattice.entries.size(), 0);
  for (const auto& c : cand) {
    if (assigned[static_cast<std::size_t>(c.est)] >= 0) continue;
    const auto& e = lattice.entries[static_cast<std::size_t>(c.lat)];
    if (uses[static_cast<std::size_t>(c.lat)] >= e.multiplicity) continue;
    assigned[static_cast<std::size_t>(c.est)] = c.lat;
    ++uses[static_cast<std::size_t>(c.lat)];
  }
  CompareReport rep;
  rep.regime = lattice.regime;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (assigned[i] < 0) {
      rep.unmatched_estimates.push_back(static_cast<int>(i));
      continue;
    }
    LatticeMatch m;
    m.estimate = static_cast<int>(i);
    m.lattice = assigned[i];
    m.estimated = estimates[i];
    m.predicted = lattice.entries[static_cast<std::size_t>(assigned[i])].lambda;
    m.abs_error = std::abs(m.estimated - m.predicted);
    const double scale = std::abs(m.predicted);
    m.rel_error = scale > 0.0 ? m.abs_error / scale : std::numeric_limits<double>::infinity();
    rep.matches.push_back(m);
  }
  return rep;
}

Paths::Paths(const RunConfig& cfg) : dir(cfg.io.output_dir), stem(cfg.io.stem) {}
fs::path Paths::trajectory() const { return dir / (stem + "_trajectory.csv"); }
fs::path Paths::density() const { return dir / (stem + "_density.csv"); }
fs::path Paths::matrix_a() const { return dir / (stem + "_T_tau.csv"); }
fs::path Paths::matrix_b() const { return dir / (stem + "_T_tau_dtau.csv"); }
fs::path Paths::resonances() const { return dir / (stem + "_resonances.json"); }
fs::path Paths::correlation() const { return dir / (stem + "_correlation.csv"); }
fs::path Paths::psd() const { return dir / (stem + "_psd.csv"); }
fs::path Paths::reconstruct_summary() const { return dir / (stem + "_reconstruct_summary.json"); }
fs::path Paths::weighted_resonances() const { return dir / (stem + "_resonances_weighted.json"); }
fs::path Paths::oracle() const { return dir / (stem + "_oracle.json"); }
fs::path Paths::compare() const { return dir / (stem + "_compare.json"); }
fs::path Paths::manifest(const std::string& stage) const { return dir / (stem + "_" + stage + "_manifest.json"); }
fs::path Paths::lock() const { return dir / ".rpres.lock"; }

StageOutput cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  timer.start("simulate");
  const Trajectory traj = simulate(cfg.hopf, cfg.sim);
  timer.stop();
  timer.start("write");
  write_trajectory_csv(paths.trajectory(), traj, cfg.time_unit_label.value_or(""));
  timer.stop();
  StageOutput out;
  out.files = {paths.trajectory()};
  out.manifest = write_manifest(cfg, paths, "simulate", {}, out.files, timer);
  return out;
}

StageOutput cmd_estimate(const RunConfig& cfg, const EstimateOptions& opts) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  const fs::path traj_path = opts.trajectory.value_or(paths.trajectory());
  timer.start("read");
  const Trajectory traj = read_trajectory_csv(traj_path);
  timer.stop();
  if (std::abs(traj.sampling_interval - cfg.sim.sampling_interval()) > 1e-12 * cfg.sim.sampling_interval())
    fail(ErrorKind::InvalidArgument, "estimate: trajectory sampling interval " + format_double(traj.sampling_interval) +
                                         " differs from the configured " + format_double(cfg.sim.sampling_interval()));
  StageOutput out;
  timer.start("estimate");
  const auto em = estimate_matrices(cfg, traj);
  timer.stop();
  timer.start("write");
  write_density_csv(paths.density(), em.density);
  write_matrix_file(paths.matrix_a(), em.a, cfg.grid, em.affine);
  write_matrix_file(paths.matrix_b(), em.b, cfg.grid, em.affine);
  out.files = {paths.density(), paths.matrix_a(), paths.matrix_b()};
  timer.stop();

  if (opts.jackknife < 0) fail(ErrorKind::InvalidArgument, "estimate: --jackknife must be >= 0");
  if (opts.jackknife > 0) {
    timer.start("jackknife");
    for (int b = 0; b < opts.jackknife; ++b) {
      const auto seg = leave_one_block_out(traj.size(), static_cast<std::size_t>(opts.jackknife),
                                           static_cast<std::size_t>(b));
      const auto jk = estimate_matrices(cfg, traj, seg);
      const std::string tag = paths.stem + "_jk" + std::to_string(b);
      const fs::path d = paths.dir / (tag + "_density.csv");
      const fs::path a = paths.dir / (tag + "_T_tau.csv");
      const fs::path bb = paths.dir / (tag + "_T_tau_dtau.csv");
      write_density_csv(d, jk.density);
      write_matrix_file(a, jk.a, cfg.grid, jk.affine);
      write_matrix_file(bb, jk.b, cfg.grid, jk.affine);
      out.files.insert(out.files.end(), {d, a, bb});
    }
    timer.stop();
  }

  if (!opts.converge_grid.empty() || !opts.converge_lag.empty()) {
    timer.start("convergence");
    json doc = {{"schema_version", 1}, {"criterion", "relative change of Re lambda of the first 10 nonzero resonances < 1%"}};
    if (!opts.converge_grid.empty()) {
      std::vector<double> v(opts.converge_grid.begin(), opts.converge_grid.end());
      doc["grid"] = convergence_sweep(cfg, traj, "grid", v);
    }
    if (!opts.converge_lag.empty()) doc["lag"] = convergence_sweep(cfg, traj, "tau", opts.converge_lag);
    const fs::path p = paths.dir / (paths.stem + "_convergence.json");
    write_text_atomic(p, doc.dump(2) + "\n");
    out.files.push_back(p);
    timer.stop();
  }
  out.manifest = write_manifest(cfg, paths, "estimate", {traj_path}, out.files, timer);
  return out;
}

StageOutput cmd_resonances(const RunConfig& cfg, const std::optional<fs::path>& matrix_a,
                           const std::optional<fs::path>& matrix_b, const std::optional<fs::path>& density) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  const fs::path pa = matrix_a.value_or(paths.matrix_a());
  const fs::path pb = matrix_b.value_or(paths.matrix_b());
  const fs::path pd = density.value_or(paths.density());
  timer.start("read");
  const MatrixFile ma = read_matrix_file(pa);
  const MatrixFile mb = read_matrix_file(pb);
  const SojournDensity dens = read_density_csv(pd);
  timer.stop();
  if (ma.matrix.kept_boxes != mb.matrix.kept_boxes)
    fail(ErrorKind::InvalidArgument, "resonances: matrix files do not share one kept-box set");
  if (dens.values.size() != ma.matrix.full_dim)
    fail(ErrorKind::InvalidArgument, "resonances: density length differs from the grid size");
  const auto m = restrict_density(dens, ma.matrix.kept_boxes);

  timer.start("eigen");
  const auto est = estimate_resonances(cfg, ma.matrix, mb.matrix, m);
  timer.stop();

  timer.start("write");
  ResonanceFile rf;
  rf.hopf = cfg.hopf;
  rf.grid = ma.grid;
  rf.kept_boxes = ma.matrix.kept_boxes;
  rf.set = est.set;
  rf.single_lag_a = est.single_a;
  rf.single_lag_b = est.single_b;
  StageOutput out;
  out.files = write_resonance_json(paths.resonances(), rf);
  timer.stop();
  out.manifest = write_manifest(cfg, paths, "resonances", {pa, pb, pd}, out.files, timer);
  return out;
}

StageOutput cmd_reconstruct(const RunConfig& cfg, const std::optional<fs::path>& resonances,
                            const std::optional<fs::path>& trajectory) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  const fs::path pr = resonances.value_or(paths.resonances());
  const fs::path pt = trajectory.value_or(paths.trajectory());
  timer.start("read");
  ResonanceFile rf = read_resonance_json(pr, true);
  const Trajectory traj = read_trajectory_csv(pt);
  timer.stop();
  if (rf.set.resonances.empty()) fail(ErrorKind::EmptyPairing, "reconstruct: resonance file lists no resonances");

  timer.start("reconstruct");
  const auto st = standardize(traj);
  RunConfig grid_cfg = cfg;
  grid_cfg.grid = rf.grid;
  const auto m = restrict_density(sojourn_density(rf.grid, st.trajectory), rf.kept_boxes);
  const Reconstruction rec = reconstruct(grid_cfg, rf.set, rf.kept_boxes, m, st.affine, traj);
  timer.stop();

  timer.start("write");
  const std::string tcol = cfg.time_unit_label ? "t[" + *cfg.time_unit_label + "]" : "t";
  std::string csv = tcol + ",C_reconstructed,C_sample\n";
  for (std::size_t i = 0; i < rec.t.size(); ++i)
    csv += format_double(rec.t[i]) + "," + format_double(rec.c_reconstructed[i]) + "," +
           format_double(rec.c_sample[i]) + "\n";
  write_text_atomic(paths.correlation(), csv);

  std::string psd = "omega,freq,S_reconstructed,S_sample\n";
  for (std::size_t i = 0; i < rec.omega.size(); ++i)
    psd += format_double(rec.omega[i]) + "," + format_double(rec.freq[i]) + "," +
           format_double(rec.s_reconstructed[i]) + "," + format_double(rec.s_sample[i]) + "\n";
  write_text_atomic(paths.psd(), psd);

  json w = json::array();
  for (const auto& z : rec.weights) w.push_back(cplx_json(z));
  const json summary = {
      {"schema_version", 1},
      {"observable", cfg.spectral.observable},
      {"mean", rec.means.first},
      {"rmse_correlation", finite_or_null(rec.rmse_correlation)},
      {"rmse_psd", finite_or_null(rec.rmse_psd)},
      {"psd_peak_height", finite_or_null(rec.psd_peak_height)},
      {"rmse_psd_relative", finite_or_null(rec.psd_peak_height > 0.0 ? rec.rmse_psd / rec.psd_peak_height
                                                                       : std::numeric_limits<double>::infinity())},
      {"welch_segment", rec.welch_segment},
      {"max_imag_residue", rec.max_imag_residue},
      {"psd_units", "one-sided, per cycle per unit time"},
      {"weights", std::move(w)},
  };
  write_text_atomic(paths.reconstruct_summary(), summary.dump(2) + "\n");

  rf.weights.assign(rec.weights.begin(), rec.weights.end());
  StageOutput out;
  out.files = write_resonance_json(paths.weighted_resonances(), rf);
  out.files.insert(out.files.begin(), {paths.correlation(), paths.psd(), paths.reconstruct_summary()});
  timer.stop();
  out.manifest = write_manifest(cfg, paths, "reconstruct", {pr, pt}, out.files, timer);
  return out;
}

StageOutput cmd_oracle(const RunConfig& cfg) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  timer.start("oracle");
  const OracleFile f = run_oracle(cfg);
  timer.stop();
  timer.start("write");
  write_oracle_json(paths.oracle(), f);
  timer.stop();
  StageOutput out;
  out.files = {paths.oracle()};
  out.manifest = write_manifest(cfg, paths, "oracle", {}, out.files, timer);
  return out;
}

StageOutput cmd_compare(const RunConfig& cfg, const std::optional<fs::path>& resonances,
                        const std::optional<fs::path>& oracle) {
  cfg.validate();
  const Paths paths(cfg);
  DirLock lock(paths.lock());
  Timer timer;
  const fs::path pr = resonances.value_or(paths.resonances());
  const fs::path po = oracle.value_or(paths.oracle());
  timer.start("read");
  const ResonanceFile rf = read_resonance_json(pr, false);
  const OracleFile of = read_oracle_json(po);
  timer.stop();
  if (regime_of(rf.hopf) != of.lattice.regime)
    fail(ErrorKind::Regime, std::string("compare: resonances come from a ") + regime_name(regime_of(rf.hopf)) +
                                " run but the oracle lattice is " + regime_name(of.lattice.regime));
  timer.start("compare");
  std::vector<cplx> est;
  for (const auto& r : rf.set.resonances) est.push_back(r.lambda);
  const CompareReport rep = compare_to_lattice(est, of.lattice);
  timer.stop();

  json matches = json::array();
  for (const auto& m : rep.matches) {
    const auto& e = of.lattice.entries[static_cast<std::size_t>(m.lattice)];
    matches.push_back({
        {"estimate_index", m.estimate},
        {"re_estimate", m.estimated.real()},
        {"im_estimate", m.estimated.imag()},
        {"l", e.l},
        {"n", e.n},
        {"re_lattice", m.predicted.real()},
        {"im_lattice", m.predicted.imag()},
        {"abs_error", m.abs_error},
        {"rel_error", finite_or_null(m.rel_error)},
        {"re_error", m.estimated.real() - m.predicted.real()},
        {"im_error", m.estimated.imag() - m.predicted.imag()},
    });
  }
  const json doc = {
      {"schema_version", 1},
      {"regime", regime_name(rep.regime)},
      {"matches", std::move(matches)},
      {"unmatched_estimates", rep.unmatched_estimates},
  };
  write_text_atomic(paths.compare(), doc.dump(2) + "\n");
  StageOutput out;
  out.files = {paths.compare()};
  out.manifest = write_manifest(cfg, paths, "compare", {pr, po}, out.files, timer);
  return out;
}

} // namespace rpres
