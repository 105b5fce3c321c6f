#include "rpres/config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "json.hpp"
#include "rpres/error.hpp"
#include "rpres/io.hpp"

namespace rpres {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorKind::InvalidArgument, "config: " + msg); }

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid("section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) invalid("unknown key '" + section + "." + key + "'");
}

template <typename T> void get(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("key '" + section + "." + key + "' has the wrong type");
  }
}

std::int64_t steps_of(double lag, double interval, const char* what) {
  const double ratio = lag / interval;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded))
    invalid(std::string(what) + " = " + format_double(lag) +
            " is not a positive integer multiple of the sampling interval " + format_double(interval));
  return static_cast<std::int64_t>(rounded);
}

} // namespace

std::int64_t RunConfig::tau_steps() const { return steps_of(lags.tau, sim.sampling_interval(), "lags.tau"); }
std::int64_t RunConfig::dtau_steps() const { return steps_of(lags.dtau, sim.sampling_interval(), "lags.dtau"); }

void RunConfig::validate() const {
  if (schema_version != kConfigSchemaVersion)
    invalid("unsupported schema_version " + std::to_string(schema_version));
  hopf.validate();
  sim.validate();
  grid.validate();
  if (!(lags.dtau > 0.0) || !(lags.tau > 0.0)) invalid("lags must be positive");
  if (!(lags.dtau < lags.tau)) invalid("lags.dtau must be smaller than lags.tau");
  tau_steps();
  dtau_steps();
  if (eigen.k < 1) invalid("eigen.k must be >= 1");
  if (!(eigen.tol > 0.0)) invalid("eigen.tol must be positive");
  if (!(eigen.kappa_max >= 1.0)) invalid("eigen.kappa_max must be >= 1");
  if (!(eigen.pairing_threshold > 0.0 && eigen.pairing_threshold <= 1.0))
    invalid("eigen.pairing_threshold must lie in (0, 1]");
  if (eigen.max_restarts < 0) invalid("eigen.max_restarts must be >= 0");
  if (eigen.krylov_dim != 0 && eigen.krylov_dim < eigen.k + 5)
    invalid("eigen.krylov_dim must be 0 or at least k + 5");
  if (spectral.max_lag < 1) invalid("spectral.max_lag must be >= 1");
  if (spectral.t_points < 2) invalid("spectral.t_points must be >= 2");
  if (!(spectral.omega_max > 0.0)) invalid("spectral.omega_max must be positive");
  if (spectral.welch_segment != 0 && spectral.welch_segment < 2)
    invalid("spectral.welch_segment must be 0 or >= 2");
  if (!(spectral.welch_overlap >= 0.0 && spectral.welch_overlap < 1.0))
    invalid("spectral.welch_overlap must lie in [0, 1)");
  static const std::set<std::string> observables{"x", "y", "r2", "x2my2", "const"};
  if (!observables.count(spectral.observable)) invalid("unknown spectral.observable '" + spectral.observable + "'");
  if (oracle.max_order < 0 || oracle.max_n < 0 || oracle.max_l < 0) invalid("oracle orders must be >= 0");
  if (oracle.n_quad < 64) invalid("oracle.n_quad must be >= 64");
  if (io.stem.empty() || io.stem.find('/') != std::string::npos) invalid("io.stem must be a plain file name");
  if (threads < 1) invalid("threads must be >= 1");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"schema_version", "hopf", "sim", "grid", "lags", "eigen", "spectral", "oracle", "io",
                     "threads", "time_unit_label"});
  RunConfig c;
  get(j, "schema_version", c.schema_version, "");
  get(j, "threads", c.threads, "");
  if (j.contains("time_unit_label") && !j.at("time_unit_label").is_null()) {
    std::string label;
    get(j, "time_unit_label", label, "");
    c.time_unit_label = label;
  }
  if (j.contains("hopf")) {
    const auto& s = j.at("hopf");
    check_keys(s, "hopf", {"delta", "gamma", "beta", "epsilon"});
    get(s, "delta", c.hopf.delta, "hopf");
    get(s, "gamma", c.hopf.gamma, "hopf");
    get(s, "beta", c.hopf.beta, "hopf");
    get(s, "epsilon", c.hopf.epsilon, "hopf");
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    check_keys(s, "sim", {"dt", "n_samples", "sample_stride", "spinup_steps", "seed", "initial_state", "blowup_radius"});
    get(s, "dt", c.sim.dt, "sim");
    get(s, "n_samples", c.sim.n_samples, "sim");
    get(s, "sample_stride", c.sim.sample_stride, "sim");
    if (s.contains("spinup_steps") && !s.at("spinup_steps").is_null()) {
      std::int64_t v = 0;
      get(s, "spinup_steps", v, "sim");
      c.sim.spinup_steps = v;
    }
    get(s, "seed", c.sim.seed, "sim");
    get(s, "initial_state", c.sim.initial_state, "sim");
    get(s, "blowup_radius", c.sim.blowup_radius, "sim");
  }
  if (j.contains("grid")) {
    const auto& s = j.at("grid");
    check_keys(s, "grid", {"lo", "hi", "n_per_dim"});
    get(s, "lo", c.grid.lo, "grid");
    get(s, "hi", c.grid.hi, "grid");
    get(s, "n_per_dim", c.grid.n_per_dim, "grid");
  }
  if (j.contains("lags")) {
    const auto& s = j.at("lags");
    check_keys(s, "lags", {"tau", "dtau"});
    get(s, "tau", c.lags.tau, "lags");
    get(s, "dtau", c.lags.dtau, "lags");
  }
  if (j.contains("eigen")) {
    const auto& s = j.at("eigen");
    check_keys(s, "eigen", {"k", "tol", "kappa_max", "pairing_threshold", "max_restarts", "krylov_dim"});
    get(s, "k", c.eigen.k, "eigen");
    get(s, "tol", c.eigen.tol, "eigen");
    get(s, "kappa_max", c.eigen.kappa_max, "eigen");
    get(s, "pairing_threshold", c.eigen.pairing_threshold, "eigen");
    get(s, "max_restarts", c.eigen.max_restarts, "eigen");
    get(s, "krylov_dim", c.eigen.krylov_dim, "eigen");
  }
  if (j.contains("spectral")) {
    const auto& s = j.at("spectral");
    check_keys(s, "spectral", {"max_lag", "t_points", "omega_max", "welch_segment", "welch_overlap", "observable"});
    get(s, "max_lag", c.spectral.max_lag, "spectral");
    get(s, "t_points", c.spectral.t_points, "spectral");
    get(s, "omega_max", c.spectral.omega_max, "spectral");
    get(s, "welch_segment", c.spectral.welch_segment, "spectral");
    get(s, "welch_overlap", c.spectral.welch_overlap, "spectral");
    get(s, "observable", c.spectral.observable, "spectral");
  }
  if (j.contains("oracle")) {
    const auto& s = j.at("oracle");
    check_keys(s, "oracle", {"max_order", "max_n", "max_l", "n_quad"});
    get(s, "max_order", c.oracle.max_order, "oracle");
    get(s, "max_n", c.oracle.max_n, "oracle");
    get(s, "max_l", c.oracle.max_l, "oracle");
    get(s, "n_quad", c.oracle.n_quad, "oracle");
  }
  if (j.contains("io")) {
    const auto& s = j.at("io");
    check_keys(s, "io", {"output_dir", "stem"});
    std::string dir = c.io.output_dir.string();
    get(s, "output_dir", dir, "io");
    c.io.output_dir = dir;
    get(s, "stem", c.io.stem, "io");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string serialize_config(const RunConfig& c) {
  json j = {
      {"schema_version", c.schema_version},
      {"hopf", {{"delta", c.hopf.delta}, {"gamma", c.hopf.gamma}, {"beta", c.hopf.beta}, {"epsilon", c.hopf.epsilon}}},
      {"sim",
       {{"dt", c.sim.dt},
        {"n_samples", c.sim.n_samples},
        {"sample_stride", c.sim.sample_stride},
        {"spinup_steps", c.sim.spinup_steps ? json(*c.sim.spinup_steps) : json(nullptr)},
        {"seed", c.sim.seed},
        {"initial_state", c.sim.initial_state},
        {"blowup_radius", c.sim.blowup_radius}}},
      {"grid", {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"n_per_dim", c.grid.n_per_dim}}},
      {"lags", {{"tau", c.lags.tau}, {"dtau", c.lags.dtau}}},
      {"eigen",
       {{"k", c.eigen.k},
        {"tol", c.eigen.tol},
        {"kappa_max", c.eigen.kappa_max},
        {"pairing_threshold", c.eigen.pairing_threshold},
        {"max_restarts", c.eigen.max_restarts},
        {"krylov_dim", c.eigen.krylov_dim}}},
      {"spectral",
       {{"max_lag", c.spectral.max_lag},
        {"t_points", c.spectral.t_points},
        {"omega_max", c.spectral.omega_max},
        {"welch_segment", c.spectral.welch_segment},
        {"welch_overlap", c.spectral.welch_overlap},
        {"observable", c.spectral.observable}}},
      {"oracle",
       {{"max_order", c.oracle.max_order},
        {"max_n", c.oracle.max_n},
        {"max_l", c.oracle.max_l},
        {"n_quad", c.oracle.n_quad}}},
      {"io", {{"output_dir", c.io.output_dir.generic_string()}, {"stem", c.io.stem}}},
      {"threads", c.threads},
      {"time_unit_label", c.time_unit_label ? json(*c.time_unit_label) : json(nullptr)},
  };
  return j.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto hopf = [](const HopfParams& p) { return std::tie(p.delta, p.gamma, p.beta, p.epsilon); };
  auto sim = [](const SimConfig& s) {
    return std::tie(s.dt, s.n_samples, s.sample_stride, s.spinup_steps, s.seed, s.initial_state, s.blowup_radius);
  };
  auto grid = [](const GridSpec& g) { return std::tie(g.lo, g.hi, g.n_per_dim); };
  auto eig = [](const EigenConfig& e) {
    return std::tie(e.k, e.tol, e.kappa_max, e.pairing_threshold, e.max_restarts, e.krylov_dim);
  };
  auto spec = [](const SpectralConfig& s) {
    return std::tie(s.max_lag, s.t_points, s.omega_max, s.welch_segment, s.welch_overlap, s.observable);
  };
  auto orc = [](const OracleConfig& o) { return std::tie(o.max_order, o.max_n, o.max_l, o.n_quad); };
  return a.schema_version == b.schema_version && hopf(a.hopf) == hopf(b.hopf) && sim(a.sim) == sim(b.sim) &&
         grid(a.grid) == grid(b.grid) && a.lags.tau == b.lags.tau && a.lags.dtau == b.lags.dtau &&
         eig(a.eigen) == eig(b.eigen) && spec(a.spectral) == spec(b.spectral) && orc(a.oracle) == orc(b.oracle) &&
         a.io.output_dir == b.io.output_dir && a.io.stem == b.io.stem && a.threads == b.threads &&
         a.time_unit_label == b.time_unit_label;
}

} // namespace rpres
