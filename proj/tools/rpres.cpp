#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rpres/error.hpp"
#include "rpres/pipeline.hpp"

namespace {

int exit_code(const rpres::Error& e) {
  return e.category() == rpres::ErrorCategory::Validation ? 2 : 3;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

void report(const rpres::StageOutput& out) {
  for (const auto& f : out.files) std::printf("wrote %s\n", f.string().c_str());
  std::printf("manifest %s\n", out.manifest.string().c_str());
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced resonance estimation for stochastic oscillators"};
  app.set_version_flag("--version", rpres::software_version());
  app.require_subcommand(1);

  std::string config;
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config, "run configuration (JSON)")->required(); };

  auto* sim = app.add_subcommand("simulate", "integrate the SDE and write the trajectory CSV");
  add_config(sim);

  std::string traj_in;
  int jackknife = 0;
  std::vector<std::int64_t> converge_grid;
  std::vector<double> converge_lag;
  auto* est = app.add_subcommand("estimate", "transition matrices at tau and tau + dtau");
  add_config(est);
  est->add_option("--trajectory", traj_in, "trajectory CSV (default: from the config's io section)");
  est->add_option("--jackknife", jackknife, "also write N leave-one-block-out matrix sets")->check(CLI::NonNegativeNumber);
  est->add_option("--converge-grid", converge_grid, "boxes per dimension to sweep")->delimiter(',');
  est->add_option("--converge-lag", converge_lag, "tau values to sweep")->delimiter(',');

  std::string mat_a, mat_b, density;
  auto* res = app.add_subcommand("resonances", "eigen pipeline: solve, pair, ratio, filter, sort");
  add_config(res);
  res->add_option("--matrix-a", mat_a, "matrix file at tau");
  res->add_option("--matrix-b", mat_b, "matrix file at tau + dtau");
  res->add_option("--density", density, "sojourn density CSV");

  std::string res_in;
  auto* rec = app.add_subcommand("reconstruct", "correlation and PSD reconstruction vs sample estimates");
  add_config(rec);
  rec->add_option("--resonances", res_in, "resonance JSON");
  rec->add_option("--trajectory", traj_in, "trajectory CSV");

  auto* orc = app.add_subcommand("oracle", "small-noise resonance lattice and Floquet data");
  add_config(orc);

  std::string oracle_in;
  auto* cmp = app.add_subcommand("compare", "match estimated resonances to the oracle lattice");
  add_config(cmp);
  cmp->add_option("--resonances", res_in, "resonance JSON");
  cmp->add_option("--oracle", oracle_in, "oracle JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const rpres::RunConfig cfg = rpres::load_config(config);
    if (sim->parsed()) report(rpres::cmd_simulate(cfg));
    else if (est->parsed())
      report(rpres::cmd_estimate(cfg, {opt_path(traj_in), jackknife, converge_grid, converge_lag}));
    else if (res->parsed()) report(rpres::cmd_resonances(cfg, opt_path(mat_a), opt_path(mat_b), opt_path(density)));
    else if (rec->parsed()) report(rpres::cmd_reconstruct(cfg, opt_path(res_in), opt_path(traj_in)));
    else if (orc->parsed()) report(rpres::cmd_oracle(cfg));
    else if (cmp->parsed()) report(rpres::cmd_compare(cfg, opt_path(res_in), opt_path(oracle_in)));
  } catch (const rpres::Error& e) {
    std::fprintf(stderr, "rpres: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rpres: %s\n", e.what());
    return 2;
  }
  return 0;
}
