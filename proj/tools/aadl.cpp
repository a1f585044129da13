// aadl: generate synthetic datasets, run single fits and robustness sweeps.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "aadl/cli.hpp"

namespace {

template <typename T>
void set_if(std::optional<T>& dst, const CLI::Option* opt, const T& value) {
  if (opt->count() > 0) dst = value;
}

void add_sweep_options(CLI::App* cmd, aadl::cli::SweepOptions& o, std::string& config,
                       std::string& data, std::string& out, std::size_t& seeds,
                       std::string& methods, CLI::Option*& config_opt, CLI::Option*& data_opt,
                       CLI::Option*& seeds_opt, CLI::Option*& methods_opt) {
  config_opt = cmd->add_option("--config", config, "experiment JSON");
  data_opt = cmd->add_option("--data", data, "dataset bundle directory");
  cmd->add_option("--out", out, "curve CSV path")->required();
  seeds_opt = cmd->add_option("--seeds", seeds, "number of solver seeds (default 20)");
  methods_opt = cmd->add_option("--methods", methods, "comma list of atom_assisted,sdl,blind");
  cmd->add_flag("--paper-budget", o.paper_budget, "500 outer / 100 inner iterations");
  cmd->add_flag("--reseed-noise", o.reseed_noise, "fresh noise realisation per seed");
  cmd->add_option("--workers", o.workers, "worker threads (default: hardware threads)");
  cmd->add_flag("--force", o.force, "overwrite an existing CSV");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atom-assisted dictionary learning"};
  app.require_subcommand(1);

  aadl::cli::GenerateOptions gen;
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  auto* g = app.add_subcommand("generate", "write a synthetic dataset bundle");
  auto* g_config = g->add_option("--config", gen_config, "dataset spec JSON");
  g->add_option("--out", gen_out, "bundle directory")->required();
  auto* g_seed = g->add_option("--seed", gen_seed, "dataset seed");
  g->add_flag("--force", gen.force, "write into a non-empty directory");

  aadl::cli::FitOptions fo;
  std::string fit_data, fit_config, fit_anchors, fit_out, fit_method;
  std::uint64_t fit_seed = 0;
  int fit_outer = 0;
  auto* f = app.add_subcommand("fit", "fit one dictionary to a bundle");
  f->add_option("--data", fit_data, "dataset bundle directory")->required();
  auto* f_config = f->add_option("--config", fit_config, "solver JSON");
  auto* f_anchors = f->add_option("--anchors", fit_anchors, "T x M anchor CSV");
  f->add_option("--out", fit_out, "output directory")->required();
  auto* f_method = f->add_option("--method", fit_method, "atom_assisted, sdl or blind");
  auto* f_seed = f->add_option("--seed", fit_seed, "initialization seed");
  auto* f_outer = f->add_option("--n-outer", fit_outer, "outer iterations")->check(CLI::PositiveNumber);
  f->add_flag("--force", fo.force, "write into a non-empty directory");
  f->add_flag("--timing", fo.timing, "record wall time in result.json");

  aadl::cli::SweepOptions so_shift, so_hrf;
  std::string s_config[2], s_data[2], s_out[2], s_methods[2];
  std::size_t s_seeds[2] = {0, 0};
  CLI::Option* s_config_opt[2];
  CLI::Option* s_data_opt[2];
  CLI::Option* s_seeds_opt[2];
  CLI::Option* s_methods_opt[2];
  auto* ss = app.add_subcommand("sweep-shift", "time-shifted anchor sweep");
  add_sweep_options(ss, so_shift, s_config[0], s_data[0], s_out[0], s_seeds[0], s_methods[0],
                    s_config_opt[0], s_data_opt[0], s_seeds_opt[0], s_methods_opt[0]);
  auto* sh = app.add_subcommand("sweep-hrf", "narrowed-HRF anchor sweep");
  add_sweep_options(sh, so_hrf, s_config[1], s_data[1], s_out[1], s_seeds[1], s_methods[1],
                    s_config_opt[1], s_data_opt[1], s_seeds_opt[1], s_methods_opt[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return aadl::cli::kExitUsage;
  }

  try {
    if (g->parsed()) {
      set_if(gen.config, g_config, std::filesystem::path(gen_config));
      set_if(gen.seed, g_seed, gen_seed);
      gen.out = gen_out;
      aadl::cli::cmd_generate(gen, std::cout);
    } else if (f->parsed()) {
      fo.data = fit_data;
      fo.out = fit_out;
      set_if(fo.config, f_config, std::filesystem::path(fit_config));
      set_if(fo.anchors, f_anchors, std::filesystem::path(fit_anchors));
      if (f_method->count() > 0) fo.method = aadl::mode_from_string(fit_method);
      set_if(fo.seed, f_seed, fit_seed);
      set_if(fo.n_outer, f_outer, fit_outer);
      aadl::cli::cmd_fit(fo, std::cout, std::cerr);
    } else {
      const int i = ss->parsed() ? 0 : 1;
      auto& o = i == 0 ? so_shift : so_hrf;
      set_if(o.config, s_config_opt[i], std::filesystem::path(s_config[i]));
      set_if(o.data, s_data_opt[i], std::filesystem::path(s_data[i]));
      set_if(o.seeds, s_seeds_opt[i], s_seeds[i]);
      if (s_methods_opt[i]->count() > 0) o.methods = aadl::cli::parse_methods(s_methods[i]);
      o.out = s_out[i];
      if (i == 0)
        aadl::cli::cmd_sweep_shift(o, std::cout);
      else
        aadl::cli::cmd_sweep_hrf(o, std::cout);
    }
  } catch (const aadl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return aadl::cli::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return aadl::cli::kExitUsage;
  }
  return aadl::cli::kExitOk;
}
