#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "biopt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"High-order proximal-point and bi-level solvers"};
  app.require_subcommand(1);

  biopt::RunConfig cfg;
  std::string config_file;
  double beta = 0, H = 0, M = 0, gamma = 0;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "run a solver or an example scan");
  run->add_option("--config", config_file, "flat JSON config file");
  auto* o_problem = run->add_option("--problem", cfg.problem, "problem id");
  auto* o_mode = run->add_option("--mode", cfg.mode, "plain, accelerated, bilevel, example1, example2");
  auto* o_p = run->add_option("--p", cfg.p, "order p");
  auto* o_beta = run->add_option("--beta", beta, "acceptance parameter");
  auto* o_H = run->add_option("--H", H, "regularization constant");
  auto* o_M = run->add_option("--M", M, "tensor model constant (example2)");
  auto* o_gamma = run->add_option("--gamma", gamma, "tensor criterion parameter (example2)");
  auto* o_anchor = run->add_option("--anchor", cfg.anchors, "anchor points (example modes)");
  auto* o_eps = run->add_option("--eps", cfg.eps, "target gap");
  auto* o_maxk = run->add_option("--max-k", cfg.max_k, "outer iteration limit");
  auto* o_maxi = run->add_option("--max-inner", cfg.max_inner, "inner iteration limit");
  auto* o_seed = run->add_option("--seed", cfg.seed, "seed");
  auto* o_prov = run->add_option("--provider", cfg.provider, "auto, exact, newton, inner");
  auto* o_out = run->add_option("--out", cfg.out_dir, "output directory");
  run->add_flag("--print-config", print_config, "print the resolved config and exit");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", suite, "lemma1, estseq, bregman, sandwich, theta, tensor, all");

  biopt::RatesOptions rates_opt;
  auto* rates = app.add_subcommand("rates", "rate comparison table");
  rates->add_option("--problems", rates_opt.problems);
  rates->add_option("--modes", rates_opt.modes);
  rates->add_option("--p", rates_opt.ps);
  rates->add_option("--H", rates_opt.H);
  rates->add_option("--max-k", rates_opt.max_k);
  rates->add_option("--out", rates_opt.out_dir);

  auto* list = app.add_subcommand("list-problems", "list catalog problems");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    biopt::RunConfig merged;
    try {
      if (!config_file.empty()) {
        std::ifstream f(config_file);
        if (!f) throw std::runtime_error("cannot read " + config_file);
        merged = biopt::config_from_json(nlohmann::json::parse(f));
      }
      if (*o_problem) merged.problem = cfg.problem;
      if (*o_mode) merged.mode = cfg.mode;
      if (*o_p) merged.p = cfg.p;
      if (*o_beta) merged.beta = beta;
      if (*o_H) merged.H = H;
      if (*o_M) merged.M = M;
      if (*o_gamma) merged.gamma = gamma;
      if (*o_anchor) merged.anchors = cfg.anchors;
      if (*o_eps) merged.eps = cfg.eps;
      if (*o_maxk) merged.max_k = cfg.max_k;
      if (*o_maxi) merged.max_inner = cfg.max_inner;
      if (*o_seed) merged.seed = cfg.seed;
      if (*o_prov) merged.provider = cfg.provider;
      if (*o_out) merged.out_dir = cfg.out_dir;
      if (print_config) {
        std::cout << biopt::config_to_json(biopt::resolve_run_config(merged)).dump(2) << "\n";
        return 0;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return biopt::exit_bad_input;
    }
    return biopt::run_command(merged, std::cerr);
  }
  if (*verify) return biopt::verify_command(suite, std::cout);
  if (*rates) return biopt::rates_command(rates_opt, std::cout);
  if (*list) return biopt::list_problems_command(std::cout);
  return 0;
}
