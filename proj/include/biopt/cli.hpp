#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace biopt {

struct RunConfig {
  std::string problem = "quartic-abs-1d";
  std::string mode = "plain";  // plain, accelerated, bilevel, example1, example2
  int p = 3;
  std::optional<double> beta;
  std::optional<double> H;
  std::optional<double> M;      // example2: model constant
  std::optional<double> gamma;  // example2
  std::vector<double> anchors;  // example1: scanned anchors; example2: first entry is x
  double eps = 1e-8;
  int max_k = 100;
  int max_inner = 1000;
  std::uint64_t seed = 0;
  std::string provider = "auto";
  std::string out_dir = "biopt_out";
};

nlohmann::json config_to_json(const RunConfig& c);
// fields absent from j keep their value in base
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
// fills mode-specific defaults and throws ArgumentError on incompatible settings
RunConfig resolve_run_config(RunConfig c);

enum ExitCode { exit_converged = 0, exit_bad_input = 1, exit_iteration_limit = 2, exit_numerical = 3 };

int run_command(const RunConfig& cfg, std::ostream& log);
int verify_command(const std::string& suite, std::ostream& log);

struct RatesOptions {
  std::vector<std::string> problems = {"power8-1d", "quartic-abs-1d"};
  std::vector<std::string> modes = {"plain", "accelerated"};
  std::vector<int> ps = {2, 3};
  double H = 1.0;
  int max_k = 100;
  std::string out_dir = "biopt_out";
};

int rates_command(const RatesOptions& opt, std::ostream& log);
int list_problems_command(std::ostream& log);

std::string format_double(double v);

}  // namespace biopt
