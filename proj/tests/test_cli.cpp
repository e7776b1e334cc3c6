#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "biopt/cli.hpp"
#include "biopt/errors.hpp"

using namespace biopt;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("config json round trip") {
  RunConfig c;
  c.problem = "power8-1d";
  c.mode = "accelerated";
  c.p = 2;
  c.beta = 0.3;
  c.H = 4.0;
  c.anchors = {0.1, 0.2};
  c.eps = 1e-6;
  c.seed = 17;
  const RunConfig d = config_from_json(config_to_json(c));
  CHECK(config_to_json(d) == config_to_json(c));
  CHECK(d.beta == 0.3);
  CHECK(!d.M);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ArgumentError);
  const RunConfig partial = config_from_json(nlohmann::json{{"p", 4}}, c);
  CHECK(partial.p == 4);
  CHECK(partial.problem == "power8-1d");
}

TEST_CASE("mode defaults") {
  RunConfig e1;
  e1.mode = "example1";
  const RunConfig r1 = resolve_run_config(e1);
  CHECK(r1.anchors.size() == 2);
  CHECK(*r1.beta == 0.85);
  RunConfig e2;
  e2.mode = "example2";
  const RunConfig r2 = resolve_run_config(e2);
  CHECK(*r2.M == doctest::Approx(1.9 * 24));
  CHECK(*r2.gamma == doctest::Approx(8.0 / 19));
  RunConfig b;
  b.mode = "bilevel";
  b.H = 2.0;
  CHECK_THROWS_AS(resolve_run_config(b), ArgumentError);
  RunConfig m;
  m.mode = "sideways";
  CHECK_THROWS_AS(resolve_run_config(m), ArgumentError);
}

TEST_CASE("run output is deterministic") {
  const fs::path base = fs::temp_directory_path() / "biopt_cli_test";
  fs::remove_all(base);
  RunConfig c;
  c.problem = "quartic-abs-1d";
  c.max_k = 20;
  std::ostringstream log;
  c.out_dir = (base / "a").string();
  CHECK(run_command(c, log) == exit_converged);
  c.out_dir = (base / "b").string();
  CHECK(run_command(c, log) == exit_converged);
  const std::string a = slurp(base / "a" / "outer.csv");
  CHECK(a.rfind("k,F,gap,bound_rhs,inner_iters,cert_lhs,cert_rhs", 0) == 0);
  CHECK(a == slurp(base / "b" / "outer.csv"));
  const auto j = nlohmann::json::parse(slurp(base / "a" / "summary.json"));
  CHECK(j.at("converged").get<bool>());

  c.problem = "no-such-problem";
  CHECK(run_command(c, log) == exit_bad_input);
  c.problem = "power8-1d";
  c.max_k = 2;
  c.eps = 1e-30;
  CHECK(run_command(c, log) == exit_iteration_limit);
  fs::remove_all(base);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 12345.678}) CHECK(std::stod(format_double(v)) == v);
}
