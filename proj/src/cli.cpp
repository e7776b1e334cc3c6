#include "biopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "biopt/errors.hpp"
#include "biopt/outer_solvers.hpp"
#include "biopt/tensor_step.hpp"
#include "biopt/verify.hpp"

namespace biopt {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void read_opt(const json& j, const char* key, std::optional<double>& v) {
  if (!j.contains(key)) return;
  if (j[key].is_null()) v.reset();
  else v = j[key].get<double>();
}

json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_json(const std::filesystem::path& p, const json& j) { open_out(p) << j.dump(2) << "\n"; }

int example1(const RunConfig& c, std::ostream& log) {
  const CompositeProblem prob = make_problem(c.problem);
  const ProxConfig cfg = make_prox_config(c.p, *c.H, *c.beta);
  const std::filesystem::path dir(c.out_dir);
  auto scan = open_out(dir / "scan.csv");
  scan << "anchor,T,g,lhs,rhs,accepted\n";
  json anchors = json::array();
  for (double xbar : c.anchors) {
    const double hi = xbar + 1.0;
    const auto pts = scan_acceptance_1d(prob, cfg, xbar, 0.0, hi, 100001);
    double lo_acc = std::numeric_limits<double>::infinity(), hi_acc = -lo_acc;
    for (const auto& s : pts) {
      scan << format_double(xbar) << ',' << format_double(s.T) << ',' << format_double(s.g) << ','
           << format_double(s.lhs) << ',' << format_double(s.rhs) << ',' << (s.accepted ? 1 : 0) << '\n';
      if (s.accepted) {
        lo_acc = std::min(lo_acc, s.T);
        hi_acc = std::max(hi_acc, s.T);
      }
    }
    const double lo_cf = std::max(0.0, xbar - std::cbrt(1 + cfg.beta) * std::pow(1.0 / cfg.H, 1.0 / 3.0));
    const double hi_cf = xbar - std::cbrt(1 - cfg.beta) * std::pow(1.0 / cfg.H, 1.0 / 3.0);
    const auto [T, g] = exact_prox_1d(prob, cfg, xbar);
    const auto cert = check_acceptable(prob, cfg, Vec::Constant(1, xbar), Vec::Constant(1, T), Vec::Constant(1, g));
    json a = {{"anchor", xbar},
              {"scanned", {number(lo_acc), number(hi_acc)}},
              {"prox_point", T},
              {"prox_accepted", cert.accepted}};
    if (c.p == 3) a["closed_form"] = {lo_cf, hi_cf};
    anchors.push_back(a);
    log << "anchor " << xbar << ": accepted T in [" << lo_acc << ", " << hi_acc << "], prox point " << T
        << (cert.accepted ? " accepted" : " rejected") << "\n";
  }
  write_json(dir / "summary.json", {{"mode", c.mode},
                                    {"problem", c.problem},
                                    {"p", c.p},
                                    {"params", {{"H", *c.H}, {"beta", *c.beta}}},
                                    {"anchors", anchors},
                                    {"seed", c.seed}});
  return exit_converged;
}

int example2(const RunConfig& c, std::ostream& log) {
  const CompositeProblem prob = make_problem(c.problem);
  const double mp1 = prob.regularity_bound(c.p + 1);
  const double gamma = *c.gamma, M = *c.M;
  double fact = 1.0;
  for (int i = 2; i <= c.p; ++i) fact *= i;
  const ProxConfig cfg = make_prox_config(c.p, M / fact, *c.beta);
  const Vec xb = Vec::Constant(1, c.anchors.front());
  const TaylorModel tm = make_taylor_model(prob, xb, c.p, M);
  const std::filesystem::path dir(c.out_dir);
  auto scan = open_out(dir / "scan.csv");
  scan << "T,g,crit_lhs,crit_rhs,criterion_ok,residual_bound_ok,cert_lhs,cert_rhs,accepted\n";
  int passing = 0, bound_ok = 0, accepted = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const double factor_ok = (1 - gamma) * M > mp1;
  for (int i = 0; i <= 20000; ++i) {
    const Vec T = Vec::Constant(1, xb(0) - 1.3 + 1.5 * i / 20000.0);
    const Vec g = prob.psi.select_subgradient(T, -augmented_value_grad(tm, T).second);
    const TensorStep st = tensor_criterion(tm, T, g, gamma);
    const bool bok = factor_ok && tensor_residual_bound_check(prob, c.p, xb, T, g, M, gamma, mp1);
    const AcceptanceCertificate cert = check_acceptable(prob, cfg, xb, T, g);
    if (st.criterion_ok) {
      ++passing;
      bound_ok += bok;
      accepted += cert.accepted;
      lo = std::min(lo, T(0));
      hi = std::max(hi, T(0));
    }
    scan << format_double(T(0)) << ',' << format_double(g(0)) << ',' << format_double(st.lhs) << ','
         << format_double(st.rhs) << ',' << st.criterion_ok << ',' << bok << ',' << format_double(cert.lhs) << ','
         << format_double(cert.rhs) << ',' << cert.accepted << '\n';
  }
  const TensorStep exact = tensor_step_1d(tm, prob.psi, gamma);
  write_json(dir / "summary.json",
             {{"mode", c.mode},
              {"problem", c.problem},
              {"p", c.p},
              {"params", {{"M", M}, {"gamma", gamma}, {"beta", *c.beta}, {"H", cfg.H}, {"x", xb(0)}}},
              {"criterion_region", {number(lo), number(hi)}},
              {"criterion_points", passing},
              {"residual_bound_points", bound_ok},
              {"accepted_points", accepted},
              {"tensor_step", exact.T},
              {"seed", c.seed}});
  log << "criterion region [" << lo << ", " << hi << "] with " << passing << " grid points, " << bound_ok
      << " satisfy the residual bound, " << accepted << " accepted at beta " << *c.beta << "\n";
  return exit_converged;
}

int solver_run(const RunConfig& c, std::ostream& log) {
  const CompositeProblem prob = make_problem(c.problem);
  const ReferenceSolution ref = prob.reference ? prob.reference() : reference_solution(prob);
  SolverSetup s;
  s.mode = parse_mode(c.mode);
  s.p = c.p;
  s.beta = c.beta;
  s.H = c.H;
  s.provider = c.provider;
  s.max_inner = c.max_inner;
  RunOptions opt;
  opt.eps = c.eps;
  opt.max_k = c.max_k;
  opt.F_star = ref.F;
  opt.keep_inner_traces = true;
  OuterTrace tr = run_solver(prob, s, opt);
  attach_bounds(tr, prob, ref.F, ref.x);

  const std::filesystem::path dir(c.out_dir);
  auto outer = open_out(dir / "outer.csv");
  outer << "k,F,gap,bound_rhs,inner_iters,cert_lhs,cert_rhs\n";
  bool feasible = true, bound_ok = true;
  int inner_total = 0;
  for (const auto& r : tr.records) {
    outer << r.k << ',' << format_double(r.F) << ',' << format_double(r.gap) << ',' << format_double(r.bound_rhs)
          << ',' << r.inner_iters << ',' << format_double(r.cert_lhs) << ',' << format_double(r.cert_rhs) << '\n';
    feasible = feasible && prob.psi.contains(r.x, 1e-12) && prob.f->in_domain(r.x);
    if (r.k >= 1) bound_ok = bound_ok && r.gap <= r.bound_rhs + 1e-8;
    inner_total += r.inner_iters;
  }
  for (std::size_t k = 0; k < tr.inner_traces.size(); ++k) {
    auto f = open_out(dir / ("inner_k" + std::to_string(k) + ".csv"));
    f << "i,phi,bregman_step,lhs,rhs,ratio\n";
    for (const auto& r : tr.inner_traces[k].records)
      f << r.i << ',' << format_double(r.phi) << ',' << format_double(r.bregman_step) << ',' << format_double(r.lhs)
        << ',' << format_double(r.rhs) << ',' << format_double(r.lhs / r.rhs) << '\n';
  }
  const SlopeFit fit = log_log_slope(tr);
  write_json(dir / "summary.json",
             {{"mode", c.mode},
              {"problem", c.problem},
              {"p", c.p},
              {"params",
               {{"H", tr.cfg.H},
                {"beta", tr.cfg.beta},
                {"coefficient_param", tr.param},
                {"eps", c.eps},
                {"max_k", c.max_k},
                {"max_inner", c.max_inner},
                {"provider", c.provider}}},
              {"iterations", tr.iterations},
              {"converged", tr.converged},
              {"F_star", ref.F},
              {"final_gap", number(tr.records.back().gap)},
              {"slope", number(fit.slope)},
              {"slope_points", fit.points},
              {"bound_ok", bound_ok},
              {"feasible", feasible},
              {"inner_iterations", inner_total},
              {"seed", c.seed}});
  log << c.problem << " " << c.mode << " p=" << c.p << ": " << tr.iterations << " iterations, gap "
      << tr.records.back().gap << (tr.converged ? " (converged)" : " (iteration limit)") << "\n";
  return tr.converged ? exit_converged : exit_iteration_limit;
}

}  // namespace

json config_to_json(const RunConfig& c) {
  return {{"problem", c.problem},   {"mode", c.mode},         {"p", c.p},
          {"beta", opt_json(c.beta)}, {"H", opt_json(c.H)},     {"M", opt_json(c.M)},
          {"gamma", opt_json(c.gamma)}, {"anchors", c.anchors}, {"eps", c.eps},
          {"max_k", c.max_k},       {"max_inner", c.max_inner}, {"seed", c.seed},
          {"provider", c.provider}, {"out_dir", c.out_dir}};
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  static const std::vector<std::string> known = {"problem", "mode",  "p",         "beta", "H",        "M",      "gamma",
                                                 "anchors", "eps",   "max_k",     "max_inner", "seed", "provider",
                                                 "out_dir"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ArgumentError("unknown config key: " + k);
  if (j.contains("problem")) c.problem = j["problem"].get<std::string>();
  if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
  if (j.contains("p")) c.p = j["p"].get<int>();
  read_opt(j, "beta", c.beta);
  read_opt(j, "H", c.H);
  read_opt(j, "M", c.M);
  read_opt(j, "gamma", c.gamma);
  if (j.contains("anchors")) c.anchors = j["anchors"].get<std::vector<double>>();
  if (j.contains("eps")) c.eps = j["eps"].get<double>();
  if (j.contains("max_k")) c.max_k = j["max_k"].get<int>();
  if (j.contains("max_inner")) c.max_inner = j["max_inner"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("provider")) c.provider = j["provider"].get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  return c;
}

RunConfig resolve_run_config(RunConfig c) {
  if (c.p < 1) throw ArgumentError("p must be positive");
  if (c.mode == "example1") {
    if (c.anchors.empty()) c.anchors = {0.6, 1.4};
    if (!c.beta) c.beta = 0.85;
    if (!c.H) c.H = 1.0;
    if (c.M || c.gamma) throw ArgumentError("example1 takes no M or gamma");
  } else if (c.mode == "example2") {
    if (c.H) throw ArgumentError("example2 derives H = M/p! from M");
    const CompositeProblem prob = make_problem(c.problem);
    if (prob.dim() != 1) throw ArgumentError("example2 needs a one-dimensional problem");
    if (c.anchors.empty()) c.anchors = {0.8};
    if (!c.beta) c.beta = 0.9;
    if (!c.gamma) c.gamma = 8.0 / 19.0;
    if (!c.M) c.M = 1.9 * prob.regularity_bound(c.p + 1);
  } else {
    const Mode m = parse_mode(c.mode);
    if (m == Mode::bilevel && (c.H || c.beta)) throw ArgumentError("bilevel mode fixes H and beta");
    if (c.M || c.gamma) throw ArgumentError("M and gamma apply to example2 only");
    if (!(c.eps >= 0) || c.max_k < 0 || c.max_inner < 1) throw ArgumentError("invalid iteration limits");
  }
  return c;
}

int run_command(const RunConfig& raw, std::ostream& log) {
  RunConfig c;
  try {
    make_problem(raw.problem);
    c = resolve_run_config(raw);
  } catch (const ArgumentError& e) {
    log << "error: " << e.what() << "\n";
    return exit_bad_input;
  }
  try {
    std::filesystem::create_directories(c.out_dir);
    if (c.mode == "example1") return example1(c, log);
    if (c.mode == "example2") return example2(c, log);
    return solver_run(c, log);
  } catch (const NumericalError& e) {
    log << "numerical error: " << e.what() << " (residual " << e.residual << ")\n";
  } catch (const ConvergenceError& e) {
    log << "numerical error: " << e.what() << " (ratio " << e.ratio << ")\n";
  } catch (const DomainError& e) {
    log << "numerical error: " << e.what() << "\n";
  } catch (const ArgumentError& e) {
    log << "error: " << e.what() << "\n";
    return exit_bad_input;
  } catch (const CapabilityError& e) {
    log << "error: " << e.what() << "\n";
    return exit_bad_input;
  }
  return exit_numerical;
}

int verify_command(const std::string& suite, std::ostream& log) {
  std::vector<CheckResult> res;
  try {
    res = run_suite(suite);
  } catch (const ArgumentError& e) {
    log << "error: " << e.what() << "\n";
    return exit_bad_input;
  }
  int failed = 0;
  for (const auto& r : res) {
    log << (r.pass ? "pass " : "FAIL ") << r.suite << ": " << r.name << "  max violation " << r.value
        << " (threshold " << r.threshold << ")";
    if (!r.detail.empty()) log << "  [" << r.detail << "]";
    log << "\n";
    failed += !r.pass;
  }
  log << res.size() - failed << "/" << res.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

int rates_command(const RatesOptions& o, std::ostream& log) {
  std::filesystem::create_directories(o.out_dir);
  auto csv = open_out(std::filesystem::path(o.out_dir) / "rates.csv");
  csv << "problem,mode,p,k_1e-2,k_1e-4,k_1e-6,slope,bound_ok\n";
  log << std::left << std::setw(18) << "problem" << std::setw(13) << "mode" << std::setw(4) << "p" << std::setw(8)
      << "1e-2" << std::setw(8) << "1e-4" << std::setw(8) << "1e-6" << std::setw(12) << "slope"
      << "bound\n";
  for (const auto& id : o.problems)
    for (const auto& m : o.modes)
      for (int p : o.ps) {
        std::vector<std::string> cells;
        try {
          const CompositeProblem prob = make_problem(id);
          const ReferenceSolution ref = prob.reference ? prob.reference() : reference_solution(prob);
          SolverSetup s;
          s.mode = parse_mode(m);
          s.p = p;
          if (s.mode != Mode::bilevel) s.H = o.H;
          RunOptions opt;
          opt.eps = 0.0;
          opt.max_k = o.max_k;
          opt.F_star = ref.F;
          OuterTrace tr = run_solver(prob, s, opt);
          attach_bounds(tr, prob, ref.F, ref.x);
          bool ok = true;
          for (const auto& r : tr.records)
            if (r.k >= 1) ok = ok && r.gap <= r.bound_rhs + 1e-8;
          for (double e : {1e-2, 1e-4, 1e-6}) {
            int hit = -1;
            for (const auto& r : tr.records)
              if (r.gap <= e) {
                hit = r.k;
                break;
              }
            cells.push_back(hit < 0 ? "-" : std::to_string(hit));
          }
          const SlopeFit fit = log_log_slope(tr);
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.3f", fit.slope);
          cells.push_back(buf);
          cells.push_back(ok ? "yes" : "no");
        } catch (const std::exception&) {
          cells.assign(5, "N/A");
        }
        csv << id << ',' << m << ',' << p;
        for (const auto& x : cells) csv << ',' << x;
        csv << '\n';
        log << std::setw(18) << id << std::setw(13) << m << std::setw(4) << p;
        for (std::size_t i = 0; i < cells.size(); ++i) log << std::setw(i == 3 ? 12 : 8) << cells[i];
        log << "\n";
      }
  return 0;
}

int list_problems_command(std::ostream& log) {
  for (const auto& id : problem_ids()) {
    const CompositeProblem p = make_problem(id);
    log << std::left << std::setw(18) << id << " n=" << p.dim() << "  psi=" << p.psi.name() << "  " << p.description
        << "\n";
  }
  return 0;
}

}  // namespace biopt
