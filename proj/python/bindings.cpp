#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biopt/errors.hpp"
#include "biopt/outer_solvers.hpp"
#include "biopt/verify.hpp"

namespace py = pybind11;
using namespace biopt;

namespace {

py::dict trace_dict(const OuterTrace& tr) {
  std::vector<int> k;
  std::vector<double> F, gap, bound, lhs, rhs;
  std::vector<int> inner;
  std::vector<Vec> x;
  for (const auto& r : tr.records) {
    k.push_back(r.k);
    F.push_back(r.F);
    gap.push_back(r.gap);
    bound.push_back(r.bound_rhs);
    inner.push_back(r.inner_iters);
    lhs.push_back(r.cert_lhs);
    rhs.push_back(r.cert_rhs);
    x.push_back(r.x);
  }
  py::dict d;
  d["mode"] = mode_name(tr.mode);
  d["p"] = tr.cfg.p;
  d["H"] = tr.cfg.H;
  d["beta"] = tr.cfg.beta;
  d["converged"] = tr.converged;
  d["iterations"] = tr.iterations;
  d["k"] = k;
  d["F"] = F;
  d["gap"] = gap;
  d["bound_rhs"] = bound;
  d["inner_iters"] = inner;
  d["cert_lhs"] = lhs;
  d["cert_rhs"] = rhs;
  d["x"] = x;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);

  m.def("problem_ids", &problem_ids);

  m.def(
      "reference",
      [](const std::string& id) {
        const ReferenceSolution r = reference_solution(make_problem(id));
        return py::make_tuple(r.x, r.F, r.residual);
      },
      py::arg("problem"));

  m.def(
      "objective", [](const std::string& id, const Vec& x) { return make_problem(id).F(x); }, py::arg("problem"),
      py::arg("x"));

  m.def(
      "solve",
      [](const std::string& id, const std::string& mode, int p, std::optional<double> beta, std::optional<double> H,
         double eps, int max_k) {
        const CompositeProblem prob = make_problem(id);
        const ReferenceSolution ref = reference_solution(prob);
        SolverSetup s;
        s.mode = parse_mode(mode);
        s.p = p;
        s.beta = beta;
        s.H = H;
        RunOptions opt;
        opt.eps = eps;
        opt.max_k = max_k;
        opt.F_star = ref.F;
        OuterTrace tr = run_solver(prob, s, opt);
        attach_bounds(tr, prob, ref.F, ref.x);
        return trace_dict(tr);
      },
      py::arg("problem"), py::arg("mode") = "plain", py::arg("p") = 3, py::arg("beta") = py::none(),
      py::arg("H") = py::none(), py::arg("eps") = 1e-8, py::arg("max_k") = 100);

  m.def(
      "exact_prox_1d",
      [](const std::string& id, int p, double H, double beta, double xbar) {
        return exact_prox_1d(make_problem(id), make_prox_config(p, H, beta), xbar);
      },
      py::arg("problem"), py::arg("p"), py::arg("H"), py::arg("beta"), py::arg("xbar"));

  m.def(
      "is_acceptable",
      [](const std::string& id, int p, double H, double beta, const Vec& xbar, const Vec& T, const Vec& g) {
        const AcceptanceCertificate c = check_acceptable(make_problem(id), make_prox_config(p, H, beta), xbar, T, g);
        return py::make_tuple(c.accepted, c.lhs, c.rhs);
      },
      py::arg("problem"), py::arg("p"), py::arg("H"), py::arg("beta"), py::arg("xbar"), py::arg("T"), py::arg("g"));

  m.def(
      "dp1",
      [](int p, const Vec& h) {
        const PowerProx pp(p, MetricSpace::identity(static_cast<int>(h.size())));
        return py::make_tuple(dp1_value(pp, h), dp1_gradient(pp, h));
      },
      py::arg("p"), py::arg("h"));

  m.def("bilevel_H", &bilevel_H, py::arg("p"), py::arg("M"));

  m.def("suite_ids", &suite_ids);
  m.def(
      "verify",
      [](const std::string& suite) {
        py::list out;
        for (const auto& r : run_suite(suite)) {
          py::dict d;
          d["suite"] = r.suite;
          d["name"] = r.name;
          d["value"] = r.value;
          d["threshold"] = r.threshold;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("suite"));
}
