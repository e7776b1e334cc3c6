#include "biopt/problems.hpp"

#include <cmath>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"

namespace biopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<SeparableStructured> scalar_oracle(std::shared_ptr<const ScalarFunction> phi,
                                                   std::optional<Box> region = std::nullopt) {
  return std::make_shared<SeparableStructured>(Mat::Ones(1, 1), Vec::Zero(1), std::move(phi), Vec(),
                                               std::move(region));
}

Box box1(double lo, double hi) { return {Vec::Constant(1, lo), Vec::Constant(1, hi)}; }

SmoothModel model_of(const SmoothOracle& f) {
  return {[&f](const Vec& x) { return f.value(x); }, [&f](const Vec& x) { return f.gradient(x); },
          [&f](const Vec& x) { return f.hessian(x); }};
}

CompositeProblem one_dim(std::string id, std::string desc, std::shared_ptr<const ScalarFunction> phi,
                         SimpleTerm psi, double x0, Box region) {
  CompositeProblem p;
  p.id = std::move(id);
  p.description = std::move(desc);
  p.f = scalar_oracle(std::move(phi), region);
  p.psi = std::move(psi);
  p.metric = MetricSpace::identity(1);
  p.x0 = Vec::Constant(1, x0);
  p.region = region;
  return p;
}

ReferenceSolution reference_1d(const CompositeProblem& p) {
  const ScalarPsi s = p.psi.coordinate(0, 1);
  const auto G = [&p](double t) { return p.f->gradient(Vec::Constant(1, t))(0); };
  const double t = solve_inclusion_1d(G, s, p.x0(0));
  return certify_reference(p, Vec::Constant(1, t));
}

CompositeProblem quartic_sep_10d() {
  const int n = 10;
  Vec w(n), b(n);
  for (int i = 0; i < n; ++i) {
    w(i) = 0.5 + 1.5 * i / (n - 1.0);
    b(i) = 0.9 * std::sin(1.7 * i + 0.3);
  }
  Box region{Vec::Constant(n, -3.0), Vec::Constant(n, 3.0)};
  CompositeProblem p;
  p.id = "quartic-sep-10d";
  p.description = "sum_i w_i (x_i - b_i)^4 + 0.5 ||x||_1";
  p.f = std::make_shared<SeparableStructured>(Mat::Identity(n, n), b, std::make_shared<Monomial>(4), w,
                                              region);
  p.psi = SimpleTerm::l1(0.5);
  p.metric = MetricSpace::identity(n);
  p.x0 = Vec::Constant(n, 2.0);
  p.region = region;
  p.reference = [w, b, n, p]() {
    Vec x(n);
    const ScalarPsi s{0.5};
    for (int i = 0; i < n; ++i) {
      const double wi = w(i), bi = b(i);
      x(i) = solve_inclusion_1d([&](double t) { return 4.0 * wi * std::pow(t - bi, 3); }, s, 0.0);
    }
    return certify_reference(p, x);
  };
  return p;
}

CompositeProblem neglog_sep() {
  const int n = 5, m = 8;
  Mat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::sin(2.3 * (i + 1) + 1.1 * (j + 1) * (j + 1));
  Vec b(m);
  for (int i = 0; i < m; ++i) b(i) = -a.row(i).lpNorm<1>() - 1.0;
  Box region{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
  CompositeProblem p;
  p.id = "neglog-sep";
  p.description = "sum_i -log(<a_i,x> - b_i) over the box [-1,1]^5 (8 rows)";
  p.f = std::make_shared<SeparableStructured>(a, b, std::make_shared<NegLog>(), Vec(), region);
  p.psi = SimpleTerm::box(region.lo, region.hi);
  p.metric = MetricSpace::identity(n);
  p.x0 = Vec::Zero(n);
  p.region = region;
  return p;
}

CompositeProblem logistic_l1() {
  const int n = 4, m = 6;
  Mat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::cos(1.3 * (i + 1) * (j + 2) + 0.5 * j);
  Vec b(m);
  for (int i = 0; i < m; ++i) b(i) = 0.7 * std::sin(0.9 * i + 0.2);
  Box region{Vec::Constant(n, -3.0), Vec::Constant(n, 3.0)};
  CompositeProblem p;
  p.id = "logistic-l1";
  p.description = "sum_i log(1 + exp(<a_i,x> - b_i)) + 0.1 ||x||_1";
  p.f = std::make_shared<SeparableStructured>(a, b, std::make_shared<Logistic>(), Vec(), region);
  p.psi = SimpleTerm::l1(0.1);
  p.metric = MetricSpace::identity(n);
  p.x0 = Vec::Constant(n, 1.0);
  p.region = region;
  return p;
}

CompositeProblem ball_quadratic() {
  const int n = 3, m = 4;
  Mat a(m, n);
  a << 2.0, 0.3, -0.4,
       0.1, 1.5, 0.2,
       -0.3, 0.4, 1.2,
       0.5, -0.2, 0.3;
  Vec xu(n);
  xu << 2.0, -1.5, 1.0;
  const Vec b = a * xu;
  Box region{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
  CompositeProblem p;
  p.id = "ball-quadratic";
  p.description = "1/2 ||A x - b||^2 over the unit ball (minimizer of f outside the ball)";
  p.f = std::make_shared<SeparableStructured>(a, b, std::make_shared<Monomial>(2), Vec::Constant(m, 0.5),
                                              region);
  p.psi = SimpleTerm::ball(Vec::Zero(n), 1.0);
  p.metric = MetricSpace::identity(n);
  p.x0 = Vec::Zero(n);
  p.region = region;
  p.bound_floor = 1.0;
  p.reference = [a, b, p]() {
    const Mat q = a.transpose() * a;
    const Vec x = trust_region_solve(q, -(a.transpose() * b), 1.0);
    return certify_reference(p, x);
  };
  return p;
}

}  // namespace

double CompositeProblem::F(const Vec& x) const {
  const double p = psi.value(x);
  if (!std::isfinite(p)) return kInf;
  if (!f->in_domain(x)) return kInf;
  return f->value(x) + p;
}

double CompositeProblem::regularity_bound(int j) const {
  const auto m = f->derivative_bound(j);
  if (!m) throw CapabilityError(id + ": no bound available for derivative order " + std::to_string(j));
  return std::max(*m, bound_floor);
}

Vec CompositeProblem::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = dim();
  Vec x(n);
  for (int j = 0; j < n; ++j) {
    const double lo = region ? region->lo(j) : x0(j) - 2.0;
    const double hi = region ? region->hi(j) : x0(j) + 2.0;
    x(j) = lo + (hi - lo) * u(rng);
  }
  return x;
}

std::vector<std::string> problem_ids() {
  return {"quartic-abs-1d", "quartic-1d",   "power8-1d",      "linear-nonneg-1d",
          "quartic-sep-10d", "neglog-sep", "ball-quadratic", "logistic-l1"};
}

CompositeProblem make_problem(const std::string& id) {
  if (id == "quartic-abs-1d") {
    auto p = one_dim(id, "x^4 + |x|", std::make_shared<Monomial>(4), SimpleTerm::abs1d(), 1.0, box1(-2, 2));
    p.reference = [p]() { return reference_1d(p); };
    return p;
  }
  if (id == "quartic-1d") {
    auto p = one_dim(id, "x^4", std::make_shared<Monomial>(4), SimpleTerm::zero(), 1.0, box1(-2, 2));
    p.reference = [p]() { return reference_1d(p); };
    return p;
  }
  if (id == "power8-1d") {
    auto p = one_dim(id, "x^8", std::make_shared<Monomial>(8), SimpleTerm::zero(), 1.0, box1(-1.5, 1.5));
    p.reference = [p]() { return reference_1d(p); };
    return p;
  }
  if (id == "linear-nonneg-1d") {
    auto p = one_dim(id, "x + indicator(x >= 0)", std::make_shared<Linear>(), SimpleTerm::nonneg(), 1.4,
                     box1(0, 3));
    p.reference = [p]() { return reference_1d(p); };
    return p;
  }
  if (id == "quartic-sep-10d") return quartic_sep_10d();
  if (id == "neglog-sep") return neglog_sep();
  if (id == "ball-quadratic") return ball_quadratic();
  if (id == "logistic-l1") return logistic_l1();
  throw ArgumentError("unknown problem id: " + id);
}

ReferenceSolution certify_reference(const CompositeProblem& prob, const Vec& x) {
  ReferenceSolution r;
  r.x = x;
  r.F = prob.F(x);
  r.residual = prox_residual(prob.psi, x, prob.f->gradient(x));
  return r;
}

ReferenceSolution reference_solution(const CompositeProblem& prob) {
  if (prob.reference) return prob.reference();
  ProxNewtonOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 500;
  const auto res = prox_newton(model_of(*prob.f), prob.psi, prob.x0, opt);
  return certify_reference(prob, res.z);
}

}  // namespace biopt
