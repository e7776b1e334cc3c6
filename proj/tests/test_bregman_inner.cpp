#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"
#include "biopt/outer_solvers.hpp"

using namespace biopt;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// f = 1/2 ||x||^2 in two dimensions
CompositeProblem half_square(const SimpleTerm& psi) {
  CompositeProblem p;
  p.id = "half-square";
  p.f = std::make_shared<SeparableStructured>(Mat::Identity(2, 2), Vec::Zero(2), std::make_shared<Monomial>(2),
                                              Vec::Constant(2, 0.5), Box{Vec::Constant(2, -5), Vec::Constant(2, 5)});
  p.psi = psi;
  p.metric = MetricSpace::identity(2);
  p.x0 = Vec::Zero(2);
  p.region = Box{Vec::Constant(2, -5), Vec::Constant(2, 5)};
  p.bound_floor = 1.0;
  return p;
}

double step_objective(const ScalingFunction& sf, const ProxConfig& cfg, double L, const Vec& zi, const Vec& z) {
  const Vec c = regularized_gradient(sf.problem(), cfg, sf.anchor(), zi) - 2 * L * sf.gradient(zi);
  return c.dot(z) + 2 * L * sf.value(z) + sf.problem().psi.value(z);
}
}  // namespace

TEST_CASE("scaling function values") {
  const CompositeProblem q = make_problem("quartic-1d");
  const ScalingFunction sf(q, v1(1), 3, 72.0);
  CHECK(sf.value(v1(1)) == 0.0);
  CHECK(sf.gradient(v1(1)).norm() == 0.0);
  CHECK(sf.value(v1(2)) == doctest::Approx(24.0));
  // p = 3: 1/2 <hess f(y) h, h> + H d_4(h)
  std::mt19937_64 rng(1);
  const CompositeProblem sep = make_problem("quartic-sep-10d");
  const Vec y = sep.sample(rng), x = sep.sample(rng);
  const ScalingFunction s3(sep, y, 3, 5.0);
  const Vec h = x - y;
  CHECK(s3.value(x) == doctest::Approx(0.5 * sep.f->hessian_form(y, h) + 5.0 * std::pow(h.norm(), 4) / 4));
  const auto [val, grad] = rho_value_grad(s3, x);
  CHECK(val == doctest::Approx(s3.value(x)));
  const double eps = 1e-6;
  for (int j = 0; j < 10; ++j) {
    Vec e = Vec::Zero(10);
    e(j) = eps;
    CHECK((s3.value(x + e) - s3.value(x - e)) / (2 * eps) == doctest::Approx(grad(j)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(ScalingFunction(q, v1(1), 1, 1.0), ArgumentError);
}

TEST_CASE("bregman distance") {
  const CompositeProblem hs = half_square(SimpleTerm::zero());
  const ScalingFunction quad(hs, Vec::Zero(2), 2, 0.0);
  CHECK(bregman_distance(quad, v2(1, 2), v2(1, 2)) == 0.0);
  CHECK(bregman_distance(quad, v2(1, 2), v2(-1, 0.5)) == doctest::Approx(0.5 * (v2(1, 2) - v2(-1, 0.5)).squaredNorm()));
  std::mt19937_64 rng(2);
  for (const char* id : {"neglog-sep", "quartic-sep-10d", "ball-quadratic"}) {
    const CompositeProblem p = make_problem(id);
    for (int p_ord = 3; p_ord <= 5; ++p_ord) {
      for (int s = 0; s < 100; ++s) {
        const ScalingFunction sf(p, p.sample(rng), p_ord, 2.0);
        const Vec x = p.sample(rng), y = p.sample(rng), z = p.sample(rng);
        CHECK(bregman_distance(sf, x, y) >= -1e-12);
        const double lhs = bregman_distance(sf, x, z) - bregman_distance(sf, y, z) + bregman_distance(sf, y, x);
        const double rhs = (sf.gradient(y) - sf.gradient(x)).dot(z - x);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("relative constants") {
  const RelativeConstants rc = relative_constants(3, 3.0, 1.0);
  CHECK(rc.xi == doctest::Approx(2.0));
  CHECK(rc.mu == doctest::Approx(0.5));
  CHECK(rc.L == doctest::Approx(1.5));
  CHECK(rc.kappa == doctest::Approx(1.0 / 3));
  CHECK(relative_constants(5, 0.25, 1.0).xi == doctest::Approx(2.0));
  CHECK(bilevel_H(5, 1.0) == doctest::Approx(0.25));
  double prev = 0.0;
  for (double H : {10.0, 100.0, 1e4, 1e8}) {
    const RelativeConstants r = relative_constants(4, H, 1.0);
    CHECK(r.xi * (1 + r.xi) == doctest::Approx(6.0 * H).epsilon(1e-12));
    CHECK(0 < r.mu);
    CHECK(r.mu < 1);
    CHECK(1 < r.L);
    CHECK(r.L < 2);
    CHECK(r.kappa > prev);
    CHECK(r.kappa < 1);
    prev = r.kappa;
  }
  CHECK(prev > 0.999);
  CHECK_THROWS_AS(relative_constants(3, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(relative_constants(3, 0.5, 1.0), ArgumentError);
}

TEST_CASE("inner step at a stationary interior point") {
  const CompositeProblem q = make_problem("quartic-1d");
  const ProxConfig cfg = make_prox_config(3, 72.0, 1.0 / 3);
  const ScalingFunction sf(q, v1(0), 3, 72.0);
  const InnerStep st = inner_step(sf, cfg, 1.5, v1(0));
  CHECK(st.z(0) == 0.0);
  CHECK(st.g(0) == 0.0);
}

TEST_CASE("ball step interior case solves the scalar cubic") {
  const double L = 1.5, H = 1.0;
  for (double c : {0.3, 1.0, 4.0}) {
    const CompositeProblem hs = half_square(SimpleTerm::ball(Vec::Zero(2), 100.0));
    const Vec y = v2(-2 * L * c, 0.0);
    const ProxConfig cfg = make_prox_config(3, H, 1.0 / 3);
    const ScalingFunction sf(hs, y, 3, H);
    const Vec z = ball_inner_step_p3(sf, cfg, L, y);
    const double r = (z - y).norm();
    CHECK(r * (1 + r * r) == doctest::Approx(c).epsilon(1e-12));
    CHECK(std::abs((z - y)(1)) < 1e-14);
    CHECK((z - y)(0) > 0);
  }
  const CompositeProblem hs = half_square(SimpleTerm::ball(Vec::Zero(2), 1.0));
  const ScalingFunction sf(hs, v2(0, 0), 3, 1.0);
  const Vec z = ball_inner_step_p3(sf, make_prox_config(3, 1.0, 1.0 / 3), L, v2(0, 0));
  CHECK(z.norm() == 0.0);
}

TEST_CASE("ball step boundary case") {
  const double L = 1.5;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  int boundary = 0;
  for (int s = 0; s < 50; ++s) {
    const Vec ctr = v2(0.1, -0.2);
    const double delta = 0.15;
    CompositeProblem p = make_problem("ball-quadratic");
    p.psi = SimpleTerm::ball(Vec::Zero(3) + Vec::Constant(3, 0.1), delta);
    const Vec y = p.psi.center() + Vec::Constant(3, u(rng)).cwiseProduct(Vec::Random(3)) * 0.5;
    const ProxConfig cfg = make_prox_config(3, 3.0, 1.0 / 3);
    const ScalingFunction sf(p, y, 3, 3.0);
    const Vec zi = p.psi.project(y + 0.3 * Vec::Random(3));
    const Vec z = ball_inner_step_p3(sf, cfg, L, zi);
    CHECK(p.psi.contains(z, 1e-12));
    const Vec c = regularized_gradient(p, cfg, y, zi) - 2 * L * sf.gradient(zi);
    const Vec g = -(c + 2 * L * sf.gradient(z));
    CHECK(p.psi.is_subgradient(z, g, 1e-9));
    if (std::abs((z - p.psi.center()).norm() - delta) < 1e-10) {
      ++boundary;
      CHECK(g.dot(z - p.psi.center()) >= -1e-9);
    }
    const Vec zg = prox_newton({[&](const Vec& x) { return c.dot(x) + 2 * L * sf.value(x); },
                                [&](const Vec& x) { return Vec(c + 2 * L * sf.gradient(x)); },
                                [&](const Vec& x) { return Mat(2 * L * sf.hessian(x)); }},
                               p.psi, zi)
                       .z;
    CHECK(step_objective(sf, cfg, L, zi, z) <= step_objective(sf, cfg, L, zi, zg) + 1e-10);
    CHECK((z - zg).norm() < 1e-6);
  }
  CHECK(boundary > 10);
}

TEST_CASE("one-dimensional inner step matches a grid minimization") {
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const ProxConfig cfg = make_prox_config(3, 72.0, 1.0 / 3);
  for (double y : {1.0, 0.4, -0.7}) {
    const ScalingFunction sf(q, v1(y), 3, 72.0);
    for (double zi : {y, 0.5 * y, 0.0}) {
      const InnerStep st = inner_step(sf, cfg, 1.5, v1(zi));
      const double lo = -2, hi = 2, cell = (hi - lo) / 1e5;
      double best = 1e300, arg = 0;
      for (int i = 0; i <= 100000; ++i) {
        const double z = lo + cell * i;
        const double v = step_objective(sf, cfg, 1.5, v1(zi), v1(z));
        if (v < best) {
          best = v;
          arg = z;
        }
      }
      CHECK(std::abs(st.z(0) - arg) <= cell);
      CHECK(q.psi.is_subgradient(st.z, st.g, 1e-12));
    }
  }
}

TEST_CASE("inner solve") {
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const ProxConfig cfg = make_prox_config(3, 72.0, 1.0 / 3);
  const RelativeConstants rc = relative_constants(3, 72.0, 24.0);
  {
    const ScalingFunction sf(q, v1(0), 3, 72.0);
    const auto [cert, tr] = inner_solve(sf, cfg, rc, v1(0), 10);
    CHECK(tr.iterations == 0);
    CHECK(cert.rhs == 0.0);
    CHECK(cert.accepted);
  }
  for (double y : {1.0, -0.5, 0.05}) {
    const ScalingFunction sf(q, v1(y), 3, 72.0);
    const auto [cert, tr] = inner_solve(sf, cfg, rc, v1(y), 100);
    CHECK(cert.accepted);
    CHECK(tr.iterations >= 1);
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      CHECK(tr.records[i].phi <= tr.records[i - 1].phi - rc.L * tr.records[i].bregman_step + 1e-10);
      CHECK(tr.records[i].phi <= tr.records[i - 1].phi);
    }
  }
  const ScalingFunction sf(q, v1(1), 3, 72.0);
  CHECK_THROWS_AS(inner_solve(sf, make_prox_config(3, 72.0, 0.0), rc, v1(1), 2), ConvergenceError);
}

TEST_CASE("theta bound constants") {
  const ThetaBound t = theta_bound(3, 1.0, 0.5, 2.0);
  CHECK(t.a == doctest::Approx(1.0));
  CHECK(t.b == doctest::Approx(4.0));
  CHECK(t.c == doctest::Approx(1.0));
  CHECK(t.d == doctest::Approx(0.5));
  CHECK(t.e == 4);
  CHECK(t(0.0) == doctest::Approx(t.beta * t.d));
  CHECK(t(0.0) > 0);
  CHECK(theta_bound(4, 1.0, 0.5, 2.0).e == 5);
  CHECK_THROWS_AS(theta_bound(1, 1.0, 0.5, 1.0), ArgumentError);
  CHECK(closed_form_Lhat(3, 0.5) > 0);
  CHECK(closed_form_Lhat(3, 1.0 / std::sqrt(2.0)) == doctest::Approx(4.0));
  {
    const double x = 2 * 0.81;
    const double expect = 4.0 * 1 + 4.0 * (1 - x * x * x) / (1 - x) * 7 / 6;
    CHECK(closed_form_Lhat(5, 0.9) == doctest::Approx(expect));
    CHECK(closed_form_Lhat(5, 0.9) > 0);
  }
}

TEST_CASE("relative sandwich") {
  const CompositeProblem bq = make_problem("ball-quadratic");
  const double M = bq.regularity_bound(4);
  const SandwichReport r = relative_sandwich_check(bq, 3, relative_constants(3, bilevel_H(3, M), M), 500, 1);
  CHECK(r.samples == 500);
  CHECK(r.max_violation < 0);
  const CompositeProblem nl = make_problem("neglog-sep");
  for (int p = 3; p <= 5; ++p) {
    const double m = nl.regularity_bound(p + 1);
    const SandwichReport s = relative_sandwich_check(nl, p, relative_constants(p, bilevel_H(p, m), m), 1000, 2);
    CHECK(s.max_violation <= 1e-8);
    CHECK(s.max_hessian_violation <= 1e-8);
  }
}
