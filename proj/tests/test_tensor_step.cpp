#include <doctest.h>

#include <cmath>
#include <random>

#include "biopt/errors.hpp"
#include "biopt/tensor_step.hpp"

using namespace biopt;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
}  // namespace

TEST_CASE("taylor and augmented models") {
  const CompositeProblem q = make_problem("quartic-1d");
  const TaylorModel tm = make_taylor_model(q, v1(1), 3, 48.0);
  CHECK(taylor_value_grad(tm, v1(2)).first == doctest::Approx(15.0));
  CHECK(augmented_value_grad(tm, v1(2)).first == doctest::Approx(17.0));
  const auto at = taylor_value_grad(tm, v1(1));
  CHECK(at.first == doctest::Approx(1.0));
  CHECK(at.second(0) == doctest::Approx(4.0));
  CHECK(augmented_value_grad(tm, v1(1)).first == doctest::Approx(1.0));
  // Taylor expansion of t^4 at 1 to order 3 misses only (y-1)^4
  CHECK(taylor_value_grad(tm, v1(3)).second(0) == doctest::Approx(4.0 * 27 - 4.0 * 8));

  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  for (int p : {1, 2, 4}) {
    const TaylorModel tl = make_taylor_model(lin, v1(0.3), p, 1.0);
    CHECK(taylor_value_grad(tl, v1(2.5)).first == doctest::Approx(2.5));
  }
}

TEST_CASE("tensor step on a linear objective") {
  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  const TaylorModel tm = make_taylor_model(lin, v1(5.0), 3, 6.0);
  const TensorStep st = tensor_step_1d(tm, SimpleTerm::zero(), 0.1);
  CHECK(st.T == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(st.criterion_ok);
  CHECK(st.lhs <= 1e-12);
}

TEST_CASE("tensor step at model stationarity") {
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const TensorStep st = tensor_step_1d(make_taylor_model(q, v1(0), 3, 72.0), q.psi, 0.2);
  CHECK(st.T == 0.0);
  CHECK(st.criterion_ok);
  CHECK(tensor_residual_bound_check(q, 3, v1(0), v1(st.T), v1(st.g), 72.0, 0.2, 24.0));
}

TEST_CASE("acceptance parameter map") {
  const auto [M, H] = tensor_acceptance_map(3, 0.9, 8.0 / 19.0, 24.0);
  CHECK(M == doctest::Approx(456.0));
  CHECK(H == doctest::Approx(76.0));
  CHECK(tensor_residual_factor(24.0, M, 8.0 / 19.0) == doctest::Approx(0.9));
  CHECK(tensor_acceptance_map(3, 0.999, 0.0, 1.0).first == doctest::Approx(1.999 / 0.999));
  CHECK((11.0 / 19.0) * 1.9 * 24.0 > 24.0);
  CHECK(tensor_residual_factor(24.0, 1.9 * 24.0, 8.0 / 19.0) == doctest::Approx(18.0));
  CHECK_THROWS_AS(tensor_acceptance_map(3, 0.9, 0.5, 24.0), ArgumentError);
  CHECK_THROWS_AS(tensor_acceptance_map(3, 1.0, 0.1, 24.0), ArgumentError);
  CHECK_THROWS_AS(tensor_residual_factor(24.0, 20.0, 0.1), ArgumentError);
}

TEST_CASE("quartic plus absolute value: tensor step with M = 1.9 M4") {
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const double mp1 = q.regularity_bound(4), M = 1.9 * mp1, gamma = 8.0 / 19.0;
  const TaylorModel tm = make_taylor_model(q, v1(0.8), 3, M);
  const TensorStep st = tensor_step_1d(tm, q.psi, gamma);
  CHECK(st.criterion_ok);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 20000; ++i) {
    const Vec T = v1(-0.5 + 1.5 * i / 20000.0);
    const Vec g = q.psi.select_subgradient(T, -augmented_value_grad(tm, T).second);
    if (!tensor_criterion(tm, T, g, gamma).criterion_ok) continue;
    lo = std::min(lo, T(0));
    hi = std::max(hi, T(0));
    CHECK(tensor_residual_bound_check(q, 3, v1(0.8), T, g, M, gamma, mp1));
  }
  CHECK(lo <= st.T);
  CHECK(st.T <= hi);
}

TEST_CASE("tensor criterion implies acceptance under the parameter map") {
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const double mp1 = 24.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double beta : {0.2, 0.5, 0.9}) {
    for (double frac : {0.0, 0.5, 0.9}) {
      const double gamma = frac * beta / (1 + beta);
      const auto [M, H] = tensor_acceptance_map(3, beta, gamma, mp1);
      const ProxConfig cfg = make_prox_config(3, H, beta);
      for (int s = 0; s < 100; ++s) {
        const Vec x = v1(u(rng));
        const TensorStep st = tensor_step_1d(make_taylor_model(q, x, 3, M), q.psi, gamma);
        REQUIRE(st.criterion_ok);
        CHECK(check_acceptable(q, cfg, x, v1(st.T), v1(st.g)).accepted);
      }
    }
  }
}

TEST_CASE("model gradient bound and composite model convexity") {
  std::mt19937_64 rng(9);
  for (const auto& id : problem_ids()) {
    const CompositeProblem p = make_problem(id);
    const double M = p.regularity_bound(4);
    for (int s = 0; s < 200; ++s) {
      const Vec x = p.sample(rng), y = p.sample(rng);
      const TaylorModel tm = make_taylor_model(p, x, 3, M);
      const double lhs = dual_norm(p.metric, p.grad(y) - taylor_value_grad(tm, y).second);
      INFO(id);
      CHECK(lhs <= M / 6.0 * std::pow(primal_norm(p.metric, y - x), 3) + 1e-10 * std::max(1.0, lhs));
    }
  }
  const CompositeProblem q = make_problem("quartic-1d");
  for (double x : {-1.0, 0.3, 1.7}) {
    const TaylorModel tm = make_taylor_model(q, v1(x), 3, 3 * 24.0);
    double prev = -1e300;
    for (int i = 0; i <= 1000; ++i) {
      const double g = augmented_value_grad(tm, v1(-3.0 + 6.0 * i / 1000.0)).second(0);
      CHECK(g >= prev);
      prev = g;
    }
  }
}
