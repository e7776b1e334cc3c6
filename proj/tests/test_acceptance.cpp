#include <doctest.h>

#include <cmath>
#include <random>

#include "biopt/bregman_inner.hpp"
#include "biopt/errors.hpp"

using namespace biopt;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
}  // namespace

TEST_CASE("prox config validation") {
  CHECK_THROWS_AS(make_prox_config(0, 1.0, 0.1), ArgumentError);
  CHECK_THROWS_AS(make_prox_config(3, 0.0, 0.1), ArgumentError);
  CHECK_THROWS_AS(make_prox_config(3, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_prox_config(3, 1.0, -0.1), ArgumentError);
  CHECK(make_prox_config(3, 1.0, 1.0 / 3).beta_within_inverse_p());
  CHECK_FALSE(make_prox_config(3, 1.0, 0.5).beta_within_inverse_p());
}

TEST_CASE("regularized gradient") {
  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  CHECK(regularized_gradient(lin, make_prox_config(3, 1.0, 0.0), v1(0), v1(2))(0) == doctest::Approx(9.0));
  const CompositeProblem q = make_problem("quartic-abs-1d");
  CHECK(regularized_gradient(q, make_prox_config(3, 3.0, 0.0), v1(1), v1(1))(0) == doctest::Approx(4.0));
}

TEST_CASE("exact 1d prox") {
  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  const auto [T, g] = exact_prox_1d(lin, make_prox_config(3, 1.0, 0.85), 1.4);
  CHECK(T == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(g == 0.0);
  const CompositeProblem q = make_problem("quartic-abs-1d");
  for (double H : {0.5, 3.0, 40.0})
    for (int p : {1, 2, 3, 5}) CHECK(exact_prox_1d(q, make_prox_config(p, H, 0.0), 0.0).first == 0.0);
}

TEST_CASE("acceptance test on the linear objective over the nonnegative axis") {
  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  const ProxConfig cfg = make_prox_config(3, 1.0, 0.85);
  CHECK(check_acceptable(lin, cfg, v1(1.4), v1(0.5), v1(0)).accepted);
  const AcceptanceCertificate same = check_acceptable(lin, cfg, v1(1.4), v1(1.4), v1(0));
  CHECK_FALSE(same.accepted);
  CHECK(same.lhs == doctest::Approx(same.rhs));
  CHECK_THROWS_AS(check_acceptable(lin, cfg, v1(1.4), v1(0.5), v1(-1)), CertificateError);

  const Interval iv = acceptable_interval_1d(cfg, 1.4, 0.0);
  CHECK_FALSE(iv.empty);
  CHECK(iv.lo == doctest::Approx(1.4 - std::cbrt(1.85)));
  CHECK(iv.hi == doctest::Approx(1.4 - std::cbrt(0.15)));
  CHECK(iv.lo == doctest::Approx(0.17239).epsilon(1e-4));
  CHECK(iv.hi == doctest::Approx(0.86871).epsilon(1e-4));
  const Interval exact = acceptable_interval_1d(make_prox_config(3, 1.0, 0.0), 2.0, 0.0);
  CHECK(exact.lo == doctest::Approx(1.0));
  CHECK(exact.hi == doctest::Approx(1.0));
  CHECK(acceptable_interval_1d(make_prox_config(3, 1.0, 0.0), 0.5, 0.0).empty);
  const Interval far = acceptable_interval_1d(cfg, 10.0, 0.0);
  CHECK(far.lo > 0.0);
  CHECK(far.hi < 10.0);

  for (double xbar : {1.4, 3.0, 10.0}) {
    const Interval ref = acceptable_interval_1d(cfg, xbar, 0.0);
    const double step = (xbar + 1.0) / 9999.0;
    double lo = 1e300, hi = -1e300;
    for (const auto& s : scan_acceptance_1d(lin, cfg, xbar, 0.0, xbar + 1.0, 10000)) {
      if (s.T > 0 && s.accepted) {
        lo = std::min(lo, s.T);
        hi = std::max(hi, s.T);
      }
    }
    CHECK(std::abs(lo - ref.lo) <= step);
    CHECK(std::abs(hi - ref.hi) <= step);
  }
}

TEST_CASE("certificate inequalities") {
  const CompositeProblem lin = make_problem("linear-nonneg-1d");
  const ProxConfig cfg = make_prox_config(3, 1.0, 0.85);
  const Interval iv = acceptable_interval_1d(cfg, 1.4, 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double T = iv.lo + (iv.hi - iv.lo) * i / 100.0;
    const auto cert = check_acceptable(lin, cfg, v1(1.4), v1(T), v1(0));
    REQUIRE(cert.accepted);
    const auto ch = certificate_inequalities(cert, cfg, lin.metric);
    CHECK(ch.first);
    CHECK(ch.second);
    CHECK_FALSE(ch.third_applies);
  }
  const CompositeProblem q = make_problem("quartic-abs-1d");
  const ProxConfig c3 = make_prox_config(3, 2.0, 1.0 / 3);
  const auto stat = check_acceptable(q, c3, v1(0), v1(0), v1(0));
  CHECK(stat.accepted);
  CHECK(certificate_inequalities(stat, c3, q.metric).all());
}

TEST_CASE("exact solutions are accepted at every beta") {
  std::mt19937_64 rng(21);
  for (const auto& id : problem_ids()) {
    const CompositeProblem prob = make_problem(id);
    INFO(id);
    for (int s = 0; s < 50; ++s) {
      const Vec xbar = prob.psi.project(prob.sample(rng));
      for (double H : {1.0, 10.0}) {
        const ProxConfig base = make_prox_config(3, H, 0.0);
        Vec T, g;
        if (prob.dim() == 1) {
          const auto [t, gg] = exact_prox_1d(prob, base, xbar(0));
          T = v1(t);
          g = v1(gg);
        } else {
          T = solve_prox_subproblem(prob, base, xbar);
          g = prob.psi.select_subgradient(T, -regularized_gradient(prob, base, xbar, T));
        }
        for (double beta : {0.0, 0.1, 1.0 / 3}) {
          const ProxConfig cfg = make_prox_config(3, H, beta);
          const auto cert = check_acceptable(prob, cfg, xbar, T, g);
          CHECK(cert.accepted);
          CHECK(certificate_inequalities(cert, cfg, prob.metric).all());
        }
      }
    }
  }
}
