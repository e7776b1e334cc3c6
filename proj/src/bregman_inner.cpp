#include "biopt/bregman_inner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"

namespace biopt {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double bisect_decreasing(const std::function<double(double)>& phi, double a, double b) {
  for (int it = 0; it < 4000; ++it) {
    const double m = 0.5 * (a + b);
    if (!(m > a && m < b)) break;
    const double v = phi(m);
    if (v == 0.0) return m;
    if (v > 0) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

ScalingFunction::ScalingFunction(const CompositeProblem& prob, const Vec& anchor, int p, double H)
    : prob_(&prob), y_(anchor), p_(p), H_(H), pp_(p, prob.metric) {
  if (p < 2) throw ArgumentError("scaling function needs p >= 2");
  if (!(H >= 0)) throw ArgumentError("scaling function needs H >= 0");
  if (2 * (p / 2) > prob.f->max_order()) throw CapabilityError("oracle lacks even derivatives up to 2q");
  if (!prob.f->in_domain(anchor)) throw DomainError("scaling anchor outside dom f");
}

double ScalingFunction::poly_value(const Vec& x) const {
  const Vec h = x - y_;
  double v = 0.0;
  for (int k = 1; k <= q(); ++k) v += prob_->f->even_directional(y_, h, 2 * k) / factorial(2 * k);
  return v;
}

Vec ScalingFunction::poly_gradient(const Vec& x) const {
  const Vec h = x - y_;
  Vec g = Vec::Zero(h.size());
  for (int k = 1; k <= q(); ++k) g += prob_->f->even_tensor_vector(y_, h, 2 * k) / factorial(2 * k - 1);
  return g;
}

Mat ScalingFunction::poly_hessian(const Vec& x) const {
  const Vec h = x - y_;
  Mat m = Mat::Zero(h.size(), h.size());
  for (int k = 1; k <= q(); ++k) m += prob_->f->even_tensor_matrix(y_, h, 2 * k) / factorial(2 * k - 2);
  return m;
}

double ScalingFunction::value(const Vec& x) const { return poly_value(x) + H_ * dp1_value(pp_, x - y_); }

Vec ScalingFunction::gradient(const Vec& x) const { return poly_gradient(x) + H_ * dp1_gradient(pp_, x - y_); }

Mat ScalingFunction::hessian(const Vec& x) const { return poly_hessian(x) + H_ * dp1_hessian(pp_, x - y_); }

std::pair<double, Vec> rho_value_grad(const ScalingFunction& sf, const Vec& x) {
  return {sf.value(x), sf.gradient(x)};
}

double bregman_distance(const ScalingFunction& sf, const Vec& x, const Vec& y) {
  return sf.value(y) - sf.value(x) - sf.gradient(x).dot(y - x);
}

RelativeConstants relative_constants(int p, double H, double mp1) {
  if (p < 2) throw ArgumentError("relative constants need p >= 2");
  if (!(H > 0) || !(mp1 > 0)) throw ArgumentError("relative constants need H > 0 and M_{p+1} > 0");
  const double r = factorial(p - 1) * H / mp1;
  const double xi = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * r));
  if (!(xi > 1)) throw ArgumentError("H too small: xi(1+xi) = (p-1)! H / M_{p+1} must exceed 2");
  RelativeConstants rc;
  rc.p = p;
  rc.xi = xi;
  rc.mu = 1 - 1 / xi;
  rc.L = 1 + 1 / xi;
  rc.kappa = (xi - 1) / (xi + 1);
  rc.H = H;
  rc.mp1 = mp1;
  return rc;
}

double bilevel_H(int p, double mp1) { return 6.0 * mp1 / factorial(p - 1); }

double phi_value(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& y, const Vec& z) {
  const double ps = prob.psi.value(z);
  if (!std::isfinite(ps)) return ps;
  return regularized_value(prob, cfg, y, z) + ps;
}

Vec ball_inner_step_p3(const ScalingFunction& sf, const ProxConfig& cfg, double L, const Vec& zi) {
  const CompositeProblem& prob = sf.problem();
  if (sf.p() != 3) throw ArgumentError("ball step is specific to p = 3");
  if (!prob.metric.is_identity()) throw CapabilityError("ball step assumes the identity metric");
  const auto kind = prob.psi.kind();
  if (kind != SimpleTerm::Kind::zero && kind != SimpleTerm::Kind::ball)
    throw CapabilityError("ball step handles psi = zero or a ball");
  const Vec& y = sf.anchor();
  const double H = sf.H();
  const Vec hi = zi - y;
  const Mat q = prob.f->hessian(y);
  const Vec b = q * hi + H * hi.squaredNorm() * hi - regularized_gradient(prob, cfg, y, zi) / (2 * L);

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
  const Vec lam = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  const Vec beta = V.transpose() * b;

  // interior: [Q + H r^2 I] h = b with r = ||h||
  double r = 0.0;
  if (beta.norm() > 0) {
    const auto phi = [&](double s) {
      const Vec d = (lam.array() + H * s * s).matrix();
      if ((d.array() <= 0).any()) return std::numeric_limits<double>::infinity();
      return (beta.array() / d.array()).matrix().norm() - s;
    };
    double top = std::cbrt(beta.norm() / H) * (1 + 1e-12) + 1e-300;
    while (phi(top) > 0) top *= 2;
    r = bisect_decreasing(phi, 0.0, top);
  }
  Vec ht = (beta.array() / (lam.array() + H * r * r)).matrix();
  if (beta.norm() == 0) ht.setZero();
  Vec z = y + V * ht;
  if (kind == SimpleTerm::Kind::zero) return z;
  const Vec& ctr = prob.psi.center();
  const double delta = prob.psi.radius();
  if ((z - ctr).norm() <= delta) return z;

  // boundary: [Q + (H r^2 + alpha) I] h = b - alpha (y - c), ||y + h - c|| = delta
  const Vec e = V.transpose() * (y - ctr);
  const auto residual = [&](double rr, double al, Vec* hout) {
    const Vec w = beta - al * e;
    const Vec d = (lam.array() + H * rr * rr + al).matrix();
    const Vec h = (w.array() / d.array()).matrix();
    if (hout) *hout = h;
    return Eigen::Vector2d(h.squaredNorm() - rr * rr, (e + h).squaredNorm() - delta * delta);
  };
  double worst = 0.0;
  const auto newton = [&](double r) -> std::optional<Vec> {
    double al = 0.0;
    Vec h;
    Eigen::Vector2d F = residual(r, al, &h);
    const double tol = 1e-13 * (1.0 + delta * delta + r * r);
    for (int it = 0; it < 100; ++it) {
      if (std::abs(F(0)) <= tol && std::abs(F(1)) <= tol) return prob.psi.project(Vec(y + V * h));
      const Vec w = beta - al * e;
      const Vec d = (lam.array() + H * r * r + al).matrix();
      const Vec dr = (-2 * H * r * w.array() / d.array().square()).matrix();
      const Vec da = (-e.array() / d.array() - w.array() / d.array().square()).matrix();
      Eigen::Matrix2d J;
      J(0, 0) = 2 * h.dot(dr) - 2 * r;
      J(0, 1) = 2 * h.dot(da);
      J(1, 0) = 2 * (e + h).dot(dr);
      J(1, 1) = 2 * (e + h).dot(da);
      const Eigen::Vector2d step = J.fullPivLu().solve(-F);
      if (!step.allFinite()) break;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const double rn = std::max(0.0, r + t * step(0));
        const double an = std::max(0.0, al + t * step(1));
        Vec hn;
        const Eigen::Vector2d Fn = residual(rn, an, &hn);
        if (Fn.allFinite() && Fn.squaredNorm() < F.squaredNorm()) {
          r = rn;
          al = an;
          h = hn;
          F = Fn;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    worst = std::max(worst, F.norm());
    return std::nullopt;
  };
  for (const double r0 : {hi.norm(), r})
    if (auto out = newton(r0)) return *out;
  throw NumericalError("ball step Newton iteration failed", worst);
}

InnerStep inner_step(const ScalingFunction& sf, const ProxConfig& cfg, double L, const Vec& zi) {
  const CompositeProblem& prob = sf.problem();
  const Vec& y = sf.anchor();
  const Vec gfp = regularized_gradient(prob, cfg, y, zi);
  const Vec c = gfp - 2 * L * sf.gradient(zi);
  Vec z;
  if (prob.dim() == 1) {
    const auto G = [&](double t) { return c(0) + 2 * L * sf.gradient(Vec::Constant(1, t))(0); };
    z = Vec::Constant(1, solve_inclusion_1d(G, prob.psi.coordinate(0, 1), zi(0)));
  } else {
    bool done = false;
    const auto kind = prob.psi.kind();
    if (sf.p() == 3 && prob.metric.is_identity() &&
        (kind == SimpleTerm::Kind::zero || kind == SimpleTerm::Kind::ball)) {
      try {
        z = ball_inner_step_p3(sf, cfg, L, zi);
        done = true;
      } catch (const NumericalError&) {
      }
    }
    if (!done) {
      if (kind != SimpleTerm::Kind::zero && !prob.metric.is_identity())
        throw CapabilityError("composite inner steps assume the identity metric");
      SmoothModel m{[&](const Vec& x) { return c.dot(x) + 2 * L * sf.value(x); },
                    [&](const Vec& x) { return Vec(c + 2 * L * sf.gradient(x)); },
                    [&](const Vec& x) { return Mat(2 * L * sf.hessian(x)); }};
      z = prox_newton(m, prob.psi, zi).z;
    }
  }
  return {z, Vec(-(c + 2 * L * sf.gradient(z)))};
}

std::pair<AcceptanceCertificate, InnerTrace> inner_solve(const ScalingFunction& sf, const ProxConfig& cfg,
                                                         const RelativeConstants& rc, const Vec& y,
                                                         int max_iter) {
  const CompositeProblem& prob = sf.problem();
  if (cfg.p != sf.p() || cfg.H != sf.H() || (sf.anchor() - y).norm() != 0)
    throw ArgumentError("scaling function does not match the inner problem");
  InnerTrace tr;
  InnerRecord r0;
  r0.z = y;
  r0.phi = phi_value(prob, cfg, y, y);
  const Vec gy = prob.f->gradient(y);
  r0.rhs = r0.lhs = std::numeric_limits<double>::quiet_NaN();
  if (prob.psi.is_subgradient(y, -gy, subgradient_tolerance(gy, gy))) {
    auto cert = check_acceptable(prob, cfg, y, y, -gy);
    r0.lhs = cert.lhs;
    r0.rhs = cert.rhs;
    tr.records.push_back(r0);
    tr.certificate = cert;
    return {cert, tr};
  }
  tr.records.push_back(r0);
  Vec z = y;
  AcceptanceCertificate cert;
  for (int i = 1; i <= max_iter; ++i) {
    const InnerStep st = inner_step(sf, cfg, rc.L, z);
    cert = check_acceptable(prob, cfg, y, st.z, st.g);
    InnerRecord rec;
    rec.i = i;
    rec.z = st.z;
    rec.phi = phi_value(prob, cfg, y, st.z);
    rec.bregman_step = bregman_distance(sf, z, st.z);
    rec.lhs = cert.lhs;
    rec.rhs = cert.rhs;
    tr.records.push_back(rec);
    tr.iterations = i;
    z = st.z;
    if (cert.accepted) {
      tr.certificate = cert;
      return {cert, tr};
    }
  }
  throw ConvergenceError("inner solver reached " + std::to_string(max_iter) + " iterations",
                         cert.rhs > 0 ? cert.lhs / cert.rhs : cert.lhs);
}

Vec solve_prox_subproblem(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& y) {
  if (prob.dim() == 1) return Vec::Constant(1, exact_prox_1d(prob, cfg, y(0)).first);
  if (prob.psi.kind() != SimpleTerm::Kind::zero && !prob.metric.is_identity())
    throw CapabilityError("composite prox subproblems assume the identity metric");
  SmoothModel m{[&](const Vec& x) { return regularized_value(prob, cfg, y, x); },
                [&](const Vec& x) { return regularized_gradient(prob, cfg, y, x); },
                [&](const Vec& x) {
                  return Mat(prob.f->hessian(x) + cfg.H * dp1_hessian(PowerProx(cfg.p, prob.metric), x - y));
                }};
  ProxNewtonOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 500;
  return prox_newton(m, prob.psi, y, opt).z;
}

ThetaBound theta_bound(int p, double R, double D1, double Lhat) {
  if (p < 2) throw ArgumentError("theta bound needs p >= 2");
  ThetaBound t;
  t.p = p;
  t.q = p / 2;
  t.R = R;
  t.D1 = D1;
  t.Lhat = Lhat;
  const double q = t.q;
  t.c = std::pow(R, p);
  if (p % 2 == 1) {
    t.a = std::pow(2.0, 2 * q) / (p + 1);
    t.b = std::pow(2.0, 3 * q + 1) / (p + 1) * std::pow(R, q + 1);
    t.d = std::pow(2.0, q) / (p + 1) * std::pow(R, 2 * q + 2);
    t.alpha = 1 + (t.b + 1) / (2 * t.a) * std::pow(t.c, -(q + 1) / q);
    t.beta = 1 + (t.b + 1) / (2 * t.d) * std::pow(t.c, (q + 1) / q);
    t.e = 2 * q + 2;
  } else {
    t.a = std::pow(2.0, 2 * q - 1);
    t.b = std::pow(2.0, (6 * q - 1) / 2) / (p + 1) * std::pow(R, (2 * q + 1) / 2);
    t.d = std::pow(2.0, (2 * q - 1) / 2) / (p + 1) * std::pow(R, 2 * q + 1);
    const double ex = (2 * q + 1) / (2 * (2 * q - 1));
    t.alpha = 1 + (t.b + 1) / (2 * t.a) * std::pow(t.c, -ex);
    t.beta = 1 + (t.b + 1) / (2 * t.d) * std::pow(t.c, ex);
    t.e = 2 * q + 1;
  }
  return t;
}

double closed_form_Lhat(int p, double D1) {
  const double x = 2 * D1 * D1;
  double s = 0.0;
  for (int k = 1; k <= p / 2; ++k) {
    const int m = 2 * k - 1;
    const double geo = std::abs(1 - x) < 1e-14 ? m : (1 - std::pow(x, m)) / (1 - x);
    s += 4 * geo * (std::pow(2.0, m) - 1) / factorial(m);
  }
  return s;
}

SandwichReport relative_sandwich_check(const CompositeProblem& prob, int p, const RelativeConstants& rc,
                                       int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const ProxConfig cfg{p, rc.H, 0.0};
  const PowerProx pp(p, prob.metric);
  SandwichReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.max_hessian_violation = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec yk = prob.sample(rng), x = prob.sample(rng), y = prob.sample(rng);
    const ScalingFunction sf(prob, yk, p, rc.H);
    const double D = regularized_value(prob, cfg, yk, x) - regularized_value(prob, cfg, yk, y) -
                     regularized_gradient(prob, cfg, yk, y).dot(x - y);
    const double br = bregman_distance(sf, y, x);
    rep.max_violation = std::max({rep.max_violation, rc.mu * br - D, D - rc.L * br});

    Vec u(prob.dim());
    for (int j = 0; j < u.size(); ++j) u(j) = nd(rng);
    const double hf = prob.f->hessian_form(x, u) + rc.H * dp1_hessian_form(pp, x - yk, u);
    const double hr = sf.hessian_form(x, u);
    rep.max_hessian_violation = std::max({rep.max_hessian_violation, rc.mu * hr - hf, hf - rc.L * hr});
    ++rep.samples;
  }
  return rep;
}

BracketReport scaling_bracket_check(const CompositeProblem& prob, int p, double xi, int samples,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double M = prob.regularity_bound(p + 1);
  const double H = bilevel_H(p, M);
  const int q = p / 2;
  const SmoothOracle& f = *prob.f;
  BracketReport rep;
  rep.min_rho_form = std::numeric_limits<double>::infinity();
  rep.max_violation = rep.max_violation_literal = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec yk = prob.sample(rng), x = prob.sample(rng);
    const Vec h = x - yk;
    Vec u(prob.dim());
    for (int j = 0; j < u.size(); ++j) u(j) = nd(rng);
    const ScalingFunction sf(prob, yk, p, H);
    rep.min_rho_form = std::min(rep.min_rho_form, sf.hessian_form(x, u) / u.squaredNorm());

    const auto form = [&](int order) { return u.dot(f.tensor_matrix(yk, h, order) * u); };
    double bound = xi * M / factorial(p - 1) * std::pow(primal_norm(prob.metric, h), p - 1) *
                   prob.metric.apply(u).dot(u);
    for (int k = 1; k <= q; ++k) bound += form(2 * k) / (factorial(2 * k - 2) * std::pow(xi, p - 2 * k));
    double odd = 0.0;
    for (int j = 3; j <= p; j += 2) odd += form(j) / (factorial(j - 2) * std::pow(xi, p - j));
    double odd_lit = 0.0;
    for (int k = 1; k <= q; ++k) odd_lit += form(2 * k + 1) / factorial(2 * k - 1);
    rep.max_violation = std::max(rep.max_violation, std::abs(odd) - bound);
    rep.max_violation_literal = std::max(rep.max_violation_literal, std::abs(odd_lit) - bound);
    ++rep.samples;
  }
  return rep;
}

}  // namespace biopt
