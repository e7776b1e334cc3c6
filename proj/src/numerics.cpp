#include "biopt/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "biopt/errors.hpp"

namespace biopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bisect(const std::function<double(double)>& phi, double a, double b) {
  double fa = phi(a), fb = phi(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  for (int it = 0; it < 4000; ++it) {
    const double m = 0.5 * (a + b);
    if (!(m > a && m < b)) break;
    const double fm = phi(m);
    if (fm == 0.0) return m;
    if (fm > 0) { b = m; fb = fm; }
    else { a = m; fa = fm; }
  }
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

}  // namespace

double solve_inclusion_1d(const std::function<double(double)>& G, const ScalarPsi& psi, double start) {
  double left = psi.lo, right = psi.hi;
  for (double b : psi.breakpoints()) {
    const double v = G(b);
    const auto [gl, gu] = psi.subdifferential(b);
    if (-v >= gl && -v <= gu) return b;
    if (v + gu < 0) left = std::max(left, b);
    else right = std::min(right, b);
  }
  const double mid = std::isfinite(left) && std::isfinite(right) ? 0.5 * (left + right)
                     : std::isfinite(left)                         ? left + 1.0
                     : std::isfinite(right)                        ? right - 1.0
                                                                   : start;
  const double sgn = psi.lambda > 0 ? (mid > 0 ? 1.0 : -1.0) : 0.0;
  const auto phi = [&](double t) { return G(t) + psi.lambda * sgn; };

  double a = left, b = right;
  if (!std::isfinite(a)) {
    const double anchor = std::isfinite(b) ? b : std::clamp(start, -1e10, 1e10);
    double step = std::max(1.0, std::abs(anchor));
    a = anchor - step;
    while (phi(a) > 0) {
      step *= 2;
      a = anchor - step;
      if (std::abs(a) > 1e10) throw NumericalError("inclusion bracketing failed", a);
    }
  }
  if (!std::isfinite(b)) {
    const double anchor = std::max(a, std::clamp(start, -1e10, 1e10));
    double step = std::max(1.0, std::abs(anchor));
    b = anchor + step;
    while (phi(b) < 0) {
      step *= 2;
      b = anchor + step;
      if (std::abs(b) > 1e10) throw NumericalError("inclusion bracketing failed", b);
    }
  }
  return bisect(phi, a, b);
}

double prox_residual(const SimpleTerm& psi, const Vec& z, const Vec& grad) {
  return (z - psi.prox(grad, z, 1.0)).norm();
}

Vec trust_region_solve(const Mat& q, const Vec& b, double radius) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
  const Vec& lam = es.eigenvalues();
  const Vec beta = es.eigenvectors().transpose() * b;
  const auto w_of = [&](double mu) { return Vec(-(beta.array() / (lam.array() + mu)).matrix()); };
  const double lmin = lam.minCoeff();
  if (lmin > 0) {
    const Vec w0 = w_of(0.0);
    if (w0.norm() <= radius) return es.eigenvectors() * w0;
  }
  double lo = std::max(0.0, -lmin);
  double hi = lo + b.norm() / radius + 1.0;
  while (w_of(hi).norm() > radius) hi *= 2;
  for (int it = 0; it < 3000; ++it) {
    const double m = 0.5 * (lo + hi);
    if (!(m > lo && m < hi)) break;
    if (w_of(m).norm() > radius) lo = m;
    else hi = m;
  }
  const double mu = hi;
  Vec w = w_of(mu);
  if (!w.allFinite()) throw NumericalError("trust-region secular solve failed");
  return es.eigenvectors() * w;
}

Vec separable_quadratic_prox(const Mat& q, const Vec& g, const Vec& z, const SimpleTerm& psi) {
  const int n = static_cast<int>(z.size());
  Vec w = psi.project(z);
  Vec r = q * (w - z) + g;  // gradient of the quadratic at w
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (int j = 0; j < n; ++j) {
      const ScalarPsi s = psi.coordinate(j, n);
      const double qjj = q(j, j);
      const double bj = r(j) - qjj * w(j);
      double t = -bj / qjj;
      const double thr = s.lambda / qjj;
      t = t > thr ? t - thr : (t < -thr ? t + thr : 0.0);
      t = std::clamp(t, s.lo, s.hi);
      const double d = t - w(j);
      if (d != 0.0) {
        r += q.col(j) * d;
        w(j) = t;
        change = std::max(change, std::abs(d));
      }
    }
    if (change <= 1e-16 * (1.0 + w.lpNorm<Eigen::Infinity>())) break;
  }
  return w;
}

ProxNewtonResult prox_newton(const SmoothModel& s, const SimpleTerm& psi, const Vec& z0,
                             const ProxNewtonOptions& opt) {
  const auto total = [&](const Vec& z) {
    const double p = psi.value(z);
    if (!std::isfinite(p)) return kInf;
    try {
      return s.value(z) + p;
    } catch (const DomainError&) {
      return kInf;
    }
  };
  ProxNewtonResult res;
  Vec z = psi.project(z0);
  double fz = total(z);
  if (!std::isfinite(fz)) throw NumericalError("proximal Newton start outside the domain");
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vec g = s.gradient(z);
    const double r = prox_residual(psi, z, g);
    res.z = z;
    res.residual = r;
    res.iterations = it;
    if (r <= opt.tol * std::max(1.0, g.norm())) return res;

    Mat q = s.hessian(z);
    q = 0.5 * (q + q.transpose());
    const double scale = std::max(1.0, q.diagonal().cwiseAbs().maxCoeff());
    q.diagonal().array() += std::min(r, 1.0) * scale * 1e-3 + 1e-14 * scale;

    Vec w;
    switch (psi.kind()) {
      case SimpleTerm::Kind::zero: w = z - q.ldlt().solve(g); break;
      case SimpleTerm::Kind::ball: {
        const Vec zc = z - psi.center();
        w = psi.center() + trust_region_solve(q, g - q * zc, psi.radius());
        break;
      }
      default: w = separable_quadratic_prox(q, g, z, psi);
    }
    const Vec d = w - z;
    const double pred = g.dot(d) + psi.value(w) - psi.value(z);
    double t = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec zt = z + t * d;
      const double ft = total(zt);
      if (ft <= fz + 1e-4 * t * pred || (t == 1.0 && std::isfinite(ft) &&
                                         std::abs(pred) <= 1e-15 * (1.0 + std::abs(fz)))) {
        z = zt;
        fz = ft;
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      if (r <= 1e-9 * std::max(1.0, g.norm())) return res;
      throw NumericalError("proximal Newton line search failed", r);
    }
  }
  const Vec g = s.gradient(z);
  res.z = z;
  res.residual = prox_residual(psi, z, g);
  res.iterations = opt.max_iter;
  if (res.residual <= opt.tol * std::max(1.0, g.norm())) return res;
  throw NumericalError("proximal Newton did not converge in " + std::to_string(opt.max_iter) +
                           " iterations",
                       res.residual);
}

}  // namespace biopt
