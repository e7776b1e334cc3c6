#include "biopt/power_prox.hpp"

#include <cmath>
#include <string>

#include "biopt/errors.hpp"

namespace biopt {

MetricSpace MetricSpace::identity(int n) {
  if (n <= 0) throw ArgumentError("metric dimension must be positive");
  MetricSpace m;
  m.kind_ = Kind::identity;
  m.n_ = n;
  return m;
}

MetricSpace MetricSpace::diagonal(const Vec& w) {
  if (w.size() == 0) throw ArgumentError("metric dimension must be positive");
  if ((w.array() <= 0.0).any()) throw ArgumentError("diagonal metric needs positive weights");
  MetricSpace m;
  m.kind_ = Kind::diagonal;
  m.n_ = static_cast<int>(w.size());
  m.w_ = w;
  return m;
}

MetricSpace MetricSpace::dense(const Mat& b) {
  if (b.rows() == 0 || b.rows() != b.cols()) throw ArgumentError("metric must be square");
  if (!b.isApprox(b.transpose(), 1e-12)) throw ArgumentError("metric must be symmetric");
  MetricSpace m;
  m.kind_ = Kind::dense;
  m.n_ = static_cast<int>(b.rows());
  m.b_ = 0.5 * (b + b.transpose());
  m.llt_.compute(m.b_);
  if (m.llt_.info() != Eigen::Success) throw ArgumentError("metric must be positive definite");
  return m;
}

void MetricSpace::check_dim(const Vec& x) const {
  if (x.size() != n_)
    throw ArgumentError("dimension mismatch: expected " + std::to_string(n_) + ", got " +
                        std::to_string(x.size()));
}

Vec MetricSpace::apply(const Vec& x) const {
  check_dim(x);
  switch (kind_) {
    case Kind::identity: return x;
    case Kind::diagonal: return w_.cwiseProduct(x);
    default: return b_ * x;
  }
}

Vec MetricSpace::solve(const Vec& g) const {
  check_dim(g);
  switch (kind_) {
    case Kind::identity: return g;
    case Kind::diagonal: return g.cwiseQuotient(w_);
    default: return llt_.solve(g);
  }
}

Mat MetricSpace::matrix() const {
  switch (kind_) {
    case Kind::identity: return Mat::Identity(n_, n_);
    case Kind::diagonal: return w_.asDiagonal();
    default: return b_;
  }
}

double primal_norm(const MetricSpace& m, const Vec& x) {
  return std::sqrt(std::max(0.0, m.apply(x).dot(x)));
}

double dual_norm(const MetricSpace& m, const Vec& g) {
  return std::sqrt(std::max(0.0, m.solve(g).dot(g)));
}

PowerProx::PowerProx(int p, MetricSpace metric) : p(p), metric(std::move(metric)) {
  if (p < 1) throw ArgumentError("power prox order must be >= 1");
}

double dp1_value(const PowerProx& pp, const Vec& h) {
  return std::pow(primal_norm(pp.metric, h), pp.p + 1) / (pp.p + 1);
}

Vec dp1_gradient(const PowerProx& pp, const Vec& h) {
  const double r = primal_norm(pp.metric, h);
  if (r == 0.0) return Vec::Zero(h.size());
  return std::pow(r, pp.p - 1) * pp.metric.apply(h);
}

double dp1_hessian_form(const PowerProx& pp, const Vec& h, const Vec& u) {
  const Vec bu = pp.metric.apply(u);
  const double r = primal_norm(pp.metric, h);
  if (pp.p == 1) return bu.dot(u);
  if (r == 0.0) return 0.0;
  const double bhu = pp.metric.apply(h).dot(u);
  return std::pow(r, pp.p - 1) * bu.dot(u) + (pp.p - 1) * std::pow(r, pp.p - 3) * bhu * bhu;
}

Mat dp1_hessian(const PowerProx& pp, const Vec& h) {
  const Mat b = pp.metric.matrix();
  if (pp.p == 1) return b;
  const double r = primal_norm(pp.metric, h);
  if (r == 0.0) return Mat::Zero(h.size(), h.size());
  const Vec bh = b * h;
  return std::pow(r, pp.p - 1) * b + (pp.p - 1) * std::pow(r, pp.p - 3) * bh * bh.transpose();
}

double dp1_uniform_convexity(int p) { return std::pow(0.5, p - 1) / (p + 1); }

}  // namespace biopt
