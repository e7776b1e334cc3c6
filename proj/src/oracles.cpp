#include "biopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biopt/errors.hpp"

namespace biopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double falling(int m, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (m - i);
  return r;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

void SmoothOracle::check_order(int k) const {
  if (k < 0 || k > max_order())
    throw CapabilityError(name() + ": derivative order " + std::to_string(k) + " unavailable");
}

double SmoothOracle::even_directional(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return directional(x, h, order);
}

Vec SmoothOracle::even_tensor_vector(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return tensor_vector(x, h, order);
}

Mat SmoothOracle::even_tensor_matrix(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return tensor_matrix(x, h, order);
}

EvenTensorAction even_tensor_action(const SmoothOracle& o, const Vec& y, const Vec& h, int order,
                                    const Vec& u) {
  if (order <= 0 || order % 2 != 0) throw ArgumentError("even tensor action needs a positive even order");
  const Vec act = o.even_tensor_matrix(y, h, order) * u;
  return {act.dot(u), act};
}

// ---------------------------------------------------------------- scalar families

std::optional<double> Linear::sup_abs(int order, double lo, double hi) const {
  if (order >= 2) return 0.0;
  if (order == 1) return 1.0;
  if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
  return std::max(std::abs(lo), std::abs(hi));
}

double NegLog::derivative(double t, int order) const {
  if (order == 0) return -std::log(t);
  const double s = (order % 2 == 0) ? 1.0 : -1.0;
  return s * factorial(order - 1) / ipow(t, order);
}

double NegLog::even_derivative(double t, int order) const {
  if (order % 2 != 0) throw ArgumentError("even derivative requested with odd order");
  const double f2 = derivative(t, 2);
  if (order == 2) return f2;
  return factorial(order - 1) * ipow(f2, order / 2);
}

std::optional<double> NegLog::sup_abs(int order, double lo, double /*hi*/) const {
  if (order < 1 || !(lo > 0.0)) return std::nullopt;
  return 1.1 * factorial(order - 1) / ipow(lo, order);
}

Monomial::Monomial(int m) : m_(m) {
  if (m < 2 || m % 2 != 0) throw ArgumentError("monomial family needs an even exponent >= 2");
}

std::string Monomial::name() const { return m_ == 4 ? "quartic" : "power" + std::to_string(m_); }

double Monomial::derivative(double t, int order) const {
  if (order > m_) return 0.0;
  return falling(m_, order) * ipow(t, m_ - order);
}

std::optional<double> Monomial::sup_abs(int order, double lo, double hi) const {
  if (order > m_) return 0.0;
  if (order == m_) return factorial(m_);
  if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
  return falling(m_, order) * ipow(std::max(std::abs(lo), std::abs(hi)), m_ - order);
}

const std::vector<double>& Logistic::poly(int order) const {
  if (poly_.empty()) poly_.push_back({0.0, 1.0});  // f' = s
  while (static_cast<int>(poly_.size()) < order) {
    const auto& p = poly_.back();
    // d/dt P(s) = P'(s) s (1 - s)
    std::vector<double> dp(p.size() + 1, 0.0);
    for (size_t i = 1; i < p.size(); ++i) {
      const double c = i * p[i];
      dp[i] += c;
      dp[i + 1] -= c;
    }
    poly_.push_back(dp);
  }
  return poly_[order - 1];
}

double Logistic::derivative(double t, int order) const {
  if (order == 0) return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  const auto& p = poly(order);
  const double s = sigmoid(t);
  double r = 0.0;
  for (size_t i = p.size(); i-- > 0;) r = r * s + p[i];
  return r;
}

std::optional<double> Logistic::sup_abs(int order, double lo, double hi) const {
  if (order == 0) {
    if (!std::isfinite(hi)) return std::nullopt;
    return derivative(hi, 0);
  }
  const auto& p = poly(order);
  const double s0 = std::isfinite(lo) ? sigmoid(lo) : 0.0;
  const double s1 = std::isfinite(hi) ? sigmoid(hi) : 1.0;
  double best = 0.0;
  const int n = 4000;
  for (int j = 0; j <= n; ++j) {
    const double s = s0 + (s1 - s0) * j / n;
    double r = 0.0;
    for (size_t i = p.size(); i-- > 0;) r = r * s + p[i];
    best = std::max(best, std::abs(r));
  }
  return 1.1 * best;
}

// ---------------------------------------------------------------- separable oracle

SeparableStructured::SeparableStructured(Mat rows, Vec offsets,
                                         std::shared_ptr<const ScalarFunction> family, Vec weights,
                                         std::optional<Box> region)
    : a_(std::move(rows)), b_(std::move(offsets)), phi_(std::move(family)), region_(std::move(region)) {
  if (!phi_) throw ArgumentError("separable oracle needs a scalar family");
  if (a_.rows() == 0 || a_.cols() == 0) throw ArgumentError("separable oracle needs rows");
  if (b_.size() != a_.rows()) throw ArgumentError("offset count must match row count");
  c_ = weights.size() == 0 ? Vec::Ones(a_.rows()) : std::move(weights);
  if (c_.size() != a_.rows() || (c_.array() <= 0.0).any())
    throw ArgumentError("weights must be positive, one per row");
  if (region_ && (region_->lo.size() != a_.cols() || region_->hi.size() != a_.cols()))
    throw ArgumentError("region dimension mismatch");
}

Vec SeparableStructured::residuals(const Vec& x) const {
  if (x.size() != a_.cols()) throw ArgumentError("dimension mismatch in separable oracle");
  Vec t = a_ * x - b_;
  for (int i = 0; i < t.size(); ++i)
    if (!phi_->in_domain(t(i)))
      throw DomainError(phi_->name() + ": argument outside domain at row " + std::to_string(i), i);
  return t;
}

bool SeparableStructured::in_domain(const Vec& x) const {
  const Vec t = a_ * x - b_;
  for (int i = 0; i < t.size(); ++i)
    if (!phi_->in_domain(t(i))) return false;
  return true;
}

Vec SeparableStructured::coefficients(const Vec& x, int k, bool even) const {
  check_order(k);
  const Vec t = residuals(x);
  Vec w(t.size());
  for (int i = 0; i < t.size(); ++i)
    w(i) = c_(i) * (even ? phi_->even_derivative(t(i), k) : phi_->derivative(t(i), k));
  return w;
}

double SeparableStructured::contract(const Vec& x, const Vec& h, int k, bool even) const {
  const Vec w = coefficients(x, k, even);
  const Vec ah = a_ * h;
  double r = 0.0;
  for (int i = 0; i < w.size(); ++i) r += w(i) * ipow(ah(i), k);
  return r;
}

Vec SeparableStructured::contract_vector(const Vec& x, const Vec& h, int k, bool even) const {
  if (k < 1) throw ArgumentError("tensor vector needs order >= 1");
  Vec w = coefficients(x, k, even);
  const Vec ah = a_ * h;
  for (int i = 0; i < w.size(); ++i) w(i) *= ipow(ah(i), k - 1);
  return a_.transpose() * w;
}

Mat SeparableStructured::contract_matrix(const Vec& x, const Vec& h, int k, bool even) const {
  if (k < 2) throw ArgumentError("tensor matrix needs order >= 2");
  Vec w = coefficients(x, k, even);
  const Vec ah = a_ * h;
  for (int i = 0; i < w.size(); ++i) w(i) *= ipow(ah(i), k - 2);
  return a_.transpose() * w.asDiagonal() * a_;
}

double SeparableStructured::value(const Vec& x) const {
  const Vec t = residuals(x);
  double r = 0.0;
  for (int i = 0; i < t.size(); ++i) r += c_(i) * phi_->derivative(t(i), 0);
  return r;
}

Vec SeparableStructured::gradient(const Vec& x) const { return a_.transpose() * coefficients(x, 1, false); }

Mat SeparableStructured::hessian(const Vec& x) const {
  return a_.transpose() * coefficients(x, 2, false).asDiagonal() * a_;
}

double SeparableStructured::directional(const Vec& x, const Vec& h, int k) const {
  if (k == 0) return value(x);
  return contract(x, h, k, false);
}

Vec SeparableStructured::tensor_vector(const Vec& x, const Vec& h, int k) const {
  return contract_vector(x, h, k, false);
}

Mat SeparableStructured::tensor_matrix(const Vec& x, const Vec& h, int k) const {
  return contract_matrix(x, h, k, false);
}

double SeparableStructured::even_directional(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return contract(x, h, order, true);
}

Vec SeparableStructured::even_tensor_vector(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return contract_vector(x, h, order, true);
}

Mat SeparableStructured::even_tensor_matrix(const Vec& x, const Vec& h, int order) const {
  if (order % 2 != 0) throw ArgumentError("even tensor requested with odd order");
  return contract_matrix(x, h, order, true);
}

std::pair<double, double> SeparableStructured::t_range(int i) const {
  if (!region_) return {-kInf, kInf};
  double lo = -b_(i), hi = -b_(i);
  for (int j = 0; j < a_.cols(); ++j) {
    const double u = a_(i, j) * region_->lo(j), v = a_(i, j) * region_->hi(j);
    lo += std::min(u, v);
    hi += std::max(u, v);
  }
  return {lo, hi};
}

std::optional<double> SeparableStructured::derivative_bound(int j) const {
  if (j < 2) return std::nullopt;
  const int n = dim();
  Mat s = Mat::Zero(n, n);
  for (int i = 0; i < a_.rows(); ++i) {
    const auto [lo, hi] = t_range(i);
    const auto sup = phi_->sup_abs(j, lo, hi);
    if (!sup) return std::nullopt;
    const Vec ai = a_.row(i).transpose();
    s += c_(i) * (*sup) * ipow(ai.norm(), j - 2) * ai * ai.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

// ---------------------------------------------------------------- simple terms

double ScalarPsi::value(double t) const {
  if (t < lo || t > hi) return kInf;
  return lambda * std::abs(t);
}

std::pair<double, double> ScalarPsi::subdifferential(double t) const {
  double gl, gu;
  if (t > 0) gl = gu = lambda;
  else if (t < 0) gl = gu = -lambda;
  else { gl = -lambda; gu = lambda; }
  if (t <= lo) gl = -kInf;
  if (t >= hi) gu = kInf;
  return {gl, gu};
}

std::vector<double> ScalarPsi::breakpoints() const {
  std::vector<double> b;
  if (std::isfinite(lo)) b.push_back(lo);
  if (lambda > 0 && lo < 0 && 0 < hi) b.push_back(0.0);
  if (std::isfinite(hi) && hi != lo) b.push_back(hi);
  std::sort(b.begin(), b.end());
  return b;
}

SimpleTerm SimpleTerm::zero() { return SimpleTerm(); }

SimpleTerm SimpleTerm::l1(double lambda) {
  if (!(lambda >= 0)) throw ArgumentError("l1 weight must be nonnegative");
  SimpleTerm t;
  t.kind_ = Kind::l1;
  t.lambda_ = lambda;
  return t;
}

SimpleTerm SimpleTerm::nonneg() {
  SimpleTerm t;
  t.kind_ = Kind::nonneg;
  return t;
}

SimpleTerm SimpleTerm::ball(const Vec& center, double radius) {
  if (!(radius > 0)) throw ArgumentError("ball radius must be positive");
  SimpleTerm t;
  t.kind_ = Kind::ball;
  t.center_ = center;
  t.radius_ = radius;
  return t;
}

SimpleTerm SimpleTerm::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any())
    throw ArgumentError("box needs lo <= hi of equal size");
  SimpleTerm t;
  t.kind_ = Kind::box;
  t.lo_ = lo;
  t.hi_ = hi;
  return t;
}

SimpleTerm SimpleTerm::abs1d() {
  SimpleTerm t;
  t.kind_ = Kind::abs1d;
  t.lambda_ = 1.0;
  return t;
}

std::string SimpleTerm::name() const {
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::l1: return "l1";
    case Kind::nonneg: return "indicator-nonneg";
    case Kind::ball: return "indicator-ball";
    case Kind::box: return "indicator-box";
    case Kind::abs1d: return "abs-1d";
  }
  return "?";
}

bool SimpleTerm::is_indicator() const {
  return kind_ == Kind::nonneg || kind_ == Kind::ball || kind_ == Kind::box;
}

ScalarPsi SimpleTerm::coordinate(int j, int n) const {
  switch (kind_) {
    case Kind::zero: return {};
    case Kind::l1: return {lambda_, -kInf, kInf};
    case Kind::abs1d:
      if (n != 1) throw ArgumentError("abs-1d term is one-dimensional");
      return {1.0, -kInf, kInf};
    case Kind::nonneg: return {0.0, 0.0, kInf};
    case Kind::box:
      if (lo_.size() != n) throw ArgumentError("box dimension mismatch");
      return {0.0, lo_(j), hi_(j)};
    case Kind::ball:
      if (n != 1 || center_.size() != 1) throw CapabilityError("ball term is not separable");
      return {0.0, center_(0) - radius_, center_(0) + radius_};
  }
  return {};
}

bool SimpleTerm::contains(const Vec& x, double tol) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::l1:
    case Kind::abs1d: return x.allFinite();
    case Kind::nonneg: return (x.array() >= -tol).all();
    case Kind::box: return (x.array() >= lo_.array() - tol).all() && (x.array() <= hi_.array() + tol).all();
    case Kind::ball: return (x - center_).norm() <= radius_ + tol;
  }
  return false;
}

double SimpleTerm::value(const Vec& x) const {
  const double tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
  if (!contains(x, tol)) return kInf;
  if (kind_ == Kind::l1 || kind_ == Kind::abs1d) return lambda_ * x.lpNorm<1>();
  return 0.0;
}

Vec SimpleTerm::project(const Vec& x) const {
  switch (kind_) {
    case Kind::nonneg: return x.cwiseMax(0.0);
    case Kind::box: return x.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::ball: {
      const Vec d = x - center_;
      const double r = d.norm();
      return r <= radius_ ? x : Vec(center_ + (radius_ / r) * d);
    }
    default: return x;
  }
}

bool SimpleTerm::is_subgradient(const Vec& x, const Vec& g, double tol) const {
  if (x.size() != g.size()) throw ArgumentError("dimension mismatch in subgradient test");
  const double ftol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
  if (!contains(x, ftol)) return false;
  if (kind_ == Kind::ball) {
    const Vec d = x - center_;
    const double r = d.norm();
    if (r < radius_ - 1e-12 * (1.0 + radius_)) return g.norm() <= tol;
    const double alpha = std::max(0.0, g.dot(d) / (r * r));
    return (g - alpha * d).norm() <= tol;
  }
  const int n = static_cast<int>(x.size());
  for (int j = 0; j < n; ++j) {
    ScalarPsi s = coordinate(j, n);
    double t = x(j);
    const double bt = 1e-12 * (1.0 + std::abs(t));
    if (std::abs(t - s.lo) <= bt) t = s.lo;
    else if (std::abs(t - s.hi) <= bt) t = s.hi;
    else if (s.lambda > 0 && std::abs(t) <= 1e-14) t = 0.0;
    const auto [gl, gu] = s.subdifferential(t);
    if (g(j) < gl - tol || g(j) > gu + tol) return false;
  }
  return true;
}

Vec SimpleTerm::select_subgradient(const Vec& x, const Vec& target) const {
  const double ftol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
  if (!contains(x, ftol)) throw DomainError("subgradient requested outside dom psi");
  if (kind_ == Kind::ball) {
    const Vec d = x - center_;
    const double r = d.norm();
    if (r < radius_ - 1e-12 * (1.0 + radius_)) return Vec::Zero(x.size());
    const double alpha = std::max(0.0, target.dot(d) / (r * r));
    return alpha * d;
  }
  const int n = static_cast<int>(x.size());
  Vec g(n);
  for (int j = 0; j < n; ++j) {
    ScalarPsi s = coordinate(j, n);
    double t = x(j);
    const double bt = 1e-12 * (1.0 + std::abs(t));
    if (std::abs(t - s.lo) <= bt) t = s.lo;
    else if (std::abs(t - s.hi) <= bt) t = s.hi;
    const auto [gl, gu] = s.subdifferential(t);
    g(j) = std::clamp(target(j), gl, gu);
  }
  return g;
}

Vec SimpleTerm::prox(const Vec& s, const Vec& c, double tau, double weight) const {
  if (!(tau > 0)) throw ArgumentError("prox needs tau > 0");
  const Vec v = c - s / tau;
  if (weight <= 0.0 || kind_ == Kind::zero) return v;
  if (kind_ == Kind::ball) return project(v);
  const int n = static_cast<int>(v.size());
  Vec z(n);
  for (int j = 0; j < n; ++j) {
    const ScalarPsi sp = coordinate(j, n);
    const double thr = weight * sp.lambda / tau;
    double t = v(j);
    t = t > thr ? t - thr : (t < -thr ? t + thr : 0.0);
    z(j) = std::clamp(t, sp.lo, sp.hi);
  }
  return z;
}

double fd_check(const SmoothOracle& o, const Vec& x, const Vec& h, int k, double eps) {
  if (k < 1) throw ArgumentError("finite-difference check needs order >= 1");
  if (h.norm() == 0.0) return 0.0;
  const double exact = o.directional(x, h, k);
  const double fp = o.directional(x + eps * h, h, k - 1);
  const double fm = o.directional(x - eps * h, h, k - 1);
  const double fd = (fp - fm) / (2.0 * eps);
  return std::abs(fd - exact) / std::max(1.0, std::abs(exact));
}

}  // namespace biopt
