#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biopt/power_prox.hpp"

namespace biopt {

class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual int dim() const = 0;
  virtual int max_order() const = 0;
  virtual std::string name() const = 0;
  virtual bool in_domain(const Vec& x) const = 0;

  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;

  // D^k f(x)[h]^k, D^k f(x)[h]^{k-1} (covector), D^k f(x)[h]^{k-2} (matrix, k >= 2)
  virtual double directional(const Vec& x, const Vec& h, int k) const = 0;
  virtual Vec tensor_vector(const Vec& x, const Vec& h, int k) const = 0;
  virtual Mat tensor_matrix(const Vec& x, const Vec& h, int k) const = 0;

  // Same contractions restricted to even orders; families may evaluate them
  // through lower-order identities.
  virtual double even_directional(const Vec& x, const Vec& h, int order) const;
  virtual Vec even_tensor_vector(const Vec& x, const Vec& h, int order) const;
  virtual Mat even_tensor_matrix(const Vec& x, const Vec& h, int order) const;

  // sup-bound M_j(f) of the j-th derivative (over the declared region when there is one)
  virtual std::optional<double> derivative_bound(int j) const = 0;

  double hessian_form(const Vec& x, const Vec& u) const { return u.dot(hessian(x) * u); }
  Vec hessian_action(const Vec& x, const Vec& u) const { return hessian(x) * u; }

 protected:
  void check_order(int k) const;
};

struct EvenTensorAction {
  double form;  // <D^{2k}f(y)[h]^{2k-2}u, u>
  Vec action;   // D^{2k}f(y)[h]^{2k-2}u
};

EvenTensorAction even_tensor_action(const SmoothOracle& o, const Vec& y, const Vec& h, int order,
                                    const Vec& u);

// Scalar convex function t -> f(t) with derivatives of any order.
class ScalarFunction {
 public:
  virtual ~ScalarFunction() = default;
  virtual std::string name() const = 0;
  virtual bool in_domain(double /*t*/) const { return true; }
  virtual double derivative(double t, int order) const = 0;  // order 0 is the value
  virtual double even_derivative(double t, int order) const { return derivative(t, order); }
  // sup |f^{(order)}| over [lo, hi]; nullopt when unbounded
  virtual std::optional<double> sup_abs(int order, double lo, double hi) const = 0;
};

// f(t) = t
class Linear : public ScalarFunction {
 public:
  std::string name() const override { return "linear"; }
  double derivative(double t, int order) const override { return order == 0 ? t : (order == 1 ? 1.0 : 0.0); }
  std::optional<double> sup_abs(int order, double lo, double hi) const override;
};

// -log t; even orders 2k are (2k-1)! (f'')^k
class NegLog : public ScalarFunction {
 public:
  std::string name() const override { return "neg-log"; }
  bool in_domain(double t) const override { return t > 0.0; }
  double derivative(double t, int order) const override;
  double even_derivative(double t, int order) const override;
  std::optional<double> sup_abs(int order, double lo, double hi) const override;
};

// t^m for even m >= 2
class Monomial : public ScalarFunction {
 public:
  explicit Monomial(int m);
  std::string name() const override;
  double derivative(double t, int order) const override;
  std::optional<double> sup_abs(int order, double lo, double hi) const override;
  int m() const { return m_; }

 private:
  int m_;
};

// log(1 + e^t)
class Logistic : public ScalarFunction {
 public:
  std::string name() const override { return "logistic"; }
  double derivative(double t, int order) const override;
  std::optional<double> sup_abs(int order, double lo, double hi) const override;

 private:
  mutable std::vector<std::vector<double>> poly_;  // f^{(k)} as a polynomial in sigma
  const std::vector<double>& poly(int order) const;
};

struct Box {
  Vec lo, hi;
};

// f(x) = sum_i c_i phi(<a_i, x> - b_i)
class SeparableStructured : public SmoothOracle {
 public:
  SeparableStructured(Mat rows, Vec offsets, std::shared_ptr<const ScalarFunction> family,
                      Vec weights = Vec(), std::optional<Box> region = std::nullopt);

  int dim() const override { return static_cast<int>(a_.cols()); }
  int max_order() const override { return 64; }
  std::string name() const override { return "separable-" + phi_->name(); }
  bool in_domain(const Vec& x) const override;

  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  double directional(const Vec& x, const Vec& h, int k) const override;
  Vec tensor_vector(const Vec& x, const Vec& h, int k) const override;
  Mat tensor_matrix(const Vec& x, const Vec& h, int k) const override;
  double even_directional(const Vec& x, const Vec& h, int order) const override;
  Vec even_tensor_vector(const Vec& x, const Vec& h, int order) const override;
  Mat even_tensor_matrix(const Vec& x, const Vec& h, int order) const override;
  std::optional<double> derivative_bound(int j) const override;

  const Mat& rows() const { return a_; }
  const Vec& offsets() const { return b_; }
  const Vec& weights() const { return c_; }
  const ScalarFunction& family() const { return *phi_; }
  const std::optional<Box>& region() const { return region_; }
  // range of t_i over the region (or the real line)
  std::pair<double, double> t_range(int i) const;

 private:
  Vec residuals(const Vec& x) const;
  Vec coefficients(const Vec& x, int k, bool even) const;
  double contract(const Vec& x, const Vec& h, int k, bool even) const;
  Vec contract_vector(const Vec& x, const Vec& h, int k, bool even) const;
  Mat contract_matrix(const Vec& x, const Vec& h, int k, bool even) const;

  Mat a_;
  Vec b_;
  Vec c_;
  std::shared_ptr<const ScalarFunction> phi_;
  std::optional<Box> region_;
};

// lambda |t| + indicator of [lo, hi]
struct ScalarPsi {
  double lambda = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  double value(double t) const;
  std::pair<double, double> subdifferential(double t) const;  // endpoints, may be infinite
  std::vector<double> breakpoints() const;
};

class SimpleTerm {
 public:
  enum class Kind { zero, l1, nonneg, ball, box, abs1d };

  static SimpleTerm zero();
  static SimpleTerm l1(double lambda);
  static SimpleTerm nonneg();
  static SimpleTerm ball(const Vec& center, double radius);
  static SimpleTerm box(const Vec& lo, const Vec& hi);
  static SimpleTerm abs1d();

  Kind kind() const { return kind_; }
  std::string name() const;
  bool separable() const { return kind_ != Kind::ball; }
  bool is_indicator() const;
  ScalarPsi coordinate(int j, int n) const;

  double value(const Vec& x) const;  // +inf off the domain
  bool contains(const Vec& x, double tol = 0.0) const;
  Vec project(const Vec& x) const;
  bool is_subgradient(const Vec& x, const Vec& g, double tol) const;
  // element of the subdifferential at x closest to target
  Vec select_subgradient(const Vec& x, const Vec& target) const;
  // argmin_z <s,z> + weight*psi(z) + tau/2 ||z-c||^2
  Vec prox(const Vec& s, const Vec& c, double tau, double weight = 1.0) const;

  double lambda() const { return lambda_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }

 private:
  Kind kind_ = Kind::zero;
  double lambda_ = 0.0;
  Vec center_;
  double radius_ = 0.0;
  Vec lo_, hi_;
};

// Relative error (unit floor) between a central difference of D^{k-1}f along h and D^k f(x)[h]^k.
double fd_check(const SmoothOracle& o, const Vec& x, const Vec& h, int k, double eps);

}  // namespace biopt
