#pragma once

#include <Eigen/Dense>

namespace biopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// SPD operator B: ||x|| = <Bx,x>^{1/2}, ||g||_* = <g,B^{-1}g>^{1/2}.
class MetricSpace {
 public:
  enum class Kind { identity, diagonal, dense };

  static MetricSpace identity(int n);
  static MetricSpace diagonal(const Vec& w);
  static MetricSpace dense(const Mat& b);

  int dim() const { return n_; }
  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::identity; }

  Vec apply(const Vec& x) const;  // Bx
  Vec solve(const Vec& g) const;  // B^{-1}g
  Mat matrix() const;
  void check_dim(const Vec& x) const;

 private:
  Kind kind_ = Kind::identity;
  int n_ = 0;
  Vec w_;
  Mat b_;
  Eigen::LLT<Mat> llt_;
};

double primal_norm(const MetricSpace& m, const Vec& x);
double dual_norm(const MetricSpace& m, const Vec& g);

// d_{p+1}(h) = ||h||^{p+1}/(p+1)
struct PowerProx {
  PowerProx(int p, MetricSpace metric);
  int p;
  MetricSpace metric;
};

double dp1_value(const PowerProx& pp, const Vec& h);
Vec dp1_gradient(const PowerProx& pp, const Vec& h);
double dp1_hessian_form(const PowerProx& pp, const Vec& h, const Vec& u);
Mat dp1_hessian(const PowerProx& pp, const Vec& h);

// modulus in d(y) - d(x) - <grad d(x), y-x> >= sigma ||y-x||^{p+1}
double dp1_uniform_convexity(int p);

}  // namespace biopt
