#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "biopt/oracles.hpp"

namespace biopt {

struct ReferenceSolution {
  Vec x;
  double F = 0.0;
  double residual = 0.0;  // ||x - prox_psi(x - grad f(x))||
};

// F = f + psi
struct CompositeProblem {
  std::string id;
  std::string description;
  std::shared_ptr<const SmoothOracle> f;
  SimpleTerm psi;
  MetricSpace metric = MetricSpace::identity(1);
  Vec x0;
  std::optional<Box> region;  // where derivative bounds hold and samples are drawn
  double bound_floor = 0.0;   // declared M_j when the exact bound vanishes
  std::function<ReferenceSolution()> reference;

  int dim() const { return f->dim(); }
  double F(const Vec& x) const;
  Vec grad(const Vec& x) const { return f->gradient(x); }
  // M_j(f) used by the solvers
  double regularity_bound(int j) const;
  Vec sample(std::mt19937_64& rng) const;
};

std::vector<std::string> problem_ids();
CompositeProblem make_problem(const std::string& id);
ReferenceSolution reference_solution(const CompositeProblem& prob);
ReferenceSolution certify_reference(const CompositeProblem& prob, const Vec& x);

}  // namespace biopt
