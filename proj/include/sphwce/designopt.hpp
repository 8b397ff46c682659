#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sphwce/kernel.hpp"
#include "sphwce/pointset.hpp"

// Riemannian first-order search for well-distributed point sets.
namespace sphwce {

// Sum_{i,j} of the constant-free kernel truncated at L.
struct KernelEnergy {
  SpaceSpec space;
  int L = kDefaultDegree;
};

// Sum_{i != j} |x_i - x_j|^alpha, alpha in (0, 2). Maximized.
struct DistanceSum {
  double alpha = 1.0;
};

// Sum_{l=1}^{t} m_l for equal weights.
struct DesignResidual {
  int t = 1;
};

struct Objective {
  std::variant<KernelEnergy, DistanceSum, DesignResidual> kind;

  bool maximize() const { return std::holds_alternative<DistanceSum>(kind); }
  void validate(int d) const;
};

double objective_value(const PointSet& x, const Objective& obj);

// Tangent gradients, flattened N x (d+1). Throws std::domain_error on coincident
// points for DistanceSum with alpha <= 1.
std::vector<double> gradient(const PointSet& x, const Objective& obj);

struct OptResult {
  PointSet points;
  std::vector<double> objective_trace;  // one entry per accepted iterate, the start included
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
};

// Projected gradient steps with halving backtracking and renormalization.
// The run itself is deterministic; seed is carried into the result as its label.
OptResult optimize(const PointSet& x0, const Objective& obj, int max_iter, double tol, std::uint64_t seed);

// One run per seed from random_uniform(d, n, seed); best objective wins, lowest seed on ties.
OptResult optimize_restarts(int d, std::size_t n, const Objective& obj, int max_iter, double tol,
                            std::span<const std::uint64_t> seeds);

}  // namespace sphwce
