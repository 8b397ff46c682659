#pragma once

#include <string>
#include <vector>

#include "sphwce/kernel.hpp"
#include "sphwce/pointset.hpp"

// Worst-case errors of cubature rules on S^d, computed along independent paths.
namespace sphwce {

enum class WcePath { PairwiseKernel, PerDegreeMoments, HeatOracle };

std::string to_string(WcePath path);

struct WceReport {
  SpaceSpec space;
  double value = 0.0;  // sqrt(max(value_sq, 0))
  double value_sq = 0.0;
  int L = 0;
  double tail_bound_sq = 0.0;
  WcePath path = WcePath::PairwiseKernel;
};

// m_l = Sum_{i,j} w_i w_j Z(d,l) P_l^{(d)}(<x_i, x_j>)
double gram_moment(const PointSet& x, int ell);
// m_0 .. m_L in one pass
std::vector<double> gram_moments(const PointSet& x, int L);

WceReport wce(const PointSet& x, const SpaceSpec& space, int L = kDefaultDegree);
WceReport wce_moments(const PointSet& x, const SpaceSpec& space, int L = kDefaultDegree);
// Same as wce_moments, from precomputed moments m_0..m_L (L = moments.size() - 1).
WceReport wce_from_moments(const std::vector<double>& moments, const SpaceSpec& space,
                           double abs_weight_sum = 1.0);

struct DesignReport {
  int t = 0;
  std::vector<double> residuals;  // m_1 .. m_t
  double max_residual = 0.0;
  double tol = 0.0;
  bool is_design = false;
};

// tol < 0 selects the default 1e-10 N.
DesignReport validate_design(const PointSet& x, int t, double tol = -1.0);

struct Certificate {
  int ell_star = 1;
  double bound_sq = 0.0;
};

// Largest single degree term of wce^2. Throws std::invalid_argument for signed weights.
Certificate lower_certificate(const PointSet& x, const SpaceSpec& space, int L = kDefaultDegree);
Certificate certificate_from_moments(const std::vector<double>& moments, const SpaceSpec& space);

// h(t) = Sum_{l=1}^{L} exp(-lambda_l t) m_l
double heat_trace(const std::vector<double>& moments, int d, double t);

struct HeatQuadrature {
  int points_per_panel = 16;
  int initial_panels = 32;
  double rel_tol = 1e-9;       // panel doubling stops below this change
  double remainder_tol = 1e-8;  // truncated-domain remainders relative to the value
  int max_doublings = 14;
};

// Laplace-domain representation of the Sobolev wce, truncated at degree L_heat.
// Throws std::invalid_argument for LogSobolev spaces and NumericalFailure if the
// remainder targets cannot be met.
WceReport wce_heat_oracle(const PointSet& x, const SpaceSpec& space, int L_heat,
                          const HeatQuadrature& quad = {});

}  // namespace sphwce
