#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sphwce/kernel.hpp"
#include "sphwce/pointset.hpp"

// Fooling functions: smooth bumps on node-free caps, giving a certified lower
// bound I(f)/||f|| on the worst-case error of a rule that vanishes on f.
namespace sphwce {

// exp(1 - 1/(1 - u^2)) on (-1, 1), zero elsewhere.
double bump(double u);

// Bump rescaled to the annulus cos(beta) <= t <= cos(beta/2). beta in (0, pi/2].
double bump_scaled(double beta, double t);

// Funk-Hecke coefficients a_l, l = 0..L, with bump_scaled(beta, <x,y>) = Sum a_l Z(d,l) P_l^{(d)}(<x,y>).
// quad_n is the total node count of the composite rule on the support; the result
// is checked against a rule with twice as many nodes.
// Throws NumericalFailure if the two disagree by more than 1e-10 max|a|.
std::vector<double> funk_hecke_coeffs(double beta, int d, int L, int quad_n);

struct FoolingWitness {
  Packing packing;  // the node-free caps actually used
  double beta = 0.0;
  std::vector<double> coeffs;  // a_0 .. a_L
  int L = 0;
  double integral = 0.0;
  double norm = 0.0;            // sqrt(norm_sq_truncated + remainder_sq)
  double norm_sq_truncated = 0.0;
  double remainder_sq = 0.0;    // bound on the degrees above L
  double witness = 0.0;         // integral / norm
  double max_node_value = 0.0;  // max |f(x_i)| over rule nodes
  bool valid = false;
};

// Packs 2M caps greedily, keeps those without nodes, and bounds the norm of the
// sum of bumps. L = 0 picks the degree from the remainder bound.
FoolingWitness build_witness(const PointSet& x, const SpaceSpec& space, std::size_t m, int L,
                             std::uint64_t seed);
// Same packing and Gram sums shared by several spaces; L = 0 takes the largest
// degree any of them needs.
std::vector<FoolingWitness> build_witnesses(const PointSet& x, std::span<const SpaceSpec> spaces,
                                            std::size_t m, int L, std::uint64_t seed);

}  // namespace sphwce
