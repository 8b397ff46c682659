#pragma once

#include <span>
#include <vector>

// Deterministic symmetric pair sums over a weighted node set.
// Rows are cut into fixed blocks; each block owns its partial result and the
// partials are combined with parallel::tree_sum, so the bits do not depend on
// how many threads ran.
namespace sphwce::gram {

struct Nodes {
  int d;
  std::span<const double> coords;   // n * (d+1)
  std::span<const double> weights;  // n

  std::size_t size() const { return weights.size(); }
};

// S_l = Sum_{i,j} w_i w_j P_l^{(d)}(<x_i, x_j>), l = 0..L.
std::vector<double> legendre_sums(const Nodes& x, int L);

// Sum_{i,j} w_i w_j Sum_l coeffs[l] P_l^{(dim_index)}(<x_i, x_j>).
double series_sum(const Nodes& x, int dim_index, std::span<const double> coeffs);

}  // namespace sphwce::gram
