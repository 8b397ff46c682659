#pragma once

#include <cstddef>
#include <functional>
#include <vector>

// Block-parallel execution with results that do not depend on the worker
// count: work is cut into a fixed set of blocks, every block writes only its
// own slot, and callers reduce the slots in a fixed order.
namespace sphwce::parallel {

// 0 means "use std::thread::hardware_concurrency()".
void set_max_threads(unsigned n);
unsigned max_threads();

void for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body);

// Pairwise (fixed binary tree) sum of block partials.
double tree_sum(const std::vector<double>& partials);

// Element-wise tree reduction of equally sized partial arrays.
std::vector<double> tree_sum(const std::vector<std::vector<double>>& partials);

}  // namespace sphwce::parallel
