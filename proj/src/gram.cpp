#include "gram.hpp"

#include <algorithm>
#include <array>

#include "sphwce/parallel.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce::gram {

namespace {

constexpr std::size_t kRowBlock = 32;
constexpr std::size_t kLanes = 16;
constexpr std::size_t kChunk = 2048;

double inner(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += a[k] * b[k];
  return std::clamp(s, -1.0, 1.0);
}

// Walks the upper-triangle pairs (i < j) of one row block in a fixed order.
template <class Fn>
void for_block_pairs(const Nodes& x, std::size_t block, Fn&& fn) {
  const std::size_t n = x.size();
  const int dim = x.d + 1;
  const std::size_t hi = std::min(n, (block + 1) * kRowBlock);
  for (std::size_t i = block * kRowBlock; i < hi; ++i) {
    const double* xi = x.coords.data() + i * static_cast<std::size_t>(dim);
    for (std::size_t j = i + 1; j < n; ++j) {
      fn(inner(xi, x.coords.data() + j * static_cast<std::size_t>(dim), dim),
         2.0 * x.weights[i] * x.weights[j]);
    }
  }
}

std::size_t block_count(const Nodes& x) { return (x.size() + kRowBlock - 1) / kRowBlock; }

double diagonal_mass(const Nodes& x) {
  double s = 0.0;
  for (double w : x.weights) s += w * w;
  return s;
}

}  // namespace

std::vector<double> legendre_sums(const Nodes& x, int L) {
  const std::size_t n_terms = static_cast<std::size_t>(L) + 1;
  std::vector<double> ra(n_terms), rb(n_terms);
  for (std::size_t l = 1; l < n_terms; ++l) {
    ra[l] = double(2 * l + x.d - 1) / double(l + x.d - 1);
    rb[l] = double(l) / double(l + x.d - 1);
  }

  const std::size_t n_blocks = block_count(x);
  std::vector<std::vector<double>> partial(n_blocks);
  parallel::for_blocks(n_blocks, [&](std::size_t b) {
    std::vector<double> acc(n_terms, 0.0);
    // q_l = w P_l(t) per lane; the recurrence is linear so the weight rides along
    alignas(64) std::array<double, kLanes> t{}, q0{}, q1{}, q2{}, red{};
    std::size_t filled = 0;
    auto lane_sum = [&](const std::array<double, kLanes>& v) {
      red = v;
      for (std::size_t h = kLanes / 2; h >= 1; h /= 2) {
        for (std::size_t k = 0; k < h; ++k) red[k] += red[k + h];
      }
      return red[0];
    };
    auto flush = [&] {
      for (std::size_t k = 0; k < kLanes; ++k) q1[k] = q0[k] * t[k];
      acc[0] += lane_sum(q0);
      if (n_terms > 1) acc[1] += lane_sum(q1);
      for (std::size_t l = 1; l + 1 < n_terms; ++l) {
        const double a = ra[l], c = rb[l];
        for (std::size_t k = 0; k < kLanes; ++k) {
          q2[k] = a * t[k] * q1[k] - c * q0[k];
          q0[k] = q1[k];
          q1[k] = q2[k];
        }
        acc[l + 1] += lane_sum(q2);
      }
    };
    for_block_pairs(x, b, [&](double tij, double wij) {
      t[filled] = tij;
      q0[filled] = wij;
      if (++filled == kLanes) {
        flush();
        filled = 0;
      }
    });
    if (filled > 0) {
      for (std::size_t k = filled; k < kLanes; ++k) {
        t[k] = 0.0;
        q0[k] = 0.0;
      }
      flush();
    }
    partial[b] = std::move(acc);
  });

  std::vector<double> sums = parallel::tree_sum(partial);
  const double diag = diagonal_mass(x);
  for (double& s : sums) s += diag;
  return sums;
}

double series_sum(const Nodes& x, int dim_index, std::span<const double> coeffs) {
  const std::size_t n_blocks = block_count(x);
  std::vector<double> partial(n_blocks, 0.0);
  parallel::for_blocks(n_blocks, [&](std::size_t b) {
    std::vector<double> ts, ws, vals;
    ts.reserve(kChunk);
    ws.reserve(kChunk);
    double acc = 0.0;
    auto flush = [&] {
      vals.resize(ts.size());
      legendre_series_batch(dim_index, coeffs, ts, vals);
      for (std::size_t k = 0; k < ts.size(); ++k) acc += ws[k] * vals[k];
      ts.clear();
      ws.clear();
    };
    for_block_pairs(x, b, [&](double tij, double wij) {
      ts.push_back(tij);
      ws.push_back(wij);
      if (ts.size() == kChunk) flush();
    });
    if (!ts.empty()) flush();
    partial[b] = acc;
  });
  double at_one = 0.0;
  const double one = 1.0;
  legendre_series_batch(dim_index, coeffs, std::span<const double>(&one, 1), std::span<double>(&at_one, 1));
  return parallel::tree_sum(partial) + diagonal_mass(x) * at_one;
}

}  // namespace sphwce::gram
