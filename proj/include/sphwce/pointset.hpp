#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace sphwce {

// N nodes on S^d (row-major coordinates, d+1 per point) with weights.
class PointSet {
 public:
  // Validates |x_i| = 1 and sum w = 1 to 1e-12; throws std::invalid_argument.
  PointSet(int d, std::vector<double> coords, std::vector<double> weights);
  // Equal weights 1/N.
  PointSet(int d, std::vector<double> coords);

  int d() const noexcept { return d_; }
  int dim() const noexcept { return d_ + 1; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double abs_weight_sum() const;
  bool has_negative_weight() const;

 private:
  int d_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

// Plain-text node table: '#' comments, d+1 coordinates and an optional weight per line.
PointSet load_pointset(std::istream& in, int d);
PointSet load_pointset(const std::filesystem::path& file, int d);
void write_pointset(std::ostream& out, const PointSet& x);

PointSet random_uniform(int d, std::size_t n, std::uint64_t seed);

// Generalized spiral on S^2.
PointSet spiral_points(std::size_t n);

// Normalized area of a cap of angular radius phi.
double cap_area(int d, double phi);

struct SeparationReport {
  double min_distance;
  double min_angle;
  double separation_constant;  // min_distance * N^{1/d}
};

SeparationReport separation(const PointSet& x);

struct PropertyRReport {
  int t;
  double c1;
  double max_ratio;
  std::size_t probes;
};

PropertyRReport property_r(const PointSet& x, int t, double c1, std::span<const double> probes);
// Probes: the nodes plus 10 N seeded uniform points.
PropertyRReport property_r(const PointSet& x, int t, double c1, std::uint64_t seed);

struct Packing {
  int d;
  std::vector<double> centers;  // M * (d+1)
  double beta;

  std::size_t size() const { return centers.size() / static_cast<std::size_t>(d + 1); }
};

Packing greedy_packing(int d, std::size_t m, std::size_t candidate_count, std::uint64_t seed);

// 2 asin(|x - y| / 2)
double angle_between(std::span<const double> x, std::span<const double> y);

}  // namespace sphwce
