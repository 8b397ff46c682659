#include "sphwce/pointset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sphwce/errors.hpp"
#include "sphwce/parallel.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<double> gaussian_directions(int d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t dim = static_cast<std::size_t>(d) + 1;
  std::vector<double> coords(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        coords[i * dim + k] = gauss(rng);
        norm2 += coords[i * dim + k] * coords[i * dim + k];
      }
    } while (norm2 < 1e-200);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < dim; ++k) coords[i * dim + k] *= inv;
  }
  return coords;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

constexpr std::size_t kRowBlock = 64;

std::vector<double> equal_weights(std::size_t n_coords, int d) {
  const std::size_t n = d >= 0 ? n_coords / static_cast<std::size_t>(d + 1) : 0;
  return std::vector<double>(n, n ? 1.0 / double(n) : 0.0);
}

}  // namespace

PointSet::PointSet(int d, std::vector<double> coords, std::vector<double> weights)
    : d_(d), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (d_ < 2) throw std::invalid_argument("PointSet: d must be >= 2");
  const std::size_t dim_sz = static_cast<std::size_t>(dim());
  if (weights_.empty()) throw std::invalid_argument("PointSet: N must be >= 1");
  if (coords_.size() != weights_.size() * dim_sz) {
    throw std::invalid_argument("PointSet: coordinate count does not match N (d+1)");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const auto p = point(i);
    if (std::abs(std::sqrt(dot(p, p)) - 1.0) > 1e-12) {
      throw std::invalid_argument("PointSet: point " + std::to_string(i) + " is not a unit vector");
    }
  }
  double sum = 0.0;
  for (double w : weights_) sum += w;
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("PointSet: weights must sum to 1");
}

PointSet::PointSet(int d, std::vector<double> coords)
    : PointSet(d, coords, equal_weights(coords.size(), d)) {}

double PointSet::abs_weight_sum() const {
  double s = 0.0;
  for (double w : weights_) s += std::abs(w);
  return s;
}

bool PointSet::has_negative_weight() const {
  return std::any_of(weights_.begin(), weights_.end(), [](double w) { return w < 0.0; });
}

PointSet load_pointset(std::istream& in, int d) {
  if (d < 2) throw std::invalid_argument("load_pointset: d must be >= 2");
  const std::size_t dim = static_cast<std::size_t>(d) + 1;
  std::vector<double> coords, weights;
  int has_weight = -1;  // unknown until the first data line
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;

    fields.clear();
    std::size_t pos = first;
    while (pos < line.size()) {
      const std::size_t end = std::min(line.find_first_of(" \t", pos), line.size());
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
      if (ec != std::errc() || ptr != line.data() + end || !std::isfinite(v)) {
        throw PointFileError(PointFileError::Kind::Parse, lineno,
                             "line " + std::to_string(lineno) + ": bad number '" +
                                 line.substr(pos, end - pos) + "'");
      }
      fields.push_back(v);
      pos = line.find_first_not_of(" \t", end);
      if (pos == std::string::npos) break;
    }
    if (fields.size() != dim && fields.size() != dim + 1) {
      throw PointFileError(PointFileError::Kind::Parse, lineno,
                           "line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                               " or " + std::to_string(dim + 1) + " fields, got " +
                               std::to_string(fields.size()));
    }
    const int weighted = fields.size() == dim + 1 ? 1 : 0;
    if (has_weight == -1) {
      has_weight = weighted;
    } else if (has_weight != weighted) {
      throw PointFileError(PointFileError::Kind::Parse, lineno,
                           "line " + std::to_string(lineno) + ": weight column present on some lines only");
    }
    double norm2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) norm2 += fields[k] * fields[k];
    const double norm = std::sqrt(norm2);
    if (std::abs(norm - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "line " << lineno << ": vector norm " << norm << " is not 1";
      throw PointFileError(PointFileError::Kind::Norm, lineno, msg.str());
    }
    // already-unit vectors are kept bit-exact
    const double scale = std::abs(norm - 1.0) > 1e-14 ? norm : 1.0;
    for (std::size_t k = 0; k < dim; ++k) coords.push_back(fields[k] / scale);
    if (weighted) weights.push_back(fields[dim]);
  }
  if (coords.empty()) throw PointFileError(PointFileError::Kind::Parse, 0, "no points in input");

  const std::size_t n = coords.size() / dim;
  if (has_weight != 1) weights.assign(n, 1.0 / double(n));
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "weights sum to " << sum << ", not 1";
    throw PointFileError(PointFileError::Kind::WeightSum, 0, msg.str());
  }
  if (std::abs(sum - 1.0) > 1e-14) {
    for (double& w : weights) w /= sum;
  }
  return PointSet(d, std::move(coords), std::move(weights));
}

PointSet load_pointset(const std::filesystem::path& file, int d) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open point file " + file.string());
  return load_pointset(in, d);
}

void write_pointset(std::ostream& out, const PointSet& x) {
  out << "# d=" << x.d() << " N=" << x.size() << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double v : x.point(i)) out << format_double(v) << ' ';
    out << format_double(x.weights()[i]) << '\n';
  }
}

PointSet random_uniform(int d, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_uniform: N must be >= 1");
  if (d < 2) throw std::invalid_argument("random_uniform: d must be >= 2");
  return PointSet(d, gaussian_directions(d, n, seed));
}

PointSet spiral_points(std::size_t n) {
  if (n < 2) throw std::invalid_argument("spiral_points: N must be >= 2");
  std::vector<double> coords(3 * n);
  const double nn = double(n);
  double phi = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double z = 1.0 - (2.0 * double(i) - 1.0) / nn;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    if (i > 1) {
      phi = std::fmod(phi + 3.6 / std::sqrt(nn * (1.0 - z * z)), 2.0 * std::numbers::pi);
    }
    double* p = &coords[3 * (i - 1)];
    p[0] = rho * std::cos(phi);
    p[1] = rho * std::sin(phi);
    p[2] = z;
    const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (int k = 0; k < 3; ++k) p[k] /= norm;
  }
  return PointSet(2, std::move(coords));
}

double cap_area(int d, double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi)) throw std::domain_error("cap_area: phi outside [0, pi]");
  if (d < 2) throw std::domain_error("cap_area: d must be >= 2");
  if (phi == 0.0) return 0.0;
  if (phi == std::numbers::pi) return 1.0;
  static const QuadratureRule1D gl = gauss_quadrature(2, 64);
  // c_d * int_0^phi sin^{d-1}(theta) d theta
  double s = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double theta = 0.5 * phi * (gl.nodes[i] + 1.0);
    s += gl.weights[i] * std::pow(std::sin(theta), d - 1);
  }
  return std::min(1.0, sphere_measure_constant(d) * 0.5 * phi * s);
}

double angle_between(std::span<const double> x, std::span<const double> y) {
  return 2.0 * std::asin(std::min(1.0, distance(x, y) / 2.0));
}

SeparationReport separation(const PointSet& x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("separation: N must be >= 2");
  const std::size_t n_blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<double> block_min(n_blocks, std::numeric_limits<double>::infinity());
  parallel::for_blocks(n_blocks, [&](std::size_t b) {
    double m = std::numeric_limits<double>::infinity();
    const std::size_t hi = std::min(n, (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < hi; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) m = std::min(m, distance(x.point(i), x.point(j)));
    }
    block_min[b] = m;
  });
  const double dmin = std::min(2.0, *std::min_element(block_min.begin(), block_min.end()));
  return {dmin, 2.0 * std::asin(dmin / 2.0), dmin * std::pow(double(n), 1.0 / x.d())};
}

PropertyRReport property_r(const PointSet& x, int t, double c1, std::span<const double> probes) {
  if (t < 1) throw std::invalid_argument("property_r: t must be >= 1");
  if (!(c1 > 0.0 && c1 <= std::numbers::pi / 2)) throw std::invalid_argument("property_r: c1 must be in (0, pi/2]");
  const std::size_t dim = static_cast<std::size_t>(x.dim());
  if (probes.empty() || probes.size() % dim != 0) throw std::invalid_argument("property_r: bad probe list");
  const std::size_t n_probes = probes.size() / dim;
  const double phi = std::min(c1 / t, std::numbers::pi);
  const double area = cap_area(x.d(), phi);
  const double cos_phi = std::cos(phi);
  const bool whole = phi >= std::numbers::pi;

  const std::size_t n_blocks = (n_probes + kRowBlock - 1) / kRowBlock;
  std::vector<double> block_max(n_blocks, 0.0);
  parallel::for_blocks(n_blocks, [&](std::size_t b) {
    double m = 0.0;
    const std::size_t hi = std::min(n_probes, (b + 1) * kRowBlock);
    for (std::size_t p = b * kRowBlock; p < hi; ++p) {
      const std::span<const double> c = probes.subspan(p * dim, dim);
      double mass = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (whole || dot(c, x.point(j)) >= cos_phi) mass += std::abs(x.weights()[j]);
      }
      m = std::max(m, mass);
    }
    block_max[b] = m;
  });
  return {t, c1, *std::max_element(block_max.begin(), block_max.end()) / area, n_probes};
}

PropertyRReport property_r(const PointSet& x, int t, double c1, std::uint64_t seed) {
  std::vector<double> probes = x.coords();
  const auto extra = gaussian_directions(x.d(), 10 * x.size(), seed);
  probes.insert(probes.end(), extra.begin(), extra.end());
  return property_r(x, t, c1, probes);
}

Packing greedy_packing(int d, std::size_t m, std::size_t candidate_count, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("greedy_packing: M must be >= 2");
  if (candidate_count < 10 * m) throw std::invalid_argument("greedy_packing: need at least 10 M candidates");
  const std::size_t dim = static_cast<std::size_t>(d) + 1;
  const std::vector<double> cand = gaussian_directions(d, candidate_count, seed);
  auto cpoint = [&](std::size_t i) { return std::span<const double>(cand.data() + i * dim, dim); };

  // max dot to the chosen set; the farthest candidate has the smallest one
  std::vector<double> max_dot(candidate_count, -std::numeric_limits<double>::infinity());
  std::vector<char> used(candidate_count, 0);
  Packing pk{d, {}, 0.0};
  pk.centers.reserve(m * dim);
  std::size_t next = 0;
  for (std::size_t k = 0; k < m; ++k) {
    used[next] = 1;
    const auto c = cpoint(next);
    pk.centers.insert(pk.centers.end(), c.begin(), c.end());
    std::size_t best = candidate_count;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidate_count; ++i) {
      if (used[i]) continue;
      max_dot[i] = std::max(max_dot[i], dot(cpoint(i), c));
      if (max_dot[i] < best_dot) {
        best_dot = max_dot[i];
        best = i;
      }
    }
    next = best;
  }

  double min_angle = std::numbers::pi;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      min_angle = std::min(min_angle, angle_between({pk.centers.data() + i * dim, dim},
                                                    {pk.centers.data() + j * dim, dim}));
    }
  }
  pk.beta = 0.5 * min_angle;
  return pk;
}

}  // namespace sphwce
