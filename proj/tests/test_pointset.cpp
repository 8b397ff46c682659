#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "sphwce/errors.hpp"
#include "sphwce/pointset.hpp"

using namespace sphwce;
using doctest::Approx;

namespace {

PointSet rotate(const PointSet& x, const Eigen::MatrixXd& q) {
  const int dim = x.dim();
  std::vector<double> c(x.coords().size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int r = 0; r < dim; ++r) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += q(r, k) * x.point(i)[k];
      c[i * dim + r] = s;
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    double n2 = 0.0;
    for (int r = 0; r < dim; ++r) n2 += c[i * dim + r] * c[i * dim + r];
    for (int r = 0; r < dim; ++r) c[i * dim + r] /= std::sqrt(n2);
  }
  return PointSet(x.d(), c, x.weights());
}

PointSet parse(const std::string& text, int d) {
  std::istringstream in(text);
  return load_pointset(in, d);
}

}  // namespace

TEST_CASE("loading point files") {
  const auto x = parse("# antipodes\n0 0 1\n\n0 0 -1\n", 2);
  CHECK(x.size() == 2);
  CHECK(x.weights()[0] == 0.5);
  CHECK(x.point(1)[2] == -1.0);

  const auto crlf = parse("0 0 1 0.25\r\n1\t0 0 0.75\r\n", 2);
  CHECK(crlf.weights()[1] == Approx(0.75));

  // near-unit vectors are renormalized
  const auto near = parse("0 0 1.0000000001\n", 2);
  CHECK(std::abs(near.point(0)[2] - 1.0) <= 1e-15);

  try {
    parse("0 0 0.5\n", 2);
    FAIL("expected norm error");
  } catch (const PointFileError& e) {
    CHECK(e.kind() == PointFileError::Kind::Norm);
    CHECK(e.line() == 1);
  }
  try {
    parse("0 0 1 0.7\n0 0 -1 0.4\n", 2);
    FAIL("expected weight error");
  } catch (const PointFileError& e) {
    CHECK(e.kind() == PointFileError::Kind::WeightSum);
  }
  try {
    parse("# c\n0 0 1\n0 1\n", 2);
    FAIL("expected parse error");
  } catch (const PointFileError& e) {
    CHECK(e.kind() == PointFileError::Kind::Parse);
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse("0 0 1 0.5\n0 0 -1\n", 2), PointFileError);
  CHECK_THROWS_AS(parse("0 0 abc\n", 2), PointFileError);
  CHECK_THROWS_AS(parse("# nothing\n", 2), PointFileError);

  // round trip
  const auto r = random_uniform(3, 17, 5);
  std::ostringstream out;
  write_pointset(out, r);
  const auto back = parse(out.str(), 3);
  CHECK(back.coords() == r.coords());
  CHECK(back.weights() == r.weights());
}

TEST_CASE("random uniform") {
  const auto a = random_uniform(2, 100, 42);
  const auto b = random_uniform(2, 100, 42);
  CHECK(a.coords() == b.coords());
  const auto big = random_uniform(2, 10000, 1);
  double mean[3] = {0, 0, 0};
  for (std::size_t i = 0; i < big.size(); ++i) {
    double n2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      mean[k] += big.point(i)[k] / big.size();
      n2 += big.point(i)[k] * big.point(i)[k];
    }
    CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-12);
  }
  CHECK(std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]) < 0.05);
}

TEST_CASE("spiral points") {
  const auto two = spiral_points(2);
  CHECK(two.point(0)[2] == Approx(0.5));
  CHECK(two.point(1)[2] == Approx(-0.5));
  for (std::size_t n : {100u, 400u, 1600u}) {
    const auto s = spiral_points(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = s.point(i);
      CHECK(std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0) <= 1e-12);
    }
    CHECK(separation(s).separation_constant >= 1.0);
  }
}

TEST_CASE("cap area") {
  for (int d = 2; d <= 5; ++d) {
    CHECK(cap_area(d, std::numbers::pi) == 1.0);
    CHECK(cap_area(d, std::numbers::pi / 2) == Approx(0.5).epsilon(1e-13));
  }
  CHECK(cap_area(2, std::numbers::pi / 3) == Approx(0.25).epsilon(1e-13));
  for (double phi : {0.1, 0.7, 2.0, 3.0}) CHECK(cap_area(2, phi) == Approx((1 - std::cos(phi)) / 2).epsilon(1e-13));
  CHECK_THROWS_AS(cap_area(2, -0.1), std::domain_error);
  CHECK_THROWS_AS(cap_area(2, 3.2), std::domain_error);
  for (int d = 2; d <= 5; ++d) {
    double prev = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double a = cap_area(d, std::numbers::pi * k / 100);
      CHECK(a > prev);
      prev = a;
    }
    for (double phi = 1e-3; phi <= 0.1; phi *= 1.5) {
      const double ratio = cap_area(d, phi) / std::pow(1 - std::cos(phi), d / 2.0);
      CHECK(ratio >= 1.0 / 3.0);
      CHECK(ratio <= 3.0);
    }
  }
}

TEST_CASE("separation") {
  const PointSet anti(2, {0, 0, 1, 0, 0, -1});
  CHECK(separation(anti).min_distance == 2.0);
  const PointSet square(2, {1, 0, 0, 0, 1, 0, -1, 0, 0, 0, -1, 0});
  CHECK(separation(square).min_distance == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(separation(square).min_angle == Approx(std::numbers::pi / 2).epsilon(1e-14));
  const PointSet dup(2, {0, 0, 1, 0, 0, 1, 1, 0, 0});
  CHECK(separation(dup).min_distance == 0.0);
  CHECK(separation(dup).separation_constant == 0.0);
}

TEST_CASE("property R") {
  const auto s = spiral_points(400);
  CHECK(property_r(s, 20, 1.0, 7).max_ratio < 10.0);

  const PointSet one(2, {0, 0, 1});
  const auto r = property_r(one, 1, 1.0, std::vector<double>{0, 0, 1});
  CHECK(r.max_ratio == Approx(1.0 / cap_area(2, 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(property_r(one, 1, 2.0, 7), std::invalid_argument);
}

TEST_CASE("rotation invariance") {
  const auto x = random_uniform(3, 60, 9);
  const auto q = oracle::random_orthogonal(4, 3);
  const auto y = rotate(x, q);
  CHECK(separation(y).min_distance == Approx(separation(x).min_distance).epsilon(1e-9));
  // probes rotated along with the nodes
  std::vector<double> probes = x.coords();
  const auto rp = rotate(PointSet(3, probes), q);
  CHECK(property_r(y, 3, 1.0, rp.coords()).max_ratio ==
        Approx(property_r(x, 3, 1.0, probes).max_ratio).epsilon(1e-9));
}

TEST_CASE("greedy packing") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p2 = greedy_packing(2, 2, 20000, seed);
    CHECK(p2.beta >= std::numbers::pi / 2 - 0.05);
  }
  const auto p6 = greedy_packing(2, 6, 20000, 4);
  CHECK(std::abs(p6.beta - std::numbers::pi / 4) <= 0.1 * std::numbers::pi / 4);

  for (int d : {2, 3}) {
    for (std::size_t m : {16u, 64u, 256u}) {
      const auto p = greedy_packing(d, m, 20 * m, 11);
      CHECK(p.size() == m);
      const double scaled = p.beta * std::pow(double(m), 1.0 / d);
      CHECK(scaled > 0.5);
      CHECK(scaled < 2.5);
      const int dim = d + 1;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          CHECK(angle_between({p.centers.data() + i * dim, std::size_t(dim)},
                              {p.centers.data() + j * dim, std::size_t(dim)}) >= 2 * p.beta);
        }
      }
    }
  }
}
