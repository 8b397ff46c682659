#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "sphwce/errors.hpp"
#include "sphwce/fooling.hpp"
#include "sphwce/quaderr.hpp"
#include "sphwce/specfun.hpp"

using namespace sphwce;
using doctest::Approx;

namespace {

// Composite Simpson in theta of g(theta) sin^{d-1} theta, normalized to sigma_d.
template <class Fn>
double simpson_sphere(int d, double lo, double hi, int n, Fn&& g) {
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double th = lo + k * h;
    const double c = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += c * g(th) * std::pow(std::sin(th), d - 1);
  }
  return s * h / 3.0 * sphere_measure_constant(d);
}

}  // namespace

TEST_CASE("bump profile") {
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(0.5) == Approx(std::exp(-1.0 / 3.0)).epsilon(1e-15));
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-1.2) == 0.0);
  const double b = std::numbers::pi / 2;
  const double lo = std::cos(b), hi = std::cos(b / 2);
  const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
  CHECK(bump_scaled(b, mid) == Approx(1.0).epsilon(1e-14));
  CHECK(bump_scaled(b, mid + 0.5 * hw) == Approx(std::exp(-1.0 / 3.0)).epsilon(1e-12));
  CHECK(bump_scaled(b, lo - 1e-9) == 0.0);
  CHECK(bump_scaled(b, hi + 1e-9) == 0.0);
  CHECK(bump_scaled(0.3, 1.0) == 0.0);
  CHECK_THROWS_AS(bump_scaled(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(bump_scaled(1.6, 0.5), std::domain_error);
}

TEST_CASE("funk-hecke reconstruction") {
  const double beta = 0.5;
  const auto full = funk_hecke_coeffs(beta, 2, 3200, 2048);
  REQUIRE(full.size() == 3201);
  CHECK(std::abs(full[3200]) <= 1e-12);
  auto sup_error = [&](int L) {
    std::vector<double> c(L + 1);
    for (int l = 0; l <= L; ++l) c[l] = full[l] * dim_harmonics_real(2, l);
    double worst = 0.0;
    for (int k = 0; k <= 4000; ++k) {
      const double t = -1.0 + 2.0 * k / 4000.0;
      worst = std::max(worst, std::abs(legendre_series(2, c, t) - bump_scaled(beta, t)));
    }
    return worst;
  };
  // |P_l| <= 1, so the truncation error is at most the tail of |a_l| Z
  auto tail = [&](int L) {
    double s = 0.0;
    for (int l = 3200; l > L; --l) s += std::abs(full[l]) * dim_harmonics_real(2, l);
    return s;
  };
  for (int L : {400, 800, 1600}) CHECK(sup_error(L) <= tail(L) + 1e-12);
  CHECK(sup_error(1600) <= 1e-5);
  CHECK(sup_error(3200) <= 1e-6);
  const auto a = funk_hecke_coeffs(beta, 2, 400, 512);
  for (int l = 0; l <= 400; ++l) CHECK(std::abs(a[l] - full[l]) <= 1e-12);

  // individual coefficients against a Simpson oracle, d = 3
  const auto a3 = funk_hecke_coeffs(0.7, 3, 30, 256);
  for (int l : {0, 1, 7, 30}) {
    const double ref = simpson_sphere(3, 0.35, 0.7, 20000, [&](double th) {
      return bump_scaled(0.7, std::cos(th)) * legendre_d_eval(3, l, std::cos(th));
    });
    CHECK(std::abs(a3[l] - ref) <= 1e-11);
  }

  // Parseval: Sum a_l^2 Z = int bump^2
  const auto a2 = funk_hecke_coeffs(0.4, 2, 2000, 2048);
  double parseval = 0.0;
  for (int l = 2000; l >= 0; --l) parseval += a2[l] * a2[l] * dim_harmonics_real(2, l);
  const double direct = simpson_sphere(2, 0.2, 0.4, 40000, [](double th) {
    const double v = bump_scaled(0.4, std::cos(th));
    return v * v;
  });
  CHECK(parseval == Approx(direct).epsilon(1e-9));

  CHECK_THROWS_AS(funk_hecke_coeffs(0.5, 2, 400, 8), NumericalFailure);
}

TEST_CASE("single node witness") {
  const PointSet pole(2, {0, 0, 1});
  const auto sp = SpaceSpec::log_sobolev(2, 1.0);
  const auto w = build_witness(pole, sp, 8, 0, 1);
  CHECK(w.valid);
  CHECK(w.witness > 0.0);
  CHECK(w.packing.size() >= 8);
  CHECK(w.max_node_value <= 1e-12);
  CHECK(w.remainder_sq <= 1e-9 * w.norm_sq_truncated);
  CHECK(w.integral == Approx(double(w.packing.size()) * w.coeffs[0]));
  const auto e = wce(pole, sp, 4000);
  CHECK(w.witness <= std::sqrt(e.value_sq + e.tail_bound_sq));
}

TEST_CASE("norm bound is conservative") {
  const auto x = random_uniform(2, 20, 3);
  const auto sp = SpaceSpec::log_sobolev(2, 0.75);
  const auto w1 = build_witness(x, sp, 20, 0, 9);
  const auto w2 = build_witness(x, sp, 20, 2 * w1.L, 9);
  CHECK(w1.norm_sq_truncated + w1.remainder_sq >= w2.norm_sq_truncated * (1.0 - 1e-12));
  CHECK(std::abs(w1.witness - w2.witness) <= 1e-6 * w2.witness);

  const auto s = SpaceSpec::sobolev(2, 1.5);
  const auto v1 = build_witness(x, s, 20, 0, 9);
  const auto v2 = build_witness(x, s, 20, 2 * v1.L, 9);
  CHECK(v1.norm_sq_truncated + v1.remainder_sq >= v2.norm_sq_truncated * (1.0 - 1e-12));
}

TEST_CASE("witness never exceeds wce") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 2 + trial % 2;
    const std::size_t n = 1 + rng() % 40;
    const auto x = random_uniform(d, n, rng());
    const auto sp = trial % 3 == 2 ? SpaceSpec::sobolev(d, d / 2.0 + 0.5)
                                   : SpaceSpec::log_sobolev(d, 0.75 + 0.5 * (trial % 2));
    const auto w = build_witness(x, sp, n, 0, rng());
    CHECK(w.valid);
    CHECK(w.packing.size() >= n);
    const auto e = wce_moments(x, sp, 3000);
    CHECK(w.witness <= std::sqrt(e.value_sq + e.tail_bound_sq));
  }
}

TEST_CASE("witness argument checks") {
  const PointSet pole(2, {0, 0, 1});
  CHECK_THROWS_AS(build_witness(pole, SpaceSpec::log_sobolev(3, 1.0), 4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_witness(pole, SpaceSpec::log_sobolev(2, 1.0), 0, 0, 1), std::invalid_argument);
  // degree far too low for the remainder bound
  CHECK_THROWS_AS(build_witness(pole, SpaceSpec::log_sobolev(2, 1.0), 8, 3, 1), NumericalFailure);
}

TEST_CASE("shared witnesses match single ones") {
  const auto x = random_uniform(2, 12, 21);
  const std::vector<SpaceSpec> spaces{SpaceSpec::log_sobolev(2, 0.75), SpaceSpec::log_sobolev(2, 2.0),
                                      SpaceSpec::sobolev(2, 1.5)};
  const auto all = build_witnesses(x, spaces, 12, 0, 4);
  REQUIRE(all.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto one = build_witness(x, spaces[k], 12, all[k].L, 4);
    CHECK(one.witness == Approx(all[k].witness).epsilon(1e-13));
    CHECK(one.L == all[0].L);
  }
}
