#include "sphwce/fooling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gram.hpp"
#include "sphwce/errors.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

namespace {

constexpr int kPanelPoints = 32;
constexpr int kMaxSmoothing = 6;  // (1 - Laplacian)^k for k <= 6
constexpr double kSafety = 1.01;
constexpr double kRemainderTol = 1e-9;
constexpr double kCoeffTol = 1e-10;

void require_beta(double beta) {
  if (!(beta > 0.0 && beta <= std::numbers::pi / 2)) {
    throw std::domain_error("bump: beta must lie in (0, pi/2]");
  }
}

struct Annulus {
  double mid, half_width;
};

Annulus annulus(double beta) {
  const double hi = std::cos(beta / 2), lo = std::cos(beta);
  // cos(b/2) - cos(b) = 2 sin(3b/4) sin(b/4), no cancellation for small beta
  return {0.5 * (hi + lo), std::sin(0.75 * beta) * std::sin(0.25 * beta)};
}

// Composite Gauss-Legendre in theta over [beta/2, beta]; fn(theta, weight).
template <class Fn>
void for_theta_nodes(double beta, int panels, Fn&& fn) {
  static const QuadratureRule1D gl = gauss_quadrature(2, kPanelPoints);
  const double lo = beta / 2, width = (beta - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    for (int k = 0; k < kPanelPoints; ++k) fn(mid + 0.5 * width * gl.nodes[k], 0.5 * width * gl.weights[k]);
  }
}

std::vector<double> coeffs_on(double beta, int d, int L, int panels) {
  std::vector<double> a(static_cast<std::size_t>(L) + 1, 0.0), p(a.size());
  const double cd = sphere_measure_constant(d);
  for_theta_nodes(beta, panels, [&](double th, double w) {
    const double t = std::cos(th);
    const double f = cd * w * bump_scaled(beta, t) * std::pow(std::sin(th), d - 1);
    if (f == 0.0) return;
    legendre_d_sweep(d, t, p);
    for (std::size_t l = 0; l < a.size(); ++l) a[l] += f * p[l];
  });
  return a;
}

// Taylor coefficients of bump(u0 + tau) up to order n.
std::vector<double> bump_jet(double u0, int n) {
  std::vector<double> e(n + 1, 0.0);
  const double q0 = 1.0 - u0 * u0;
  if (!(q0 > 0.0) || 1.0 / q0 > 700.0) return e;
  // 1/q with q = q0 - 2 u0 tau - tau^2
  std::vector<double> r(n + 1), g(n + 1);
  r[0] = 1.0 / q0;
  for (int j = 1; j <= n; ++j) {
    const double prev2 = j >= 2 ? r[j - 2] : 0.0;
    r[j] = (2.0 * u0 * r[j - 1] + prev2) / q0;
  }
  g[0] = 1.0 - r[0];
  for (int j = 1; j <= n; ++j) g[j] = -r[j];
  e[0] = std::exp(g[0]);
  for (int m = 1; m <= n; ++m) {
    double s = 0.0;
    for (int j = 1; j <= m; ++j) s += j * g[j] * e[m - j];
    e[m] = s / m;
  }
  return e;
}

// (1 - D) on a Taylor jet at t0, D g = (1 - t^2) g'' - d t g'. Loses two orders.
std::vector<double> smooth_once(const std::vector<double>& a, double t0, int d) {
  const int n = static_cast<int>(a.size()) - 1;
  std::vector<double> b(n - 1);
  auto g1 = [&](int j) { return j < 0 ? 0.0 : (j + 1) * a[j + 1]; };
  auto g2 = [&](int j) { return j < 0 ? 0.0 : (j + 2.0) * (j + 1.0) * a[j + 2]; };
  for (int j = 0; j <= n - 2; ++j) {
    const double lap = (1.0 - t0 * t0) * g2(j) - 2.0 * t0 * g2(j - 1) - g2(j - 2) - d * (t0 * g1(j) + g1(j - 1));
    b[j] = a[j] - lap;
  }
  return b;
}

// S_k = int ((1 - Laplacian)^k bump)^2 dsigma, k = 0..kMaxSmoothing.
using SmoothNorms = std::array<double, kMaxSmoothing + 1>;

SmoothNorms smooth_norms_on(double beta, int d, int panels) {
  const Annulus an = annulus(beta);
  const double cd = sphere_measure_constant(d);
  SmoothNorms s{};
  for_theta_nodes(beta, panels, [&](double th, double w) {
    const double t0 = std::cos(th);
    std::vector<double> jet = bump_jet((t0 - an.mid) / an.half_width, 2 * kMaxSmoothing);
    double scale = 1.0;
    for (double& c : jet) {
      c *= scale;
      scale /= an.half_width;
    }
    const double mass = cd * w * std::pow(std::sin(th), d - 1);
    for (int k = 0; k <= kMaxSmoothing; ++k) {
      s[k] += mass * jet[0] * jet[0];
      if (k < kMaxSmoothing) jet = smooth_once(jet, t0, d);
    }
  });
  return s;
}

SmoothNorms smooth_norms(double beta, int d) {
  int panels = 16;
  SmoothNorms prev = smooth_norms_on(beta, d, panels);
  for (int it = 0; it < 12; ++it) {
    panels *= 2;
    const SmoothNorms cur = smooth_norms_on(beta, d, panels);
    bool ok = true;
    for (int k = 0; k <= kMaxSmoothing; ++k) ok = ok && std::abs(cur[k] - prev[k]) <= 1e-8 * cur[k];
    if (ok) return cur;
    prev = cur;
  }
  throw NumericalFailure("fooling: smoothness integrals did not converge");
}

// sup_{l > L} w_l / (1 + lambda_l)^{2k}, or +inf when monotonicity is not guaranteed.
double weight_ratio_sup(const SpaceSpec& space, int L, int k) {
  const double lam = double(eigenvalue(space.d, L + 1));
  const double p = space.parameter();
  if (space.is_sobolev()) {
    if (2.0 * k <= p) return std::numeric_limits<double>::infinity();
  } else if (2.0 * p / std::log(3.0 + lam) >= 2.0 * k - space.d / 2.0) {
    return std::numeric_limits<double>::infinity();
  }
  return weight(space, L + 1) / std::pow(1.0 + lam, 2.0 * k);
}

// Bound on Sum_{l > L} w_l ||proj_l f||^2 for a sum of `caps` disjoint bumps.
double remainder_bound(const SpaceSpec& space, int L, const SmoothNorms& s, std::size_t caps) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kMaxSmoothing; ++k) best = std::min(best, weight_ratio_sup(space, L, k) * s[k]);
  return kSafety * double(caps) * best;
}

}  // namespace

double bump(double u) {
  if (!(std::abs(u) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double bump_scaled(double beta, double t) {
  require_beta(beta);
  const Annulus an = annulus(beta);
  return bump((t - an.mid) / an.half_width);
}

std::vector<double> funk_hecke_coeffs(double beta, int d, int L, int quad_n) {
  require_beta(beta);
  if (d < 2) throw std::invalid_argument("funk_hecke_coeffs: d must be >= 2");
  if (L < 0) throw std::invalid_argument("funk_hecke_coeffs: L must be >= 0");
  if (quad_n < 1) throw std::invalid_argument("funk_hecke_coeffs: quad_n must be positive");
  const int panels = std::max(1, (quad_n + kPanelPoints - 1) / kPanelPoints);
  const auto coarse = coeffs_on(beta, d, L, panels);
  auto fine = coeffs_on(beta, d, L, 2 * panels);
  double scale = 0.0, diff = 0.0;
  for (std::size_t l = 0; l < fine.size(); ++l) {
    scale = std::max(scale, std::abs(fine[l]));
    diff = std::max(diff, std::abs(fine[l] - coarse[l]));
  }
  if (diff > kCoeffTol * scale) {
    std::ostringstream msg;
    msg << "funk_hecke_coeffs: quadrature unresolved at quad_n = " << quad_n << " (change " << diff / scale << ")";
    throw NumericalFailure(msg.str());
  }
  return fine;
}

std::vector<FoolingWitness> build_witnesses(const PointSet& x, std::span<const SpaceSpec> spaces,
                                            std::size_t m, int L, std::uint64_t seed) {
  if (spaces.empty()) throw std::invalid_argument("build_witness: no spaces given");
  for (const auto& sp : spaces) {
    sp.validate();
    if (sp.d != x.d()) throw std::invalid_argument("build_witness: dimensions differ");
  }
  if (m < 1) throw std::invalid_argument("build_witness: M must be >= 1");
  if (L < 0) throw std::invalid_argument("build_witness: L must be >= 0");
  const int d = x.d(), dim = d + 1;

  const Packing pack = greedy_packing(d, 2 * m, 20 * m + 1000, seed);
  FoolingWitness base;
  base.beta = pack.beta;
  base.packing = Packing{d, {}, pack.beta};
  const double cut = std::cos(pack.beta) - 1e-12;
  for (std::size_t c = 0; c < pack.size(); ++c) {
    const double* y = pack.centers.data() + c * dim;
    bool empty = true;
    for (std::size_t i = 0; i < x.size() && empty; ++i) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += x.point(i)[k] * y[k];
      empty = s < cut;
    }
    if (empty) base.packing.centers.insert(base.packing.centers.end(), y, y + dim);
  }
  const std::size_t kept = base.packing.size();
  if (kept == 0) return std::vector<FoolingWitness>(spaces.size(), base);

  const std::vector<double> ones(kept, 1.0);
  const gram::Nodes centers{d, base.packing.centers, ones};
  auto coeffs_at = [&](int deg) {
    int quad_n = kPanelPoints * std::max(8, static_cast<int>(std::ceil(deg * pack.beta / 16.0)));
    for (int attempt = 0;; ++attempt) {
      try {
        return funk_hecke_coeffs(pack.beta, d, deg, quad_n);
      } catch (const NumericalFailure&) {
        if (attempt >= 6) throw;
        quad_n *= 2;
      }
    }
  };
  // Sum_{l <= deg} a_l^2 w_l Z G_l, largest degree first
  auto truncated_norm_sq = [&](const SpaceSpec& sp, const std::vector<double>& a, const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t l = g.size(); l-- > 0;) s += a[l] * a[l] * weight(sp, int(l)) * dim_harmonics_real(d, int(l)) * g[l];
    return s;
  };

  const SmoothNorms sn = smooth_norms(pack.beta, d);
  if (L == 0) {
    // G_l >= 0, so a short truncation is already a lower bound for every norm
    const int l0 = std::max(8, static_cast<int>(std::ceil(40.0 / pack.beta)));
    const auto a0 = coeffs_at(l0);
    const auto g0 = gram::legendre_sums(centers, l0);
    for (const auto& sp : spaces) {
      const double floor =
          std::max(weight(sp, 0) * double(kept) * sn[0], truncated_norm_sq(sp, a0, g0));
      int deg = l0;
      while (remainder_bound(sp, deg, sn, kept) > kRemainderTol * floor) {
        deg = static_cast<int>(std::ceil(1.08 * deg));
        if (deg > 400000) throw NumericalFailure("build_witness: no admissible degree below 400000");
      }
      L = std::max(L, deg);
    }
  }
  base.L = L;
  base.coeffs = coeffs_at(L);
  const auto g = gram::legendre_sums(centers, L);
  base.integral = double(kept) * base.coeffs[0];

  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = 0.0;
    for (std::size_t c = 0; c < kept; ++c) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += x.point(i)[k] * base.packing.centers[c * dim + k];
      f += bump_scaled(pack.beta, s);
    }
    base.max_node_value = std::max(base.max_node_value, std::abs(f));
  }
  bool disjoint = true;
  const std::span<const double> yc(base.packing.centers);
  for (std::size_t a = 0; a < kept && disjoint; ++a) {
    for (std::size_t c = a + 1; c < kept && disjoint; ++c) {
      disjoint = angle_between(yc.subspan(a * dim, dim), yc.subspan(c * dim, dim)) >= 2.0 * pack.beta * (1.0 - 1e-12);
    }
  }
  base.valid = disjoint && base.max_node_value <= 1e-12;

  std::vector<FoolingWitness> out;
  for (const auto& sp : spaces) {
    FoolingWitness w = base;
    w.norm_sq_truncated = truncated_norm_sq(sp, w.coeffs, g);
    w.remainder_sq = remainder_bound(sp, L, sn, kept);
    if (!(w.remainder_sq <= kRemainderTol * w.norm_sq_truncated)) {
      std::ostringstream msg;
      msg << "build_witness: coefficient decay at L = " << L << " too slow for a sound norm bound";
      throw NumericalFailure(msg.str());
    }
    w.norm = std::sqrt(w.norm_sq_truncated + w.remainder_sq);
    w.witness = w.integral / w.norm;
    out.push_back(std::move(w));
  }
  return out;
}

FoolingWitness build_witness(const PointSet& x, const SpaceSpec& space, std::size_t m, int L,
                             std::uint64_t seed) {
  return build_witnesses(x, std::span<const SpaceSpec>(&space, 1), m, L, seed).front();
}

}  // namespace sphwce
