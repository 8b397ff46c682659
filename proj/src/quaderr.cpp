#include "sphwce/quaderr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gram.hpp"
#include "sphwce/errors.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

namespace {

gram::Nodes nodes_of(const PointSet& x) { return {x.d(), x.coords(), x.weights()}; }

void require_degree(int L) {
  if (L < 1) throw std::invalid_argument("truncation degree L must be >= 1");
}

}  // namespace

std::string to_string(WcePath path) {
  switch (path) {
    case WcePath::PairwiseKernel: return "pairwise-kernel";
    case WcePath::PerDegreeMoments: return "per-degree-moments";
    case WcePath::HeatOracle: return "heat-oracle";
  }
  return "unknown";
}

std::vector<double> gram_moments(const PointSet& x, int L) {
  if (L < 0) throw std::invalid_argument("gram_moments: L must be >= 0");
  std::vector<double> m = gram::legendre_sums(nodes_of(x), L);
  for (int l = 0; l <= L; ++l) m[l] *= dim_harmonics_real(x.d(), l);
  return m;
}

double gram_moment(const PointSet& x, int ell) { return gram_moments(x, ell).back(); }

WceReport wce(const PointSet& x, const SpaceSpec& space, int L) {
  require_degree(L);
  if (space.d != x.d()) throw std::invalid_argument("wce: space and point set dimensions differ");
  const CoeffTable tab = build_coeffs(space, L, false);
  WceReport r;
  r.space = space;
  r.L = L;
  r.path = WcePath::PairwiseKernel;
  r.value_sq = gram::series_sum(nodes_of(x), x.d(), tab.c);
  r.value = std::sqrt(std::max(r.value_sq, 0.0));
  const double aw = x.abs_weight_sum();
  r.tail_bound_sq = aw * aw * tab.tail_at_one;
  return r;
}

WceReport wce_from_moments(const std::vector<double>& moments, const SpaceSpec& space,
                           double abs_weight_sum) {
  const int L = static_cast<int>(moments.size()) - 1;
  require_degree(L);
  WceReport r;
  r.space = space;
  r.L = L;
  r.path = WcePath::PerDegreeMoments;
  double s = 0.0;
  for (int l = L; l >= 1; --l) s += moments[l] / weight(space, l);
  r.value_sq = s;
  r.value = std::sqrt(std::max(s, 0.0));
  r.tail_bound_sq = abs_weight_sum * abs_weight_sum * tail_at_one(space, L);
  return r;
}

WceReport wce_moments(const PointSet& x, const SpaceSpec& space, int L) {
  require_degree(L);
  if (space.d != x.d()) throw std::invalid_argument("wce_moments: space and point set dimensions differ");
  return wce_from_moments(gram_moments(x, L), space, x.abs_weight_sum());
}

DesignReport validate_design(const PointSet& x, int t, double tol) {
  if (t < 1) throw std::invalid_argument("validate_design: t must be >= 1");
  DesignReport rep;
  rep.t = t;
  rep.tol = tol < 0.0 ? 1e-10 * double(x.size()) : tol;
  const auto m = gram_moments(x, t);
  rep.residuals.assign(m.begin() + 1, m.end());
  for (double v : rep.residuals) rep.max_residual = std::max(rep.max_residual, std::abs(v));
  rep.is_design = rep.max_residual <= rep.tol;
  return rep;
}

Certificate certificate_from_moments(const std::vector<double>& moments, const SpaceSpec& space) {
  const int L = static_cast<int>(moments.size()) - 1;
  require_degree(L);
  Certificate c{1, moments[1] / weight(space, 1)};
  for (int l = 2; l <= L; ++l) {
    const double v = moments[l] / weight(space, l);
    if (v > c.bound_sq) c = {l, v};
  }
  c.bound_sq = std::max(c.bound_sq, 0.0);
  return c;
}

Certificate lower_certificate(const PointSet& x, const SpaceSpec& space, int L) {
  require_degree(L);
  if (x.has_negative_weight()) {
    throw std::invalid_argument("lower_certificate: signed weights are not supported");
  }
  return certificate_from_moments(gram_moments(x, L), space);
}

double heat_trace(const std::vector<double>& moments, int d, double t) {
  double h = 0.0;
  for (std::size_t l = 1; l < moments.size(); ++l) {
    const double e = double(eigenvalue(d, static_cast<int>(l))) * t;
    if (e > 745.0) break;
    h += std::exp(-e) * moments[l];
  }
  return h;
}

WceReport wce_heat_oracle(const PointSet& x, const SpaceSpec& space, int L_heat,
                          const HeatQuadrature& quad) {
  if (!space.is_sobolev()) throw std::invalid_argument("heat oracle needs a Sobolev space");
  space.validate();
  require_degree(L_heat);
  if (space.d != x.d()) throw std::invalid_argument("heat oracle: dimensions differ");

  const int d = x.d();
  const double s = space.parameter();
  const std::vector<double> m = gram_moments(x, L_heat);
  double h_abs = 0.0;
  for (std::size_t l = 1; l < m.size(); ++l) h_abs += std::abs(m[l]);
  const double a = 1.0 + double(eigenvalue(d, 1));
  const double log_gamma_s = std::lgamma(s);

  const QuadratureRule1D gl = gauss_quadrature(2, quad.points_per_panel);
  // (1/Gamma(s)) int e^{-t} t^{s-1} h(t) dt over [e^lo, e^hi], in u = ln t
  auto integrate = [&](double lo, double hi, int panels) {
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * width;
      double panel = 0.0;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double u = mid + 0.5 * width * gl.nodes[k];
        const double t = std::exp(u);
        panel += gl.weights[k] * std::exp(s * u - t - log_gamma_s) * heat_trace(m, d, t);
      }
      total += 0.5 * width * panel;
    }
    return total;
  };

  auto resolved = [&](double lo, double hi) {
    int panels = std::max(quad.initial_panels, static_cast<int>(std::ceil(2.0 * (hi - lo))));
    double prev = integrate(lo, hi, panels);
    for (int k = 0; k < quad.max_doublings; ++k) {
      panels *= 2;
      const double cur = integrate(lo, hi, panels);
      if (std::abs(cur - prev) <= quad.rel_tol * std::abs(cur)) return cur;
      prev = cur;
    }
    throw NumericalFailure("heat oracle: panel doubling did not converge");
  };

  auto upper_remainder = [&](double T) {
    double tail = 0.0;
    if (s >= 1.0) {
      const double slope = a - (s - 1.0) / T;
      if (slope <= 0.0) return std::numeric_limits<double>::infinity();
      tail = std::exp((s - 1.0) * std::log(T) - a * T) / slope;
    } else {
      tail = std::exp((s - 1.0) * std::log(T) - a * T) / a;
    }
    return h_abs * tail / std::exp(log_gamma_s);
  };
  auto lower_remainder = [&](double t_min) { return h_abs * std::pow(t_min, s) / std::tgamma(s + 1.0); };

  double t_min = 1e-2, t_max = 8.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double value = resolved(std::log(t_min), std::log(t_max));
    const double target = quad.remainder_tol * std::abs(value);
    const double lo_rem = lower_remainder(t_min);
    const double hi_rem = upper_remainder(t_max);
    if (lo_rem > target && t_min > 1e-300) {
      t_min *= 1e-2;
      continue;
    }
    if (hi_rem > target && t_max < 1e6) {
      t_max *= 2.0;
      continue;
    }
    if (lo_rem > target || hi_rem > target) break;
    WceReport r;
    r.space = space;
    r.L = L_heat;
    r.path = WcePath::HeatOracle;
    r.value_sq = value;
    r.value = std::sqrt(std::max(value, 0.0));
    const double aw = x.abs_weight_sum();
    r.tail_bound_sq = aw * aw * tail_at_one(space, L_heat) + lo_rem + hi_rem;
    return r;
  }
  std::ostringstream msg;
  msg << "heat oracle: remainder targets unreachable for L_heat = " << L_heat;
  throw NumericalFailure(msg.str());
}

}  // namespace sphwce
