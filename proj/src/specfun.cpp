#include "sphwce/specfun.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sphwce/errors.hpp"

namespace sphwce {

namespace {

void require_unit_interval(double t) {
  if (!(std::abs(t) <= 1.0)) {
    std::ostringstream msg;
    msg << "argument t = " << t << " outside [-1, 1]";
    throw std::domain_error(msg.str());
  }
}

void require_dimension(int d) {
  if (d < 2) throw std::domain_error("sphere dimension d must be >= 2");
}

// Recurrence factors for P_{l+1}^{(d)} = A_l t P_l - B_l P_{l-1}.
inline double rec_a(int d, int l) { return double(2 * l + d - 1) / double(l + d - 1); }
inline double rec_b(int d, int l) { return double(l) / double(l + d - 1); }

}  // namespace

void JacobiIndex::validate() const {
  if (!(alpha > -1.0) || !(beta > -1.0)) {
    std::ostringstream msg;
    msg << "Jacobi indices must exceed -1 (alpha = " << alpha << ", beta = " << beta << ")";
    throw std::domain_error(msg.str());
  }
}

void jacobi_sweep(JacobiIndex idx, double t, std::span<double> out) {
  idx.validate();
  require_unit_interval(t);
  if (out.empty()) return;
  const double a = idx.alpha;
  const double b = idx.beta;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = (a + 1.0) + (a + b + 2.0) * (t - 1.0) / 2.0;
  for (std::size_t n = 2; n < out.size(); ++n) {
    const double nn = double(n);
    const double s = 2.0 * nn + a + b;
    const double c1 = 2.0 * nn * (nn + a + b) * (s - 2.0);
    const double c2 = (s - 1.0) * (a * a - b * b);
    const double c3 = (s - 2.0) * (s - 1.0) * s;
    const double c4 = 2.0 * (nn + a - 1.0) * (nn + b - 1.0) * s;
    out[n] = ((c2 + c3 * t) * out[n - 1] - c4 * out[n - 2]) / c1;
  }
}

double jacobi_eval(JacobiIndex idx, int ell, double t) {
  if (ell < 0) throw std::domain_error("polynomial degree must be >= 0");
  std::vector<double> values(static_cast<std::size_t>(ell) + 1);
  jacobi_sweep(idx, t, values);
  return values.back();
}

void legendre_d_sweep(int d, double t, std::span<double> out) {
  require_dimension(d);
  require_unit_interval(t);
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = t;
  for (std::size_t l = 1; l + 1 < out.size(); ++l) {
    const int li = static_cast<int>(l);
    out[l + 1] = rec_a(d, li) * t * out[l] - rec_b(d, li) * out[l - 1];
  }
}

double legendre_d_eval(int d, int ell, double t) {
  if (ell < 0) throw std::domain_error("polynomial degree must be >= 0");
  std::vector<double> values(static_cast<std::size_t>(ell) + 1);
  legendre_d_sweep(d, t, values);
  return values.back();
}

double legendre_d_derivative(int d, int ell, double t) {
  if (ell < 0) throw std::domain_error("polynomial degree must be >= 0");
  if (ell == 0) {
    require_unit_interval(t);
    return 0.0;
  }
  return double(eigenvalue(d, ell)) / double(d) * legendre_d_eval(d + 2, ell - 1, t);
}

double legendre_series(int d, std::span<const double> coeffs, double t) {
  double out = 0.0;
  legendre_series_batch(d, coeffs, std::span<const double>(&t, 1), std::span<double>(&out, 1));
  return out;
}

void legendre_series_batch(int d, std::span<const double> coeffs, std::span<const double> ts,
                           std::span<double> out) {
  require_dimension(d);
  if (out.size() != ts.size()) throw std::invalid_argument("batch size mismatch");
  for (double t : ts) require_unit_interval(t);
  if (coeffs.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const std::size_t n_terms = coeffs.size();
  std::vector<double> a(n_terms), b(n_terms + 1);
  for (std::size_t l = 0; l < n_terms; ++l) a[l] = rec_a(d, static_cast<int>(l));
  for (std::size_t l = 0; l <= n_terms; ++l) b[l] = rec_b(d, static_cast<int>(l));

  constexpr std::size_t kLanes = 8;
  std::size_t k0 = 0;
  for (; k0 + kLanes <= ts.size(); k0 += kLanes) {
    std::array<double, kLanes> t{}, b1{}, b2{}, b0{};
    for (std::size_t j = 0; j < kLanes; ++j) t[j] = ts[k0 + j];
    for (std::size_t l = n_terms; l-- > 0;) {
      const double al = a[l];
      const double bl = b[l + 1];
      const double cl = coeffs[l];
      for (std::size_t j = 0; j < kLanes; ++j) {
        b0[j] = cl + al * t[j] * b1[j] - bl * b2[j];
        b2[j] = b1[j];
        b1[j] = b0[j];
      }
    }
    for (std::size_t j = 0; j < kLanes; ++j) out[k0 + j] = b1[j];
  }
  for (std::size_t k = k0; k < ts.size(); ++k) {
    const double t = ts[k];
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t l = n_terms; l-- > 0;) {
      const double b0 = coeffs[l] + a[l] * t * b1 - b[l + 1] * b2;
      b2 = b1;
      b1 = b0;
    }
    out[k] = b1;
  }
}

std::uint64_t dim_harmonics(int d, int ell) {
  require_dimension(d);
  if (ell < 0) throw std::domain_error("degree must be >= 0");
  // Z(d, l) = (2l + d - 1) / (d - 1) * binom(l + d - 2, l); the division is exact.
  __extension__ typedef unsigned __int128 u128;
  const u128 limit = ~u128(0);
  const int k = d - 2;  // binom(l + d - 2, d - 2)
  u128 binom = 1;
  for (int i = 1; i <= k; ++i) {
    const u128 factor = static_cast<u128>(ell + i);
    if (binom > limit / factor) throw std::overflow_error("Z(d, l) overflows");
    binom = binom * factor / static_cast<u128>(i);
  }
  const u128 mult = static_cast<u128>(2 * static_cast<std::int64_t>(ell) + d - 1);
  if (binom > limit / mult) throw std::overflow_error("Z(d, l) overflows");
  const u128 z = binom * mult / static_cast<u128>(d - 1);
  if (z > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("Z(d, l) overflows");
  return static_cast<std::uint64_t>(z);
}

double dim_harmonics_real(int d, int ell) {
  try {
    return static_cast<double>(dim_harmonics(d, ell));
  } catch (const std::overflow_error&) {
    const double l = ell;
    return (2.0 * l + d - 1.0) *
           std::exp(std::lgamma(l + d - 1.0) - std::lgamma(double(d)) - std::lgamma(l + 1.0));
  }
}

std::int64_t eigenvalue(int d, int ell) {
  require_dimension(d);
  if (ell < 0) throw std::domain_error("degree must be >= 0");
  return static_cast<std::int64_t>(ell) * (static_cast<std::int64_t>(ell) + d - 1);
}

double pochhammer(double a, int n) {
  if (n < 0) throw std::domain_error("Pochhammer index must be >= 0");
  if (n == 0) return 1.0;
  if (a == 0.0) return 0.0;
  if (!(a > 0.0)) throw std::domain_error("pochhammer: a must be >= 0");
  return std::exp(std::lgamma(a + n) - std::lgamma(a));
}

double sphere_measure_constant(int d) {
  require_dimension(d);
  return std::exp(std::lgamma((d + 1) / 2.0) - std::lgamma(d / 2.0)) / std::sqrt(std::numbers::pi);
}

double QuadratureRule1D::integrate(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

QuadratureRule1D gauss_quadrature(int d, int n) {
  require_dimension(d);
  if (n < 1) throw std::domain_error("gauss_quadrature: n must be >= 1");
  const double mu = d / 2.0 - 1.0;
  const double mass =
      std::sqrt(std::numbers::pi) * std::exp(std::lgamma(mu + 1.0) - std::lgamma(mu + 1.5));

  QuadratureRule1D rule;
  rule.d = d;
  rule.exact_degree = 2 * n - 1;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {mass};
    return rule;
  }

  // Monic Gegenbauer recurrence p_{k+1} = t p_k - beta_k p_{k-1}.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) {
    const double kk = k;
    sub(k - 1) = std::sqrt(kk * (kk + 2.0 * mu) / (4.0 * (kk + mu) * (kk + mu) - 1.0));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("gauss_quadrature: tridiagonal eigen-solve did not converge");
  }

  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[i] = solver.eigenvalues()(i);
    rule.weights[i] = mass * v0 * v0;
  }
  // Symmetric weight: enforce exact node symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// ---------------------------------------------------------------------------
// Identity suite

double IdentityReport::max_residual() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.residual);
  return m;
}

namespace {

double scaled_residual(double lhs, double rhs, double magnitude) {
  const double r = std::abs(lhs - rhs) / std::max(1.0, magnitude);
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

// Max residual tracker for one (identity, parameter) group.
class Group {
 public:
  Group(std::string identity, std::string params)
      : identity_(std::move(identity)), params_(std::move(params)) {}

  void add(double residual, int ell, double t) {
    if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
    if (residual > worst_ || worst_ell_ < 0) {
      worst_ = residual;
      worst_ell_ = ell;
      worst_t_ = t;
    }
  }

  IdentityCheck finish() const {
    std::ostringstream p;
    p << params_ << " worst_l=" << worst_ell_ << " worst_t=" << worst_t_;
    return {identity_, p.str(), worst_ell_ < 0 ? 0.0 : worst_};
  }

 private:
  std::string identity_;
  std::string params_;
  double worst_ = 0.0;
  int worst_ell_ = -1;
  double worst_t_ = 0.0;
};

std::string dk(int d, const char* name, int k) {
  std::ostringstream s;
  s << "d=" << d << ' ' << name << '=' << k;
  return s.str();
}

// Closed form of int_{-1}^{1} P_l^{(a+L, a)}(t) (1 - t^2)^a dt.
double rodrigues_closed_form(double a, int shift, int ell) {
  if (shift == 0 && ell > 0) return 0.0;
  const double log_ratio = (shift == 0 ? 0.0 : std::lgamma(shift + ell) - std::lgamma(shift)) -
                           std::lgamma(ell + 1.0);
  return std::exp((2.0 * a + 1.0) * std::numbers::ln2 + log_ratio + std::lgamma(a + 1.0) +
                  std::lgamma(a + ell + 1.0) - std::lgamma(2.0 * a + ell + 2.0));
}

// Closed form of int_{S^d} P_l^{(d/2+L, d/2-1)}(<x, y>) dsigma_d(x).
double sphere_closed_form(int d, int shift, int ell) {
  return std::exp((d - 1) * std::numbers::ln2 + std::lgamma((d + 1) / 2.0) -
                  0.5 * std::log(std::numbers::pi) + std::lgamma(shift + 1.0 + ell) -
                  std::lgamma(shift + 1.0) - std::lgamma(ell + 1.0) + std::lgamma(d / 2.0 + ell) -
                  std::lgamma(double(d) + ell));
}

std::vector<double> icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  std::vector<double> v;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      const double p = a * s, q = b * phi * s;
      v.insert(v.end(), {0.0, p, q});
      v.insert(v.end(), {p, q, 0.0});
      v.insert(v.end(), {q, 0.0, p});
    }
  }
  return v;
}

}  // namespace

IdentityReport verify_identities(int d, int l_max, std::span<const double> t_grid, double tol) {
  require_dimension(d);
  if (l_max < 1) throw std::domain_error("verify_identities: l_max must be >= 1");
  for (double t : t_grid) require_unit_interval(t);

  const double mu = d / 2.0 - 1.0;
  const std::size_t n_deg = static_cast<std::size_t>(l_max) + 1;
  IdentityReport report;
  report.tol = tol;

  auto poch_ratio = [](double a, double b, int n) {
    // (a)_n / (b)_n
    return std::exp(std::lgamma(a + n) - std::lgamma(a) - std::lgamma(b + n) + std::lgamma(b));
  };

  std::vector<double> p_gd(n_deg), p_jac(n_deg), p_jac2(n_deg), p_jac3(n_deg);

  // Normalized Gegenbauer vs Jacobi form.
  {
    Group g("gegenbauer_jacobi", dk(d, "k", 0));
    for (double t : t_grid) {
      legendre_d_sweep(d, t, p_gd);
      jacobi_sweep({mu, mu}, t, p_jac);
      for (int l = 0; l <= l_max; ++l) {
        const double factor = std::exp(std::lgamma(l + 1.0) - std::lgamma(d / 2.0 + l) +
                                       std::lgamma(d / 2.0));
        const double rhs = factor * p_jac[l];
        g.add(scaled_residual(p_gd[l], rhs, std::max(std::abs(p_gd[l]), std::abs(rhs))), l, t);
      }
    }
    report.checks.push_back(g.finish());
  }

  for (int k = 0; k <= 3; ++k) {
    const JacobiIndex idx{mu + k, mu};
    const JacobiIndex swapped{mu, mu + k};
    const JacobiIndex raised{mu + k + 1.0, mu};

    Group gmax("jacobi_max", dk(d, "k", k));
    jacobi_sweep(idx, 1.0, p_jac);
    for (int l = 0; l <= l_max; ++l) {
      const double rhs = pochhammer(1.0 + idx.alpha, l) / std::exp(std::lgamma(l + 1.0));
      gmax.add(scaled_residual(p_jac[l], rhs, std::abs(rhs)), l, 1.0);
    }
    report.checks.push_back(gmax.finish());

    Group gminus("jacobi_minus", dk(d, "k", k));
    Group gcd("christoffel_darboux", dk(d, "k", k));
    Group gcd2("christoffel_darboux_2", dk(d, "k", k));
    for (double t : t_grid) {
      jacobi_sweep(idx, -t, p_jac);
      jacobi_sweep(swapped, t, p_jac2);
      for (int l = 0; l <= l_max; ++l) {
        const double rhs = (l % 2 == 0 ? 1.0 : -1.0) * p_jac2[l];
        gminus.add(scaled_residual(p_jac[l], rhs, std::max(std::abs(p_jac[l]), std::abs(rhs))), l,
                   t);
      }

      jacobi_sweep(idx, t, p_jac);
      jacobi_sweep(raised, t, p_jac3);
      const double a = idx.alpha, b = idx.beta;
      double lhs = 0.0, mag = 0.0;
      double lhs2 = 0.0, mag2 = 0.0;
      for (int l = 0; l <= l_max; ++l) {
        // General form in (alpha, beta).
        const double coef = (2.0 * l + a + b + 1.0) / (a + b + 1.0) * poch_ratio(a + b + 1.0, b + 1.0, l);
        lhs += coef * p_jac[l];
        mag += std::abs(coef * p_jac[l]);
        const double rhs = poch_ratio(a + b + 2.0, b + 1.0, l) * p_jac3[l];
        gcd.add(scaled_residual(lhs, rhs, std::max(mag, std::abs(rhs))), l, t);

        // Same identity written in the sphere parametrization.
        const double dk1 = d - 1.0 + k;
        const double coef2 = (2.0 * l + dk1) / dk1 * poch_ratio(dk1, d / 2.0, l);
        lhs2 += coef2 * p_jac[l];
        mag2 += std::abs(coef2 * p_jac[l]);
        const double rhs2 = poch_ratio(d + double(k), d / 2.0, l) * p_jac3[l];
        gcd2.add(scaled_residual(lhs2, rhs2, std::max(mag2, std::abs(rhs2))), l, t);
      }
    }
    report.checks.push_back(gminus.finish());
    report.checks.push_back(gcd.finish());
    report.checks.push_back(gcd2.finish());
  }

  // Reproducing-kernel partial sums: sum_r Z(d,r) P_r^{(d)}.
  {
    Group g("christoffel_darboux_1", dk(d, "k", 0));
    Group gj("christoffel_darboux_1_jacobi", dk(d, "k", 0));
    for (double t : t_grid) {
      legendre_d_sweep(d, t, p_gd);
      jacobi_sweep({mu, mu}, t, p_jac);
      jacobi_sweep({d / 2.0, mu}, t, p_jac3);
      double lhs = 0.0, mag = 0.0, lhsj = 0.0, magj = 0.0;
      for (int l = 0; l <= l_max; ++l) {
        const double z = dim_harmonics_real(d, l);
        lhs += z * p_gd[l];
        mag += std::abs(z * p_gd[l]);
        const double cj = (2.0 * l + d - 1.0) / (d - 1.0) * poch_ratio(d - 1.0, d / 2.0, l);
        lhsj += cj * p_jac[l];
        magj += std::abs(cj * p_jac[l]);
        const double rhs = poch_ratio(double(d), d / 2.0, l) * p_jac3[l];
        g.add(scaled_residual(lhs, rhs, std::max(mag, std::abs(rhs))), l, t);
        gj.add(scaled_residual(lhsj, rhs, std::max(magj, std::abs(rhs))), l, t);
      }
    }
    report.checks.push_back(g.finish());
    report.checks.push_back(gj.finish());
  }

  // Integral identities by Gauss quadrature for the weight (1 - t^2)^{d/2-1}.
  const QuadratureRule1D rule = gauss_quadrature(d, l_max + 1);  // exact to degree 2 l_max + 1
  const double cd = sphere_measure_constant(d);
  for (int shift = 0; shift <= 3; ++shift) {
    Group g2("rodrigues_integral", dk(d, "L", shift));
    Group g3("sphere_integral", dk(d, "L", shift));
    std::vector<double> quad2(n_deg, 0.0), abs2(n_deg, 0.0), quad3(n_deg, 0.0), abs3(n_deg, 0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      jacobi_sweep({mu + shift, mu}, rule.nodes[i], p_jac);
      jacobi_sweep({d / 2.0 + shift, mu}, rule.nodes[i], p_jac2);
      for (std::size_t l = 0; l < n_deg; ++l) {
        quad2[l] += rule.weights[i] * p_jac[l];
        abs2[l] += rule.weights[i] * std::abs(p_jac[l]);
        quad3[l] += rule.weights[i] * p_jac2[l];
        abs3[l] += rule.weights[i] * std::abs(p_jac2[l]);
      }
    }
    for (int l = 0; l <= l_max; ++l) {
      const double rhs2 = rodrigues_closed_form(mu, shift, l);
      g2.add(scaled_residual(quad2[l], rhs2, std::max(abs2[l], std::abs(rhs2))), l, 0.0);
      const double rhs3 = sphere_closed_form(d, shift, l);
      g3.add(scaled_residual(cd * quad3[l], rhs3, std::max(cd * abs3[l], std::abs(rhs3))), l, 0.0);
    }
    report.checks.push_back(g2.finish());
    report.checks.push_back(g3.finish());
  }

  // On S^2 the icosahedron (a 5-design) reproduces the sphere integral exactly.
  if (d == 2) {
    const std::vector<double> ico = icosahedron();
    const std::size_t n_pts = ico.size() / 3;
    const int top = std::min(5, l_max);
    std::vector<double> vals(static_cast<std::size_t>(top) + 1);
    for (int shift = 0; shift <= 3; ++shift) {
      Group g("design_sphere_integral", dk(d, "L", shift));
      for (std::size_t j = 0; j < n_pts; ++j) {
        std::vector<double> avg(vals.size(), 0.0), mag(vals.size(), 0.0);
        for (std::size_t i = 0; i < n_pts; ++i) {
          double t = 0.0;
          for (int c = 0; c < 3; ++c) t += ico[3 * i + c] * ico[3 * j + c];
          t = std::clamp(t, -1.0, 1.0);
          jacobi_sweep({d / 2.0 + shift, mu}, t, vals);
          for (std::size_t l = 0; l < vals.size(); ++l) {
            avg[l] += vals[l] / double(n_pts);
            mag[l] += std::abs(vals[l]) / double(n_pts);
          }
        }
        for (int l = 0; l <= top; ++l) {
          const double rhs = sphere_closed_form(d, shift, l);
          g.add(scaled_residual(avg[l], rhs, std::max(mag[l], std::abs(rhs))), l, double(j));
        }
      }
      report.checks.push_back(g.finish());
    }
  }

  report.passed = true;
  for (const auto& c : report.checks) {
    if (!(c.residual <= tol)) report.passed = false;
  }
  return report;
}

}  // namespace sphwce
