#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

// Orthogonal-polynomial and combinatorial primitives on [-1, 1] and S^d.
//
// Conventions:
//   * P_l^{(a,b)} is the Jacobi polynomial normalized by P_l^{(a,b)}(1) = binom(l + a, l).
//   * P_l^{(d)} is the generalized Legendre (normalized Gegenbauer) polynomial on S^d,
//     orthogonal for the weight (1 - t^2)^{d/2 - 1} with P_l^{(d)}(1) = 1.
//   * sigma_d is the normalized surface measure, sigma_d(S^d) = 1.
namespace sphwce {

struct JacobiIndex {
  double alpha;
  double beta;

  // Throws std::domain_error unless alpha > -1 and beta > -1.
  void validate() const;
};

double jacobi_eval(JacobiIndex idx, int ell, double t);

// Fills out[l] = P_l^{(a,b)}(t) for l = 0 .. out.size() - 1.
void jacobi_sweep(JacobiIndex idx, double t, std::span<double> out);

double legendre_d_eval(int d, int ell, double t);

// Fills out[l] = P_l^{(d)}(t) for l = 0 .. out.size() - 1 by the ascending
// recurrence (l + d - 1) P_{l+1} = (2l + d - 1) t P_l - l P_{l-1}.
void legendre_d_sweep(int d, double t, std::span<double> out);

// d/dt P_l^{(d)}(t) = l (l + d - 1) / d * P_{l-1}^{(d+2)}(t).
double legendre_d_derivative(int d, int ell, double t);

// Sum_l coeffs[l] P_l^{(d)}(t), backward (Clenshaw) evaluation.
double legendre_series(int d, std::span<const double> coeffs, double t);

// Batched Clenshaw: out[k] = Sum_l coeffs[l] P_l^{(d)}(ts[k]).
void legendre_series_batch(int d, std::span<const double> coeffs, std::span<const double> ts,
                           std::span<double> out);

// Z(d, l): dimension of the degree-l spherical harmonics on S^d, exact.
// Throws std::overflow_error if the value does not fit in 64 bits.
std::uint64_t dim_harmonics(int d, int ell);

// Z(d, l) as a double; exact while it fits in 64 bits, log-gamma otherwise.
double dim_harmonics_real(int d, int ell);

// lambda_l = l (l + d - 1), eigenvalue of the negative Laplace-Beltrami operator.
std::int64_t eigenvalue(int d, int ell);

// Pochhammer (a)_n via log-gamma, for a > 0 (and the exact special case a = 0).
double pochhammer(double a, int n);

// Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2)): maps the 1-D weighted integral to sigma_d.
double sphere_measure_constant(int d);

struct QuadratureRule1D {
  int d = 2;  // weight exponent is d/2 - 1
  std::vector<double> nodes;
  std::vector<double> weights;
  int exact_degree = 0;

  double integrate(const std::function<double(double)>& f) const;
};

// n-point Gauss rule for the weight (1 - t^2)^{d/2 - 1} on [-1, 1] (Golub-Welsch).
QuadratureRule1D gauss_quadrature(int d, int n);

struct IdentityCheck {
  std::string identity;
  std::string params;
  double residual = 0.0;  // |lhs - rhs| / max(1, sum of |terms|)
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double tol = 1e-10;
  bool passed = false;

  double max_residual() const;
};

// Evaluates the Jacobi / Gegenbauer identity suite for one dimension d over
// l <= l_max, the given t grid, and shift parameters k, L in 0..3.
IdentityReport verify_identities(int d, int l_max, std::span<const double> t_grid,
                                 double tol = 1e-10);

}  // namespace sphwce
