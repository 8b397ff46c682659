#include "sphwce/designopt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "gram.hpp"
#include "sphwce/parallel.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

namespace {

constexpr std::size_t kRowBlock = 32;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Coefficients c_0..c_L of the pair function F(t) = Sum c_l P_l^{(d)}(t).
std::vector<double> pair_series(const Objective& obj, int d, std::size_t n) {
  return std::visit(
      overloaded{
          [](const KernelEnergy& k) { return build_coeffs(k.space, k.L, false).c; },
          [&](const DesignResidual& r) {
            std::vector<double> c(static_cast<std::size_t>(r.t) + 1, 0.0);
            const double nn = double(n) * double(n);
            for (int l = 1; l <= r.t; ++l) c[l] = dim_harmonics_real(d, l) / nn;
            return c;
          },
          [](const DistanceSum&) { return std::vector<double>{}; },
      },
      obj.kind);
}

// F' as a series in dimension d + 2: (P_l^{(d)})' = lambda_l / d * P_{l-1}^{(d+2)}.
std::vector<double> derivative_series(const std::vector<double>& c, int d) {
  std::vector<double> dc(c.size() > 1 ? c.size() - 1 : 1, 0.0);
  for (std::size_t l = 1; l < c.size(); ++l) dc[l - 1] = c[l] * double(eigenvalue(d, static_cast<int>(l))) / d;
  return dc;
}

double dot(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += a[k] * b[k];
  return s;
}

double distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

std::size_t blocks_for(std::size_t n) { return (n + kRowBlock - 1) / kRowBlock; }

void project_tangent(std::vector<double>& g, const PointSet& x) {
  const int dim = x.dim();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double* gi = g.data() + i * dim;
    const double r = dot(gi, x.point(i).data(), dim);
    for (int k = 0; k < dim; ++k) gi[k] -= r * x.point(i)[k];
  }
}

std::vector<double> normalized_step(const std::vector<double>& coords, const std::vector<double>& dir, double step,
                                    int dim) {
  std::vector<double> out(coords.size());
  for (std::size_t i = 0; i < coords.size(); i += dim) {
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      out[i + k] = coords[i + k] + step * dir[i + k];
      n2 += out[i + k] * out[i + k];
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (int k = 0; k < dim; ++k) out[i + k] *= inv;
  }
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

}  // namespace

void Objective::validate(int d) const {
  std::visit(overloaded{
                 [&](const KernelEnergy& k) {
                   k.space.validate();
                   if (k.space.d != d) throw std::invalid_argument("KernelEnergy: dimension mismatch");
                   if (k.L < 1) throw std::invalid_argument("KernelEnergy: L must be >= 1");
                 },
                 [](const DistanceSum& s) {
                   if (!(s.alpha > 0.0 && s.alpha < 2.0)) throw std::invalid_argument("DistanceSum: alpha must lie in (0, 2)");
                 },
                 [](const DesignResidual& r) {
                   if (r.t < 1) throw std::invalid_argument("DesignResidual: t must be >= 1");
                 },
             },
             kind);
}

double objective_value(const PointSet& x, const Objective& obj) {
  obj.validate(x.d());
  const int dim = x.dim();
  const std::size_t n = x.size();
  if (const auto* ds = std::get_if<DistanceSum>(&obj.kind)) {
    std::vector<double> partial(blocks_for(n), 0.0);
    parallel::for_blocks(partial.size(), [&](std::size_t b) {
      double s = 0.0;
      for (std::size_t i = b * kRowBlock; i < std::min(n, (b + 1) * kRowBlock); ++i) {
        for (std::size_t j = i + 1; j < n; ++j) s += std::pow(distance(x.point(i).data(), x.point(j).data(), dim), ds->alpha);
      }
      partial[b] = s;
    });
    return 2.0 * parallel::tree_sum(partial);
  }
  const std::vector<double> c = pair_series(obj, x.d(), n);
  const std::vector<double> ones(n, 1.0);
  return gram::series_sum({x.d(), x.coords(), ones}, x.d(), c);
}

std::vector<double> gradient(const PointSet& x, const Objective& obj) {
  obj.validate(x.d());
  const int dim = x.dim();
  const std::size_t n = x.size();
  std::vector<double> g(x.coords().size(), 0.0);

  if (const auto* ds = std::get_if<DistanceSum>(&obj.kind)) {
    const double alpha = ds->alpha;
    parallel::for_blocks(blocks_for(n), [&](std::size_t b) {
      for (std::size_t i = b * kRowBlock; i < std::min(n, (b + 1) * kRowBlock); ++i) {
        const double* xi = x.point(i).data();
        double* gi = g.data() + i * dim;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double* xj = x.point(j).data();
          const double r = distance(xi, xj, dim);
          if (r == 0.0) {
            if (alpha <= 1.0) throw std::domain_error("DistanceSum gradient: coincident points");
            continue;
          }
          const double f = 2.0 * alpha * std::pow(r, alpha - 2.0);
          for (int k = 0; k < dim; ++k) gi[k] += f * (xi[k] - xj[k]);
        }
      }
    });
  } else {
    const std::vector<double> dc = derivative_series(pair_series(obj, x.d(), n), x.d());
    parallel::for_blocks(blocks_for(n), [&](std::size_t b) {
      std::vector<double> ts(n), fp(n);
      for (std::size_t i = b * kRowBlock; i < std::min(n, (b + 1) * kRowBlock); ++i) {
        const double* xi = x.point(i).data();
        for (std::size_t j = 0; j < n; ++j) ts[j] = std::clamp(dot(xi, x.point(j).data(), dim), -1.0, 1.0);
        legendre_series_batch(x.d() + 2, dc, ts, fp);
        double* gi = g.data() + i * dim;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          for (int k = 0; k < dim; ++k) gi[k] += 2.0 * fp[j] * x.point(j)[k];
        }
      }
    });
  }
  project_tangent(g, x);
  return g;
}

OptResult optimize(const PointSet& x0, const Objective& obj, int max_iter, double tol, std::uint64_t seed) {
  obj.validate(x0.d());
  if (max_iter < 0) throw std::invalid_argument("optimize: max_iter must be >= 0");
  const std::size_t n = x0.size();
  for (double w : x0.weights()) {
    if (std::abs(w * double(n) - 1.0) > 1e-12) throw std::invalid_argument("optimize: start must be equal-weight");
  }
  const int d = x0.d(), dim = x0.dim();
  const double sense = obj.maximize() ? 1.0 : -1.0;
  auto better = [&](double a, double b) { return obj.maximize() ? a > b : a < b; };

  PointSet cur(d, x0.coords());
  double f = objective_value(cur, obj);
  std::vector<double> g = gradient(cur, obj);
  OptResult res{cur, {f}, false, 0, seed};

  std::vector<double> prev_x, prev_g;
  double step = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double gn = norm2(g);
    if (gn <= tol) {
      res.converged = true;
      break;
    }
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) gmax = std::max(gmax, norm2({g.begin() + i * dim, g.begin() + (i + 1) * dim}));
    const double step_cap = 0.5 / gmax;  // no point moves more than ~0.5 per step
    if (prev_x.empty()) {
      step = 0.1 / gmax;
    } else {
      // Barzilai-Borwein length from the last accepted move
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double s = cur.coords()[k] - prev_x[k];
        ss += s * s;
        sy += s * (g[k] - prev_g[k]);
      }
      step = std::abs(sy) > 0.0 ? ss / std::abs(sy) : 2.0 * step;
    }
    step = std::min(step, step_cap);

    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      std::vector<double> trial = normalized_step(cur.coords(), g, sense * step, dim);
      PointSet cand(d, std::move(trial));
      const double ft = objective_value(cand, obj);
      if (better(ft, f)) {
        prev_x = cur.coords();
        prev_g = std::move(g);
        cur = std::move(cand);
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no representable improvement left along the gradient
      res.converged = true;
      break;
    }
    g = gradient(cur, obj);
    res.objective_trace.push_back(f);
    res.iterations = it + 1;
    const auto& tr = res.objective_trace;
    if (tr.size() > 10) {
      const double old = tr[tr.size() - 11];
      if (std::abs(f - old) <= tol * std::abs(f)) {
        res.converged = true;
        break;
      }
    }
  }
  res.points = std::move(cur);
  return res;
}

OptResult optimize_restarts(int d, std::size_t n, const Objective& obj, int max_iter, double tol,
                            std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("optimize_restarts: no seeds");
  std::vector<std::uint64_t> order(seeds.begin(), seeds.end());
  std::sort(order.begin(), order.end());
  OptResult best = optimize(random_uniform(d, n, order[0]), obj, max_iter, tol, order[0]);
  for (std::size_t k = 1; k < order.size(); ++k) {
    OptResult r = optimize(random_uniform(d, n, order[k]), obj, max_iter, tol, order[k]);
    const double a = r.objective_trace.back(), b = best.objective_trace.back();
    if (obj.maximize() ? a > b : a < b) best = std::move(r);
  }
  return best;
}

}  // namespace sphwce
