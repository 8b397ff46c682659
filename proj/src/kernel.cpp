#include "sphwce/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sphwce/errors.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

SpaceSpec SpaceSpec::sobolev(int d, double s) {
  SpaceSpec sp{d, Sobolev{s}};
  sp.validate();
  return sp;
}

SpaceSpec SpaceSpec::log_sobolev(int d, double gamma) {
  SpaceSpec sp{d, LogSobolev{gamma}};
  sp.validate();
  return sp;
}

SpaceSpec SpaceSpec::parse(int d, std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("space must be log:<gamma> or sob:<s>, got '" + std::string(text) + "'");
  }
  const std::string_view tag = text.substr(0, colon);
  const std::string_view num = text.substr(colon + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
    throw std::invalid_argument("bad space parameter in '" + std::string(text) + "'");
  }
  SpaceSpec sp;
  sp.d = d;
  if (tag == "log") {
    sp.kind = LogSobolev{value};
  } else if (tag == "sob") {
    sp.kind = Sobolev{value};
  } else {
    throw std::invalid_argument("unknown space kind '" + std::string(tag) + "'");
  }
  try {
    sp.validate();
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(e.what());
  }
  return sp;
}

double SpaceSpec::parameter() const {
  return std::visit([](const auto& k) {
    if constexpr (std::is_same_v<std::decay_t<decltype(k)>, Sobolev>) {
      return k.s;
    } else {
      return k.gamma;
    }
  }, kind);
}

std::string SpaceSpec::to_string() const {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, parameter());
  return std::string(is_sobolev() ? "sob:" : "log:") + std::string(buf, res.ptr);
}

void SpaceSpec::validate() const {
  if (d < 2) throw std::domain_error("sphere dimension d must be >= 2");
  if (is_sobolev()) {
    if (!(parameter() > d / 2.0)) throw std::domain_error("Sobolev smoothness must exceed d/2");
  } else {
    if (!(parameter() > 0.5)) throw std::domain_error("log exponent gamma must exceed 1/2");
  }
}

double weight(const SpaceSpec& space, int ell) {
  space.validate();
  const double lam = static_cast<double>(eigenvalue(space.d, ell));
  if (space.is_sobolev()) return std::pow(1.0 + lam, space.parameter());
  return std::pow(1.0 + lam, space.d / 2.0) * std::pow(std::log(3.0 + lam), 2.0 * space.parameter());
}

namespace {

// Majorant f(u) of the coefficient decay and its integral over (L, inf).
double majorant(const SpaceSpec& sp, double u) {
  if (sp.is_sobolev()) return std::pow(u, sp.d - 1.0 - 2.0 * sp.parameter());
  return 1.0 / (u * std::pow(std::log(u), 2.0 * sp.parameter()));
}

double majorant_integral(const SpaceSpec& sp, double L) {
  const double p = sp.parameter();
  if (sp.is_sobolev()) return std::pow(L, sp.d - 2.0 * p) / (2.0 * p - sp.d);
  return std::pow(std::log(L), 1.0 - 2.0 * p) / (2.0 * p - 1.0);
}

// lim c_l / f(l)
double majorant_limit(const SpaceSpec& sp) {
  const double base = 2.0 / std::tgamma(double(sp.d));
  if (sp.is_sobolev()) return base;
  return base * std::pow(2.0, -2.0 * sp.parameter());
}

double coeff(const SpaceSpec& sp, int ell) { return dim_harmonics_real(sp.d, ell) / weight(sp, ell); }

}  // namespace

double tail_at_one(const SpaceSpec& space, int L) {
  space.validate();
  if (L < 0) throw std::domain_error("tail_at_one: L must be >= 0");
  if (L < 3) {
    double head = 0.0;
    for (int l = L + 1; l <= 3; ++l) head += coeff(space, l);
    return head + tail_at_one(space, 3);
  }
  const long hi = 16L * L;
  double a = majorant_limit(space);
  double prev = 0.0;
  int direction = 0;
  for (long l = L + 1; l <= hi; ++l) {
    const double r = coeff(space, static_cast<int>(l)) / majorant(space, double(l));
    a = std::max(a, r);
    if (l > 8L * L) {
      if (l > 8L * L + 1) {
        const double diff = r - prev;
        const double jitter = 1e-12 * std::abs(r);
        const int step = diff > jitter ? 1 : (diff < -jitter ? -1 : 0);
        if (step != 0) {
          if (direction != 0 && step != direction) {
            std::ostringstream msg;
            msg << "tail majorant ratio not monotone on (8L, 16L] for " << space.to_string()
                << ", d=" << space.d << ", L=" << L;
            throw NumericalFailure(msg.str());
          }
          direction = step;
        }
      }
      prev = r;
    }
  }
  return a * majorant_integral(space, double(L));
}

CoeffTable build_coeffs(const SpaceSpec& space, int L, bool include_constant) {
  space.validate();
  if (L < 1) throw std::domain_error("build_coeffs: L must be >= 1");
  CoeffTable tab;
  tab.space = space;
  tab.L = L;
  tab.include_constant = include_constant;
  tab.c.resize(static_cast<std::size_t>(L) + 1);
  tab.weights.resize(tab.c.size());
  for (int l = 0; l <= L; ++l) {
    tab.weights[l] = weight(space, l);
    tab.c[l] = dim_harmonics_real(space.d, l) / tab.weights[l];
  }
  if (!include_constant) tab.c[0] = 0.0;
  tab.tail_at_one = tail_at_one(space, L);
  return tab;
}

KernelValue kernel_eval(const CoeffTable& tab, double t) {
  return {legendre_series(tab.space.d, tab.c, t), tab.tail_at_one};
}

void kernel_eval_batch(const CoeffTable& tab, std::span<const double> ts, std::span<double> out) {
  legendre_series_batch(tab.space.d, tab.c, ts, out);
}

}  // namespace sphwce
