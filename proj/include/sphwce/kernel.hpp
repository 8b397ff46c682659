#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Weight sequences and truncated reproducing kernels for the Sobolev spaces
// H^s(S^d) and the log-weighted spaces H^{(d/2, gamma)}(S^d).
namespace sphwce {

struct Sobolev {
  double s;
};

struct LogSobolev {
  double gamma;
};

struct SpaceSpec {
  int d = 2;
  std::variant<Sobolev, LogSobolev> kind = LogSobolev{1.0};

  static SpaceSpec sobolev(int d, double s);
  static SpaceSpec log_sobolev(int d, double gamma);

  // "log:<gamma>" or "sob:<s>"; throws std::invalid_argument.
  static SpaceSpec parse(int d, std::string_view text);

  bool is_sobolev() const { return std::holds_alternative<Sobolev>(kind); }
  // s or gamma
  double parameter() const;
  std::string to_string() const;

  // Throws std::domain_error unless d >= 2 and s > d/2 (resp. gamma > 1/2).
  void validate() const;
};

inline constexpr int kDefaultDegree = 4000;

double weight(const SpaceSpec& space, int ell);

// Upper bound on Sum_{l > L} Z(d,l) / w_l.
// Throws NumericalFailure if the majorant ratio is not monotone on (8L, 16L].
double tail_at_one(const SpaceSpec& space, int L);

struct CoeffTable {
  SpaceSpec space;
  int L = 0;
  std::vector<double> c;        // c[l] = Z(d,l)/w_l, l = 0..L
  std::vector<double> weights;  // w_l, l = 0..L
  bool include_constant = true;
  double tail_at_one = 0.0;
};

CoeffTable build_coeffs(const SpaceSpec& space, int L, bool include_constant);

struct KernelValue {
  double value;
  double tail_bound;
};

KernelValue kernel_eval(const CoeffTable& tab, double t);

// Truncated kernel values at many arguments (no tail attached).
void kernel_eval_batch(const CoeffTable& tab, std::span<const double> ts, std::span<double> out);

}  // namespace sphwce
