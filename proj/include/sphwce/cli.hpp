#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Command-line driver and rate fitting.
namespace sphwce {

// ln v = a ln N + b ln ln N + c by least squares, plus the same model with a = -1/2.
struct RateFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double rms_residual = 0.0;
  struct Fixed {
    double b = 0.0, c = 0.0;
    double rms_residual = 0.0;
  } fixed_half;
};

// Needs >= 4 samples with N >= 3 and value > 0 (std::invalid_argument);
// std::domain_error when the N values do not determine the model.
RateFit rate_fit(std::span<const std::pair<std::size_t, double>> samples);

inline constexpr const char* kCsvHeader = "experiment,d,space,N,t,wce,tail,certificate,witness,seconds";

// args excludes the program name. Returns 0 on success, 1 when a check fails or
// the input is rejected, 2 on usage errors.
int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sphwce
