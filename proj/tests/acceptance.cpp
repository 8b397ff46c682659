// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sphwce/cli.hpp"
#include "sphwce/designopt.hpp"
#include "sphwce/fooling.hpp"
#include "sphwce/parallel.hpp"
#include "sphwce/quaderr.hpp"
#include "sphwce/specfun.hpp"

using namespace sphwce;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Config {
  PointSet x;
  SpaceSpec space;
  int L;
};

// Configurations shared between the equivalence and soundness checks.
std::vector<Config> equivalence_configs;
std::vector<Config> rate_configs;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PointSet with_random_weights(const PointSet& x, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> w(x.size());
  double s = 0.0;
  for (double& e : w) s += (e = u(rng));
  for (double& e : w) e /= s;
  return PointSet(x.d(), x.coords(), std::move(w));
}

void identities() {
  const auto t0 = Clock::now();
  std::vector<double> grid(21);
  for (int k = 0; k <= 20; ++k) grid[k] = -1.0 + k / 10.0;
  double worst = 0.0;
  bool ok = true;
  for (int d = 2; d <= 5; ++d) {
    const auto rep = verify_identities(d, 50, grid, 1e-10);
    ok = ok && rep.passed;
    worst = std::max(worst, rep.max_residual());
  }
  const double secs = since(t0);
  report(1, ok && worst <= 1e-10 && secs < 30.0, fmt("max residual %.2e, %.2f s", worst, secs));
}

void two_paths() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 3), size(1, 64), pick(0, 2);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int d = dim(rng);
    PointSet x = random_uniform(d, std::size_t(size(rng)), 1000 + k);
    if (k % 3 == 2) x = with_random_weights(x, rng);
    const double par[] = {0.75, 1.0, 2.0};
    const SpaceSpec sp = k % 2 == 0 ? SpaceSpec::log_sobolev(d, par[pick(rng)])
                                    : SpaceSpec::sobolev(d, d / 2.0 + par[pick(rng)] / 2.0);
    const auto a = wce(x, sp, 500), b = wce_moments(x, sp, 500);
    worst = std::max(worst, std::abs(a.value_sq - b.value_sq) / std::max(std::abs(a.value_sq), 1e-300));
    equivalence_configs.push_back({x, sp, 500});
  }
  report(2, worst <= 1e-8, fmt("50 configurations, max relative gap %.2e", worst));
}

void heat_oracle() {
  double worst = 0.0;
  for (double s : {1.5, 2.0}) {
    for (std::size_t n : {1, 8, 32}) {
      const auto x = random_uniform(2, n, 300 + n);
      const auto sp = SpaceSpec::sobolev(2, s);
      const auto h = wce_heat_oracle(x, sp, 1000), w = wce(x, sp, 1000);
      worst = std::max(worst, std::abs(h.value - w.value) / w.value);
    }
  }
  report(3, worst <= 1e-6, fmt("6 cases, max relative gap %.2e", worst));
}

void positivity() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(2, 5), size(1, 40), deg(0, 200), coin(0, 1);
  std::normal_distribution<double> gauss;
  double lowest = 1.0;
  for (int k = 0; k < 10000; ++k) {
    const int d = dim(rng);
    const std::size_t n = std::size_t(size(rng));
    PointSet x = random_uniform(d, n, 5000 + k);
    if (coin(rng)) {
      // signed weights
      std::vector<double> w(n);
      double s = 0.0;
      for (double& e : w) s += (e = gauss(rng));
      if (std::abs(s) < 1e-3) continue;
      for (double& e : w) e /= s;
      x = PointSet(d, x.coords(), std::move(w));
    }
    lowest = std::min(lowest, gram_moment(x, deg(rng)));
  }
  report(4, lowest >= -1e-9, fmt("10^4 draws, smallest moment %.2e", lowest));
}

void soundness() {
  std::size_t configs = 0, witnesses = 0, invalid = 0, violations = 0;
  double worst_cert = -1e300, worst_wit = -1e300;
  auto check = [&](const Config& c, const WceReport& w, const FoolingWitness& f) {
    const double cert = lower_certificate(c.x, c.space, c.L).bound_sq;
    worst_cert = std::max(worst_cert, cert - w.value_sq);
    if (cert > w.value_sq + 1e-12) ++violations;
    ++witnesses;
    if (!f.valid) ++invalid;
    const double upper = std::sqrt(w.value_sq + w.tail_bound_sq);
    worst_wit = std::max(worst_wit, f.witness / upper);
    if (f.witness > upper) ++violations;
  };
  for (const auto& c : equivalence_configs) {
    ++configs;
    check(c, wce(c.x, c.space, c.L), build_witness(c.x, c.space, c.x.size(), 0, 11));
  }
  for (std::size_t k = 0; k < rate_configs.size(); k += 3) {
    ++configs;
    const PointSet& x = rate_configs[k].x;
    std::vector<SpaceSpec> spaces;
    for (std::size_t j = k; j < k + 3; ++j) spaces.push_back(rate_configs[j].space);
    const auto fs = build_witnesses(x, spaces, x.size(), 0, 11);
    const auto m = gram_moments(x, rate_configs[k].L);
    for (std::size_t j = 0; j < 3; ++j) check(rate_configs[k + j], wce_from_moments(m, spaces[j]), fs[j]);
  }
  report(5, violations == 0 && invalid == 0,
         fmt("%zu rules, %zu witnesses, %zu violations, %zu invalid; max cert - wce^2 %.2e, max witness/bound %.3f",
             configs, witnesses, violations, invalid, worst_cert, worst_wit));
}

void design_rates() {
  const auto t0 = Clock::now();
  const double gammas[] = {0.75, 1.0, 2.0};
  std::vector<std::pair<std::size_t, double>> samples[3];
  double worst_res = 0.0;
  for (int t = 4; t <= 20; t += 2) {
    const std::size_t n = std::size_t(t) * std::size_t(t);
    const auto o = optimize(random_uniform(2, n, std::uint64_t(t)), Objective{DesignResidual{t}}, 4000, 1e-14,
                            std::uint64_t(t));
    worst_res = std::max(worst_res, o.objective_trace.back());
    const auto m = gram_moments(o.points, kDefaultDegree);
    for (int g = 0; g < 3; ++g) {
      const auto sp = SpaceSpec::log_sobolev(2, gammas[g]);
      samples[g].emplace_back(n, wce_from_moments(m, sp).value);
      rate_configs.push_back({o.points, sp, kDefaultDegree});
    }
  }
  bool ok = true;
  std::string detail = fmt("max residual %.1e", worst_res);
  for (int g = 0; g < 3; ++g) {
    double lo = 1e300, hi = 0.0;
    for (const auto& [n, v] : samples[g]) {
      const double q = v * std::sqrt(double(n)) * std::pow(std::log(double(n)), gammas[g] - 0.5);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const double a = rate_fit(samples[g]).a;
    ok = ok && hi / lo <= 10.0 && a >= -0.65 && a <= -0.35;
    detail += fmt("; gamma %.2f: scaled in [%.3f, %.3f] ratio %.2f, a = %.3f", gammas[g], lo, hi, hi / lo, a);
  }
  const double secs = since(t0);
  report(6, ok && secs < 600.0, detail + fmt("; %.1f s", secs));
}

void spiral_witnesses() {
  const auto t0 = Clock::now();
  const auto sp = SpaceSpec::log_sobolev(2, 1.0);
  double lo = 1e300, hi = 0.0;
  bool positive = true;
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    const auto f = build_witness(spiral_points(n), sp, n, 0, 1);
    positive = positive && f.valid && f.witness > 0.0;
    const double q = f.witness * std::sqrt(double(n)) * std::log(double(n));
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  report(7, positive && hi / lo <= 20.0,
         fmt("N = 16..1024, scaled in [%.4f, %.4f], C/c = %.2f, %.1f s", lo, hi, hi / lo, since(t0)));
}

void design_recovery() {
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto o = optimize(random_uniform(2, 4, seed), Objective{DesignResidual{2}}, 2000, 1e-14, seed);
    worst = std::max(worst, o.objective_trace.back());
    ok = ok && o.objective_trace.back() < 1e-8;
  }
  const PointSet oct(2, {1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1});
  const double r = 1.0 / std::sqrt(3.0);
  const PointSet tet(2, {r, r, r, r, -r, -r, -r, r, -r, -r, -r, r});
  const bool oct3 = validate_design(oct, 3).is_design, tet2 = validate_design(tet, 2).is_design,
             tet3 = validate_design(tet, 3).is_design;
  report(8, ok && oct3 && tet2 && !tet3,
         fmt("worst residual %.2e; octahedron 3-design %d, tetrahedron 2-design %d, 3-design %d", worst, oct3, tet2,
             tet3));
}

PointSet moved(const PointSet& x, const std::vector<double>& v, double h) {
  const int dim = x.dim();
  std::vector<double> c(x.coords());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) n2 += (c[i * dim + k] += h * v[i * dim + k]) * c[i * dim + k];
    for (int k = 0; k < dim; ++k) c[i * dim + k] /= std::sqrt(n2);
  }
  return PointSet(x.d(), c);
}

void gradients() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  int cases = 0;
  for (int d : {2, 3, 4}) {
    const std::vector<Objective> objs{
        Objective{KernelEnergy{SpaceSpec::log_sobolev(d, 0.75), 50}}, Objective{KernelEnergy{SpaceSpec::log_sobolev(d, 2.0), 50}},
        Objective{KernelEnergy{SpaceSpec::sobolev(d, d / 2.0 + 0.5), 50}}, Objective{DistanceSum{0.5}},
        Objective{DistanceSum{1.0}}, Objective{DistanceSum{1.7}}, Objective{DesignResidual{3}},
        Objective{DesignResidual{8}}};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto x = random_uniform(d, 8, 40 + seed + 10 * std::uint64_t(d));
      std::vector<double> v(x.coords().size());
      for (double& e : v) e = gauss(rng);
      for (std::size_t i = 0; i < x.size(); ++i) {
        double r = 0.0;
        for (int k = 0; k < x.dim(); ++k) r += v[i * x.dim() + k] * x.point(i)[k];
        for (int k = 0; k < x.dim(); ++k) v[i * x.dim() + k] -= r * x.point(i)[k];
      }
      for (const auto& obj : objs) {
        const auto g = gradient(x, obj);
        double analytic = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) analytic += g[k] * v[k];
        const double h = 1e-5;
        const double fd = (objective_value(moved(x, v, h), obj) - objective_value(moved(x, v, -h), obj)) / (2 * h);
        worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
        ++cases;
      }
    }
  }
  report(9, worst <= 1e-5, fmt("%d directional checks, max relative error %.2e", cases, worst));
}

std::string run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return std::to_string(code) + "\n" + out.str();
}

void determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "sphwce_acceptance";
  std::filesystem::create_directories(dir);
  const std::string file = (dir / "rule.txt").string();
  {
    std::ofstream f(file);
    write_pointset(f, random_uniform(3, 150, 8));
  }
  const std::vector<std::vector<std::string>> commands{
      {"rates", "--family", "random", "--d", "2", "--space", "log:1", "--N", "40,80,160,320", "--seed", "3",
       "--witness"},
      {"wce", "--points", file, "--d", "3", "--space", "sob:2", "--L", "1500", "--witness", "--seed", "2"},
      {"wce", "--points", file, "--d", "3", "--space", "log:0.75", "--path", "moments"},
      {"generate", "optimize", "--d", "2", "--N", "70", "--seed", "4", "--objective", "energy", "--space", "log:1",
       "--L", "60", "--iters", "40", "--restarts", "2"},
      {"moments", "--points", file, "--d", "3", "--L", "300"}};
  int same = 0;
  for (const auto& c : commands) {
    std::vector<std::string> one{"--threads", "1"}, four{"--threads", "4"};
    one.insert(one.end(), c.begin(), c.end());
    four.insert(four.end(), c.begin(), c.end());
    const std::string a = run(one), b = run(one), e = run(four);
    if (a == b && a == e && a.rfind("0\n", 0) == 0) ++same;
  }
  parallel::set_max_threads(0);
  report(10, same == int(commands.size()), fmt("%d of %zu command lines byte-identical", same, commands.size()));
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void()>>> steps{
      {1, identities},  {2, two_paths},        {3, heat_oracle},     {4, positivity}, {6, design_rates},
      {5, soundness},   {7, spiral_witnesses}, {8, design_recovery}, {9, gradients},  {10, determinism}};
  for (const auto& [id, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
