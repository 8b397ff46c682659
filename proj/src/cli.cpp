#include "sphwce/cli.hpp"

#include <CLI11.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "sphwce/designopt.hpp"
#include "sphwce/errors.hpp"
#include "sphwce/fooling.hpp"
#include "sphwce/parallel.hpp"
#include "sphwce/pointset.hpp"
#include "sphwce/quaderr.hpp"
#include "sphwce/specfun.hpp"

namespace sphwce {

RateFit rate_fit(std::span<const std::pair<std::size_t, double>> samples) {
  if (samples.size() < 4) throw std::invalid_argument("rate_fit: need at least 4 samples");
  for (const auto& [n, v] : samples) {
    if (n < 3) throw std::invalid_argument("rate_fit: N must be >= 3");
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("rate_fit: values must be positive and finite");
  }
  const bool all_equal = std::all_of(samples.begin(), samples.end(),
                                     [&](const auto& s) { return s.first == samples.front().first; });
  if (all_equal) throw std::domain_error("rate_fit: all N are equal");

  const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double ln = std::log(double(samples[k].first));
    a(k, 0) = ln;
    a(k, 1) = std::log(ln);
    a(k, 2) = 1.0;
    y(k) = std::log(samples[k].second);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) throw std::domain_error("rate_fit: the N values do not separate the three terms");
  const Eigen::Vector3d sol = qr.solve(y);
  RateFit fit;
  fit.a = sol(0);
  fit.b = sol(1);
  fit.c = sol(2);
  fit.rms_residual = std::sqrt((a * sol - y).squaredNorm() / double(m));

  const Eigen::MatrixXd a2 = a.rightCols(2);
  const Eigen::VectorXd y2 = y + 0.5 * a.col(0);
  const Eigen::Vector2d sol2 = a2.colPivHouseholderQr().solve(y2);
  fit.fixed_half.b = sol2(0);
  fit.fixed_half.c = sol2(1);
  fit.fixed_half.rms_residual = std::sqrt((a2 * sol2 - y2).squaredNorm() / double(m));
  return fit;
}

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Row {
  std::string experiment;
  int d = 2;
  std::string space;
  std::size_t n = 0;
  int t = -1;
  double wce = 0.0, tail = 0.0, certificate = 0.0, witness = 0.0, seconds = 0.0;
};

void write_row(std::ostream& out, const Row& r) {
  out << r.experiment << ',' << r.d << ',' << r.space << ',' << r.n << ',' << r.t << ',' << num(r.wce) << ','
      << num(r.tail) << ',' << num(r.certificate) << ',' << num(r.witness) << ',' << num(r.seconds) << '\n';
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc{} || r.ptr != item.data() + item.size()) {
      throw std::invalid_argument(std::string("cannot parse ") + what + " list entry '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
  return out;
}

Objective parse_objective(const std::string& text, int d, const std::string& space, int L) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "residual") return Objective{DesignResidual{std::stoi(arg)}};
  if (kind == "distance") return Objective{DistanceSum{std::stod(arg)}};
  if (kind == "energy") {
    if (space.empty()) throw std::invalid_argument("energy objective needs --space");
    return Objective{KernelEnergy{SpaceSpec::parse(d, space), L}};
  }
  throw std::invalid_argument("unknown objective '" + text + "' (residual:<t>, distance:<alpha>, energy)");
}

// wce, tail and certificate of one rule from a single moment pass
Row measure(const PointSet& x, const SpaceSpec& sp, int L, bool pairwise) {
  Row r;
  r.d = x.d();
  r.space = sp.to_string();
  r.n = x.size();
  const std::vector<double> m = gram_moments(x, L);
  const WceReport w = pairwise ? wce(x, sp, L) : wce_from_moments(m, sp, x.abs_weight_sum());
  r.wce = w.value;
  r.tail = w.tail_bound_sq;
  if (!x.has_negative_weight()) r.certificate = certificate_from_moments(m, sp).bound_sq;
  return r;
}

struct Options {
  // shared
  std::string points, space;
  int d = 2;
  int L = kDefaultDegree;
  std::optional<std::uint64_t> seed;
  // wce
  std::string path = "pairwise";
  bool with_witness = false;
  std::optional<std::size_t> m;
  int witness_L = 0;
  // validate-design, identities
  int t = 1;
  double tol = -1.0;
  int lmax = 50;
  // generate
  std::string kind, objective = "residual:2", out;
  std::size_t n = 0;
  int iters = 2000;
  double opt_tol = 1e-14;
  int restarts = 1;
  // rates
  std::string family, n_list, t_list;
};

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw std::invalid_argument("--seed is required for this command");
  return *o.seed;
}

int cmd_wce(const Options& o, bool timing, std::ostream& out, std::ostream& err) {
  const Stopwatch sw(timing);
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const SpaceSpec sp = SpaceSpec::parse(o.d, o.space);
  Row r = measure(x, sp, o.L, o.path == "pairwise");
  r.experiment = "wce";
  int code = 0;
  if (o.with_witness) {
    const FoolingWitness w = build_witness(x, sp, o.m.value_or(x.size()), o.witness_L, require_seed(o));
    r.witness = w.witness;
    if (!w.valid) {
      err << "witness failed its validity checks\n";
      code = 1;
    }
  }
  r.seconds = sw.seconds();
  out << kCsvHeader << '\n';
  write_row(out, r);
  return code;
}

int cmd_moments(const Options& o, std::ostream& out) {
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const auto m = gram_moments(x, o.L);
  out << "ell,moment\n";
  for (std::size_t l = 0; l < m.size(); ++l) out << l << ',' << num(m[l]) << '\n';
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const DesignReport rep = validate_design(x, o.t, o.tol);
  out << "ell,residual\n";
  for (std::size_t l = 0; l < rep.residuals.size(); ++l) out << l + 1 << ',' << num(rep.residuals[l]) << '\n';
  err << (rep.is_design ? "design" : "not a design") << ": max residual " << num(rep.max_residual) << " tol "
      << num(rep.tol) << '\n';
  return rep.is_design ? 0 : 1;
}

int cmd_certificate(const Options& o, bool timing, std::ostream& out, std::ostream& err) {
  const Stopwatch sw(timing);
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const SpaceSpec sp = SpaceSpec::parse(o.d, o.space);
  const auto m = gram_moments(x, o.L);
  const Certificate c = lower_certificate(x, sp, o.L);
  const WceReport w = wce_from_moments(m, sp, x.abs_weight_sum());
  Row r{"certificate", o.d, sp.to_string(), x.size(), -1, w.value, w.tail_bound_sq, c.bound_sq, 0.0, 0.0};
  r.seconds = sw.seconds();
  out << kCsvHeader << '\n';
  write_row(out, r);
  err << "degree " << c.ell_star << '\n';
  return 0;
}

int cmd_witness(const Options& o, bool timing, std::ostream& out, std::ostream& err) {
  const Stopwatch sw(timing);
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const SpaceSpec sp = SpaceSpec::parse(o.d, o.space);
  const FoolingWitness w = build_witness(x, sp, o.m.value_or(x.size()), o.witness_L, require_seed(o));
  Row r = measure(x, sp, o.L, false);
  r.experiment = "witness";
  r.witness = w.witness;
  r.seconds = sw.seconds();
  out << kCsvHeader << '\n';
  write_row(out, r);
  err << "caps " << w.packing.size() << " beta " << num(w.beta) << " degree " << w.L << '\n';
  if (!w.valid) {
    err << "witness failed its validity checks\n";
    return 1;
  }
  return 0;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.n < 1) throw std::invalid_argument("--N must be >= 1");
  std::optional<PointSet> x;
  if (o.kind == "spiral") {
    if (o.d != 2) throw std::invalid_argument("spiral points exist only for d = 2");
    x = spiral_points(o.n);
  } else if (o.kind == "random") {
    x = random_uniform(o.d, o.n, require_seed(o));
  } else {
    const std::uint64_t seed = require_seed(o);
    if (o.restarts < 1) throw std::invalid_argument("--restarts must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < o.restarts; ++k) seeds.push_back(seed + std::uint64_t(k));
    const Objective obj = parse_objective(o.objective, o.d, o.space, o.L);
    const OptResult res = optimize_restarts(o.d, o.n, obj, o.iters, o.opt_tol, seeds);
    err << "objective " << num(res.objective_trace.back()) << " iterations " << res.iterations << " seed "
        << res.seed << (res.converged ? " converged" : " not converged") << '\n';
    x = res.points;
  }
  if (o.out.empty()) {
    write_pointset(out, *x);
  } else {
    std::ofstream file(o.out);
    if (!file) throw std::invalid_argument("cannot open output file " + o.out);
    write_pointset(file, *x);
  }
  return 0;
}

int cmd_identities(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<double> grid(21);
  for (int k = 0; k <= 20; ++k) grid[k] = -1.0 + k / 10.0;
  const IdentityReport rep = verify_identities(o.d, o.lmax, grid, o.tol < 0 ? 1e-10 : o.tol);
  out << "identity,params,residual,pass\n";
  for (const auto& c : rep.checks) {
    out << c.identity << ',' << c.params << ',' << num(c.residual) << ',' << (c.residual <= rep.tol ? 1 : 0) << '\n';
  }
  err << (rep.passed ? "pass" : "FAIL") << ": max residual " << num(rep.max_residual()) << '\n';
  return rep.passed ? 0 : 1;
}

void write_fit_rows(std::ostream& out, std::ostream& err, const std::string& prefix, const Row& like,
                    const std::vector<std::pair<std::size_t, double>>& samples) {
  if (samples.size() < 4) {
    err << prefix << ": fewer than 4 sizes, no fit\n";
    return;
  }
  const RateFit f = rate_fit(samples);
  Row r = like;
  r.n = samples.size();
  r.t = -1;
  r.seconds = 0.0;
  r.experiment = prefix + "_free";
  r.wce = f.a;
  r.tail = f.b;
  r.certificate = f.c;
  r.witness = f.rms_residual;
  write_row(out, r);
  r.experiment = prefix + "_fixed";
  r.wce = -0.5;
  r.tail = f.fixed_half.b;
  r.certificate = f.fixed_half.c;
  r.witness = f.fixed_half.rms_residual;
  write_row(out, r);
}

int cmd_rates(const Options& o, bool timing, std::ostream& out, std::ostream& err) {
  const SpaceSpec sp = SpaceSpec::parse(o.d, o.space);
  std::vector<std::pair<std::size_t, int>> runs;  // (N, t)
  if (o.family == "design") {
    if (o.t_list.empty()) throw std::invalid_argument("--t list is required for the design family");
    for (int t : parse_list<int>(o.t_list, "t")) {
      if (t < 1) throw std::invalid_argument("t must be >= 1");
      runs.emplace_back(std::size_t(t) * std::size_t(t), t);
    }
  } else {
    if (o.n_list.empty()) throw std::invalid_argument("--N list is required");
    for (std::size_t n : parse_list<std::size_t>(o.n_list, "N")) runs.emplace_back(n, -1);
  }
  if (o.family == "spiral" && o.d != 2) throw std::invalid_argument("spiral points exist only for d = 2");

  out << kCsvHeader << '\n';
  std::vector<std::pair<std::size_t, double>> wces, witnesses;
  Row last;
  int code = 0;
  for (const auto& [n, t] : runs) {
    const Stopwatch sw(timing);
    std::optional<PointSet> x;
    if (o.family == "spiral") {
      x = spiral_points(n);
    } else if (o.family == "random") {
      x = random_uniform(o.d, n, require_seed(o));
    } else {
      const std::uint64_t seed = require_seed(o);
      x = optimize(random_uniform(o.d, n, seed), Objective{DesignResidual{t}}, o.iters, o.opt_tol, seed).points;
    }
    Row r = measure(*x, sp, o.L, false);
    r.experiment = "rates_" + o.family;
    r.t = t;
    if (o.with_witness) {
      const FoolingWitness w = build_witness(*x, sp, n, o.witness_L, require_seed(o));
      r.witness = w.witness;
      if (!w.valid) {
        err << "witness for N = " << n << " failed its validity checks\n";
        code = 1;
      }
      witnesses.emplace_back(n, w.witness);
    }
    r.seconds = sw.seconds();
    write_row(out, r);
    wces.emplace_back(n, r.wce);
    last = r;
  }
  write_fit_rows(out, err, "fit", last, wces);
  if (o.with_witness) write_fit_rows(out, err, "fit_witness", last, witnesses);
  return code;
}

int cmd_heat(const Options& o, bool timing, std::ostream& out) {
  const Stopwatch sw(timing);
  const PointSet x = load_pointset(std::filesystem::path(o.points), o.d);
  const SpaceSpec sp = SpaceSpec::parse(o.d, o.space);
  const WceReport h = wce_heat_oracle(x, sp, o.L);
  Row r{"heat-oracle", o.d, sp.to_string(), x.size(), -1, h.value, h.tail_bound_sq, 0.0, 0.0, 0.0};
  if (!x.has_negative_weight()) r.certificate = lower_certificate(x, sp, o.L).bound_sq;
  r.seconds = sw.seconds();
  out << kCsvHeader << '\n';
  write_row(out, r);
  return 0;
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Worst-case cubature errors on spheres", "sphwce"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  bool timing = false;
  app.add_option("--threads", threads, "worker cap (0 = all cores)");
  app.add_flag("--timing", timing, "fill the seconds column (otherwise 0)");

  Options o;
  auto points = [&](CLI::App* s) { s->add_option("--points", o.points, "point file")->required(); };
  auto dim = [&](CLI::App* s) { s->add_option("--d", o.d, "sphere dimension")->required()->check(CLI::Range(2, 64)); };
  auto space = [&](CLI::App* s) { s->add_option("--space", o.space, "log:<gamma> or sob:<s>")->required(); };
  std::optional<int> degree_flag;
  auto degree = [&](CLI::App* s, int def) {
    s->add_option("--L", degree_flag, "truncation degree (default " + std::to_string(def) + ")")
        ->check(CLI::Range(1, 10000000));
  };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "random seed"); };

  CLI::App* wce_cmd = app.add_subcommand("wce", "worst-case error of a rule");
  points(wce_cmd);
  dim(wce_cmd);
  space(wce_cmd);
  degree(wce_cmd, kDefaultDegree);
  wce_cmd->add_option("--path", o.path, "pairwise or moments")->check(CLI::IsMember({"pairwise", "moments"}));
  wce_cmd->add_flag("--witness", o.with_witness, "also build a fooling witness");
  wce_cmd->add_option("--M", o.m, "witness cap count (default N)");
  wce_cmd->add_option("--witness-L", o.witness_L, "witness degree (0 = automatic)");
  seed(wce_cmd);

  CLI::App* mom_cmd = app.add_subcommand("moments", "per-degree Gram moments");
  points(mom_cmd);
  dim(mom_cmd);
  mom_cmd->add_option("--L", degree_flag, "largest degree")->required()->check(CLI::Range(0, 10000000));

  CLI::App* val_cmd = app.add_subcommand("validate-design", "check the t-design property");
  points(val_cmd);
  dim(val_cmd);
  val_cmd->add_option("--t", o.t, "strength")->required()->check(CLI::PositiveNumber);
  val_cmd->add_option("--tol", o.tol, "tolerance (default 1e-10 N)");

  CLI::App* cert_cmd = app.add_subcommand("certificate", "single-degree lower bound");
  points(cert_cmd);
  dim(cert_cmd);
  space(cert_cmd);
  degree(cert_cmd, kDefaultDegree);

  CLI::App* wit_cmd = app.add_subcommand("witness", "fooling-function lower bound");
  points(wit_cmd);
  dim(wit_cmd);
  space(wit_cmd);
  degree(wit_cmd, kDefaultDegree);
  wit_cmd->add_option("--M", o.m, "cap count (default N)");
  wit_cmd->add_option("--witness-L", o.witness_L, "witness degree (0 = automatic)");
  seed(wit_cmd);

  CLI::App* gen_cmd = app.add_subcommand("generate", "write a point file");
  gen_cmd->add_option("kind", o.kind, "random, spiral or optimize")
      ->required()
      ->check(CLI::IsMember({"random", "spiral", "optimize"}));
  dim(gen_cmd);
  gen_cmd->add_option("--N", o.n, "number of points")->required();
  seed(gen_cmd);
  gen_cmd->add_option("--objective", o.objective, "residual:<t>, distance:<alpha> or energy");
  gen_cmd->add_option("--space", o.space, "space for the energy objective");
  gen_cmd->add_option("--L", degree_flag, "degree for the energy objective")->check(CLI::Range(1, 10000000));
  gen_cmd->add_option("--iters", o.iters, "iteration cap");
  gen_cmd->add_option("--tol", o.opt_tol, "convergence tolerance");
  gen_cmd->add_option("--restarts", o.restarts, "consecutive seeds to try");
  gen_cmd->add_option("--out", o.out, "output file (default stdout)");

  CLI::App* id_cmd = app.add_subcommand("identities", "check the polynomial identities");
  dim(id_cmd);
  id_cmd->add_option("--Lmax", o.lmax, "largest degree")->check(CLI::Range(1, 100000));
  id_cmd->add_option("--tol", o.tol, "residual tolerance (default 1e-10)");

  CLI::App* rate_cmd = app.add_subcommand("rates", "wce over a family of rules with a rate fit");
  rate_cmd->add_option("--family", o.family, "spiral, random or design")
      ->required()
      ->check(CLI::IsMember({"spiral", "random", "design"}));
  dim(rate_cmd);
  space(rate_cmd);
  degree(rate_cmd, kDefaultDegree);
  rate_cmd->add_option("--N", o.n_list, "comma-separated sizes");
  rate_cmd->add_option("--t", o.t_list, "comma-separated strengths (design family, N = t^2)");
  rate_cmd->add_option("--iters", o.iters, "optimizer iteration cap (design family)");
  rate_cmd->add_flag("--witness", o.with_witness, "also build fooling witnesses (M = N)");
  rate_cmd->add_option("--witness-L", o.witness_L, "witness degree (0 = automatic)");
  seed(rate_cmd);

  CLI::App* heat_cmd = app.add_subcommand("heat-oracle", "Sobolev wce through the heat trace");
  points(heat_cmd);
  dim(heat_cmd);
  space(heat_cmd);
  degree(heat_cmd, 1000);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  parallel::set_max_threads(threads);
  o.L = degree_flag.value_or(*heat_cmd ? 1000 : kDefaultDegree);

  try {
    if (*wce_cmd) return cmd_wce(o, timing, out, err);
    if (*mom_cmd) return cmd_moments(o, out);
    if (*val_cmd) return cmd_validate(o, out, err);
    if (*cert_cmd) return cmd_certificate(o, timing, out, err);
    if (*wit_cmd) return cmd_witness(o, timing, out, err);
    if (*gen_cmd) return cmd_generate(o, out, err);
    if (*id_cmd) return cmd_identities(o, out, err);
    if (*rate_cmd) return cmd_rates(o, timing, out, err);
    if (*heat_cmd) return cmd_heat(o, timing, out);
  } catch (const PointFileError& e) {
    err << "point file: " << e.what() << '\n';
    return 1;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace sphwce
