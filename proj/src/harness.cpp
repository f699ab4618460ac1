#include "lmsa/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lmsa/analytic.hpp"
#include "lmsa/bounds.hpp"
#include "lmsa/errors.hpp"
#include "lmsa/sampler.hpp"

namespace lmsa {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(xs[i]);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(key + ": value out of range '" + v + "'");
  return x;
}

// Integers may be written as 1e4 or 10000.
std::size_t parse_count(const std::string& key, const std::string& v) {
  if (v.find_first_of("eE.") != std::string::npos) {
    const double x = parse_double(key, v);
    if (x < 0.0 || x != std::floor(x) || x > 9.0e15) throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::size_t>(x);
  }
  return static_cast<std::size_t>(parse_uint(key, v));
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : split(v, ',')) out.push_back(parse_double(key, part));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& part : split(v, ',')) out.push_back(parse_count(key, part));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

Range parse_range(const std::string& key, const std::string& v) {
  const auto xs = parse_doubles(key, v);
  if (xs.size() != 2) throw ConfigError(key + ": expected 'lo,hi'");
  return {xs[0], xs[1]};
}

// Short form for check labels.
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string range_text(const Range& r) { return fmt(r.lo) + "," + fmt(r.hi); }

std::size_t steps_for(double time, double h) {
  return static_cast<std::size_t>(std::ceil(time / h - 1e-9));
}

bool is_quadratic_family(const PotentialSpec& s) {
  return s.family == PotentialSpec::Family::Quadratic || s.family == PotentialSpec::Family::TwoBlock;
}

bool is_even(const PotentialSpec& s) { return s.family != PotentialSpec::Family::F1; }

std::size_t default_dim(const PotentialSpec& s, std::size_t fallback) {
  if (s.family == PotentialSpec::Family::Quadratic) return s.curvatures.size();
  return s.d != 0 ? s.d : fallback;
}

std::string default_potential(Mode mode) {
  switch (mode) {
    case Mode::SweepDim:
    case Mode::SweepStep:
      return "f1";
    case Mode::VerifyOrders:
      return "quadratic(1)";
    case Mode::VerifyContraction:
      return "quadratic(1,4)";
    case Mode::BoundsReport:
      return "quadratic(m=1,L=4,d=16)";
    case Mode::LowerBoundCheck:
      return "quadratic(m=1,L=4)";
    case Mode::Sample:
      return "f1(10)";
  }
  return "f1";
}

// Dyadic grid of `n` points ending at the largest power of two <= top.
std::vector<double> dyadic_grid(double top, int n) {
  const int e = static_cast<int>(std::floor(std::log2(top)));
  std::vector<double> hs;
  for (int i = n - 1; i >= 0; --i) hs.push_back(std::ldexp(1.0, e - i));
  return hs;
}

void apply_defaults(ExperimentConfig& c) {
  const auto& pot = c.potential;
  switch (c.mode) {
    case Mode::SweepDim:
      c.d_list = {2, 8, 32, 128, 512};
      c.h_list = {0.1};
      c.replicas = 10'000;
      c.steps = 100;
      c.window = 10;
      c.slope_range = {0.35, 0.65};
      c.x0 = 0.0;
      break;
    case Mode::SweepStep:
      c.d_list = {default_dim(pot, 10)};
      c.h_list.clear();
      for (int i = 1; i <= 10; ++i) c.h_list.push_back(i / 10.0);
      c.replicas = 10'000;
      c.time = 20.0;
      c.window_time = 10.0;
      c.slope_range = {0.8, 1.2};
      c.x0 = 0.0;
      break;
    case Mode::VerifyOrders: {
      c.d_list = {default_dim(pot, 4)};
      c.x0 = 1.0;
      if (is_quadratic_family(pot)) {
        c.h_list = dyadic_grid(0.25, 5);
        c.replicas = 100'000;
        c.weak_range = {1.9, 2.1};
      } else {
        const auto p = instantiate(pot, c.d_list[0]);
        c.h_list = dyadic_grid(1.0 / (4.0 * p.kappa() * p.L), 5);
        c.replicas = 1'000'000;
        c.weak_range = {1.7, 2.3};
      }
      break;
    }
    case Mode::VerifyContraction:
      c.d_list = {default_dim(pot, 10)};
      c.h_list = {0.1};
      c.time = 10.0;
      c.replicas = 64;
      c.x0 = 1.0;
      break;
    case Mode::BoundsReport:
      c.d_list = {default_dim(pot, 10)};
      c.h_list = {1.0 / 64, 1.0 / 32, 1.0 / 16};
      c.eps_list = {0.1, 0.2};
      c.x0 = 1.0;
      break;
    case Mode::LowerBoundCheck:
      c.d_list = {4, 16, 64};
      c.eps_list = {0.1, 0.2};
      c.x0 = 1.0;
      break;
    case Mode::Sample:
      c.d_list = {default_dim(pot, 10)};
      c.h_list = {0.1};
      c.replicas = 1000;
      c.steps = 100;
      c.x0 = 0.0;
      break;
  }
}

void apply_entry(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "d") c.d_list = parse_counts(key, v);
  else if (key == "h") c.h_list = parse_doubles(key, v);
  else if (key == "replicas") c.replicas = parse_count(key, v);
  else if (key == "steps") c.steps = v.empty() ? std::nullopt : std::optional<std::size_t>(parse_count(key, v));
  else if (key == "time") c.time = v.empty() ? std::nullopt : std::optional<double>(parse_double(key, v));
  else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "eps") c.eps_list = v.empty() ? std::vector<double>{} : parse_doubles(key, v);
  else if (key == "x0") c.x0 = parse_double(key, v);
  else if (key == "window") c.window = parse_count(key, v);
  else if (key == "window_time") c.window_time = parse_double(key, v);
  else if (key == "ground_truth") {
    if (v == "exact") c.ground_truth = GroundTruth::Exact;
    else if (v == "pilot") c.ground_truth = GroundTruth::Pilot;
    else throw ConfigError("ground_truth: expected 'exact' or 'pilot', got '" + v + "'");
  }
  else if (key == "h_gt") c.h_gt = parse_double(key, v);
  else if (key == "replicas_gt") c.replicas_gt = parse_count(key, v);
  else if (key == "time_gt") c.time_gt = parse_double(key, v);
  else if (key == "substeps") c.substeps = parse_count(key, v);
  else if (key == "strong_range") c.strong_range = parse_range(key, v);
  else if (key == "weak_range") c.weak_range = parse_range(key, v);
  else if (key == "analytic_range") c.analytic_range = parse_range(key, v);
  else if (key == "slope_range") c.slope_range = parse_range(key, v);
  else if (key == "r2_min") c.r2_min = parse_double(key, v);
  else if (key == "G") c.G = v.empty() ? std::nullopt : std::optional<double>(parse_double(key, v));
  else if (key == "G_radius") c.G_radius = parse_double(key, v);
  else if (key == "G_samples") c.G_samples = parse_count(key, v);
  else if (key == "mixing_cap") c.mixing_cap = parse_count(key, v);
  else if (key == "k_max") c.k_max = parse_count(key, v);
  else if (key == "burn_in_time") c.burn_in_time = parse_double(key, v);
  else if (key == "contraction_tol") c.contraction_tol = parse_double(key, v);
  else if (key == "workers") c.workers = parse_count(key, v);
  else if (key == "out") c.out = v;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_range(const Range& r, const char* key) {
  require(r.lo <= r.hi, std::string(key) + ": need lo <= hi");
}

std::size_t horizon(const ExperimentConfig& c, double h) {
  if (c.steps) return *c.steps;
  return steps_for(*c.time, h);
}

void validate(const ExperimentConfig& c) {
  const std::string mode = to_string(c.mode);
  require(!c.d_list.empty(), "d: at least one dimension required");
  for (auto d : c.d_list) require(d >= 1, "d: dimensions must be >= 1");
  for (double h : c.h_list) require(h > 0.0, "h: step sizes must be > 0");
  for (double e : c.eps_list) require(e > 0.0, "eps: tolerances must be > 0");
  require(c.replicas >= 2, "replicas: must be >= 2");
  require(c.window >= 1, "window: must be >= 1");
  require(c.window_time > 0.0, "window_time: must be > 0");
  require(c.h_gt > 0.0, "h_gt: must be > 0");
  require(c.replicas_gt >= 2, "replicas_gt: must be >= 2");
  require(c.time_gt > 0.0, "time_gt: must be > 0");
  require(c.substeps >= 1, "substeps: must be >= 1");
  check_range(c.strong_range, "strong_range");
  check_range(c.weak_range, "weak_range");
  check_range(c.analytic_range, "analytic_range");
  check_range(c.slope_range, "slope_range");
  require(!c.G || *c.G >= 0.0, "G: must be >= 0");
  require(c.G_radius > 0.0, "G_radius: must be > 0");
  require(c.G_samples >= 1, "G_samples: must be >= 1");
  require(c.mixing_cap >= 1, "mixing_cap: must be >= 1");
  require(c.burn_in_time >= 0.0, "burn_in_time: must be >= 0");
  require(c.contraction_tol > 0.0, "contraction_tol: must be > 0");
  if (c.time) require(*c.time > 0.0, "time: must be > 0");

  const bool chains = c.mode == Mode::SweepDim || c.mode == Mode::SweepStep || c.mode == Mode::VerifyContraction ||
                      c.mode == Mode::Sample;
  if (chains) {
    require(c.steps || c.time, mode + ": needs a horizon (steps or time)");
    require(!c.h_list.empty(), mode + ": needs at least one step size");
    for (double h : c.h_list) require(horizon(c, h) >= 1, mode + ": horizon must be at least one step");
  }
  switch (c.mode) {
    case Mode::SweepDim:
      require(c.h_list.size() == 1, "sweep-dim: takes exactly one step size");
      require(c.d_list.size() >= 2, "sweep-dim: needs at least 2 dimensions to fit a slope");
      require(c.window <= horizon(c, c.h_list[0]) + 1, "sweep-dim: window exceeds the number of iterates");
      break;
    case Mode::SweepStep:
      require(c.d_list.size() == 1, "sweep-step: takes exactly one dimension");
      require(c.h_list.size() >= 2, "sweep-step: needs at least 2 step sizes to fit a slope");
      break;
    case Mode::VerifyOrders:
      require(c.h_list.size() >= 2, "verify-orders: needs at least 2 step sizes to fit an order");
      require(c.d_list.size() == 1, "verify-orders: takes exactly one dimension");
      break;
    case Mode::VerifyContraction:
      require(c.x0 != 0.0, "verify-contraction: x0 must be nonzero (the pair starts at x0 and -x0)");
      require(c.d_list.size() == 1, "verify-contraction: takes exactly one dimension");
      break;
    case Mode::BoundsReport:
      require(!c.eps_list.empty(), "bounds-report: needs at least one eps");
      break;
    case Mode::LowerBoundCheck:
      require(c.potential.family == PotentialSpec::Family::TwoBlock,
              "lower-bound-check: potential must be a two-block quadratic, e.g. quadratic(m=1,L=4)");
      require(!c.eps_list.empty(), "lower-bound-check: needs at least one eps");
      break;
    case Mode::Sample:
      require(c.d_list.size() == 1 && c.h_list.size() == 1, "sample: takes exactly one dimension and one step size");
      break;
  }

  if (c.mode != Mode::LowerBoundCheck) {
    for (auto d : c.d_list) {
      const auto p = instantiate(c.potential, d);
      for (double h : c.h_list) check_step_size(p, h);
    }
  }
}

Vector filled(std::size_t d, double v) { return Vector(d, v); }

struct PilotMoments {
  Vector mean;
  double sq_norm = 0.0;
};

// Long run at a fine step; averages over the second half of the horizon.
PilotMoments pilot_moments(const PotentialModel& p, const ExperimentConfig& c) {
  ChainConfig cc;
  cc.h = c.h_gt;
  cc.steps = steps_for(c.time_gt, c.h_gt);
  cc.replicas = c.replicas_gt;
  cc.seed = c.seed ^ 0x9E3779B97F4A7C15ull;
  cc.x0 = StartSpec::point(filled(p.d, c.x0));
  cc.workers = c.workers;
  std::vector<std::size_t> rec;
  for (std::size_t k = cc.steps / 2; k <= cc.steps; ++k) rec.push_back(k);
  const auto run = run_chains(p, cc, rec);

  PilotMoments out;
  out.mean.assign(p.d, 0.0);
  for (const auto& r : run.records) {
    for (std::size_t i = 0; i < p.d; ++i) out.mean[i] += r.mean[i];
    out.sq_norm += r.mean_sq_norm;
  }
  const double n = static_cast<double>(run.records.size());
  for (auto& v : out.mean) v /= n;
  out.sq_norm /= n;
  if (c.potential.family == PotentialSpec::Family::F1 || c.potential.family == PotentialSpec::Family::F2) {
    // Exchangeable coordinates: the stationary mean is a multiple of 1.
    const double avg = std::accumulate(out.mean.begin(), out.mean.end(), 0.0) / static_cast<double>(p.d);
    std::fill(out.mean.begin(), out.mean.end(), avg);
  }
  return out;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

SweepRow sweep_point(const PotentialModel& p, const ExperimentConfig& c, double h, std::size_t window,
                     const Vector& truth) {
  ChainConfig cc;
  cc.h = h;
  cc.steps = horizon(c, h);
  cc.replicas = c.replicas;
  cc.seed = c.seed;
  cc.x0 = StartSpec::point(filled(p.d, c.x0));
  cc.workers = c.workers;
  const std::size_t lo = cc.steps + 1 > window ? cc.steps + 1 - window : 0;
  std::vector<std::size_t> rec;
  for (std::size_t k = lo; k <= cc.steps; ++k) rec.push_back(k);
  const auto run = run_chains(p, cc, rec);

  std::vector<double> errs;
  double floor_sum = 0.0;
  for (const auto& r : run.records) {
    errs.push_back(mean_error(r.mean, truth));
    const auto var = r.variance();
    floor_sum += std::sqrt(std::accumulate(var.begin(), var.end(), 0.0) / static_cast<double>(c.replicas));
  }
  SweepRow row;
  row.error_mean = mean_of(errs);
  row.error_std = std_of(errs);
  row.n_samples = c.replicas;
  row.window_lo = lo;
  row.window_hi = cc.steps;
  row.floor = floor_sum / static_cast<double>(run.records.size());
  return row;
}

void sweep_notes(const ExperimentConfig& c, SweepResult& r) {
  if (is_even(c.potential)) {
    r.notes.push_back(
        "target is even: the chain's mean tends to the target mean 0, so saturated errors carry no step-size "
        "bias and measure Monte Carlo noise only");
  }
  for (const auto& row : r.rows) {
    const double bias = std::sqrt(std::max(0.0, row.error_mean * row.error_mean - row.floor * row.floor));
    if (bias < row.floor) {
      r.notes.push_back("axis_value=" + fmt(row.axis_value) + ": error is at the Monte Carlo floor (floor=" +
                        fmt(row.floor) + ", bias estimate=" + fmt(bias) + ")");
    }
  }
}

void fit_sweep(SweepResult& r) {
  std::vector<double> xs, ys;
  for (const auto& row : r.rows) {
    xs.push_back(row.axis_value);
    ys.push_back(row.error_mean);
  }
  r.fit = fit_loglog(xs, ys);
}

std::string pass_text(bool pass) { return pass ? "PASS" : "FAIL"; }

void add_check(Report& rep, std::ostringstream& out, std::string name, bool pass, std::string detail) {
  out << "# check: " << name << ": " << pass_text(pass) << " (" << detail << ")\n";
  rep.checks.push_back({std::move(name), pass, std::move(detail)});
}

std::string in_range_text(double v, const Range& r) {
  return fmt(v) + " in [" + label(r.lo) + ", " + label(r.hi) + "]";
}

double resolve_G(const PotentialModel& p, const ExperimentConfig& c) {
  if (c.G) return *c.G;
  if (p.G) return *p.G;
  if (!p.grad_laplacian) {
    throw ConfigError(p.name + ": G unknown and grad Laplacian unavailable; set G in the config");
  }
  return estimate_G(p, c.G_radius, c.G_samples, c.seed);
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::SweepDim: return "sweep-dim";
    case Mode::SweepStep: return "sweep-step";
    case Mode::VerifyOrders: return "verify-orders";
    case Mode::VerifyContraction: return "verify-contraction";
    case Mode::BoundsReport: return "bounds-report";
    case Mode::LowerBoundCheck: return "lower-bound-check";
    case Mode::Sample: return "sample";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::SweepDim, Mode::SweepStep, Mode::VerifyOrders, Mode::VerifyContraction, Mode::BoundsReport,
                 Mode::LowerBoundCheck, Mode::Sample}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("mode: unknown mode '" + text +
                    "' (valid: sweep-dim, sweep-step, verify-orders, verify-contraction, bounds-report, "
                    "lower-bound-check, sample)");
}

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",         "potential",   "d",          "h",           "replicas",      "steps",
      "time",         "seed",        "eps",        "x0",          "window",        "window_time",
      "ground_truth", "h_gt",        "replicas_gt", "time_gt",    "substeps",      "strong_range",
      "weak_range",   "analytic_range", "slope_range", "r2_min",  "G",             "G_radius",
      "G_samples",    "mixing_cap",  "k_max",      "burn_in_time", "contraction_tol", "workers",
      "out"};
  return keys;
}

ConfigEntries parse_config_text(const std::string& text) {
  static const std::string kHeader = "# config:";
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  const bool from_output = std::any_of(lines.begin(), lines.end(),
                                       [](const std::string& l) { return l.rfind(kHeader, 0) == 0; });
  ConfigEntries out;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (from_output) {
      if (line.rfind(kHeader, 0) != 0) continue;
      line = line.substr(kHeader.size());
    }
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(n + 1) + ": expected key=value, got '" + line + "'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig make_config(const ConfigEntries& entries, std::vector<std::string>* warnings) {
  const auto& keys = config_keys();
  std::map<std::string, std::string> last;
  for (const auto& [k, v] : entries) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      std::string valid;
      for (const auto& key : keys) valid += (valid.empty() ? "" : ", ") + key;
      throw ConfigError("unknown config key '" + k + "' (valid keys: " + valid + ")");
    }
    if (last.count(k) && warnings) warnings->push_back("duplicate config key '" + k + "': using the last value");
    last[k] = v;
  }
  if (!last.count("mode")) throw ConfigError("config: mode is required");

  ExperimentConfig c;
  c.mode = parse_mode(last["mode"]);
  try {
    c.potential = parse_potential(last.count("potential") ? last["potential"] : default_potential(c.mode));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  apply_defaults(c);
  for (const auto& [k, v] : last) {
    if (k == "mode" || k == "potential") continue;
    apply_entry(c, k, v);
  }
  if (last.count("time") && !last.count("steps")) c.steps.reset();
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string config_header(const ExperimentConfig& c) {
  std::ostringstream o;
  auto line = [&](const std::string& k, const std::string& v) { o << "# config: " << k << "=" << v << "\n"; };
  line("mode", to_string(c.mode));
  line("potential", c.potential.to_string());
  line("d", join(c.d_list));
  line("h", join(c.h_list));
  line("replicas", std::to_string(c.replicas));
  line("steps", c.steps ? std::to_string(*c.steps) : "");
  line("time", c.time ? fmt(*c.time) : "");
  line("seed", std::to_string(c.seed));
  line("eps", join(c.eps_list));
  line("x0", fmt(c.x0));
  line("window", std::to_string(c.window));
  line("window_time", fmt(c.window_time));
  line("ground_truth", c.ground_truth == GroundTruth::Exact ? "exact" : "pilot");
  line("h_gt", fmt(c.h_gt));
  line("replicas_gt", std::to_string(c.replicas_gt));
  line("time_gt", fmt(c.time_gt));
  line("substeps", std::to_string(c.substeps));
  line("strong_range", range_text(c.strong_range));
  line("weak_range", range_text(c.weak_range));
  line("analytic_range", range_text(c.analytic_range));
  line("slope_range", range_text(c.slope_range));
  line("r2_min", fmt(c.r2_min));
  line("G", c.G ? fmt(*c.G) : "");
  line("G_radius", fmt(c.G_radius));
  line("G_samples", std::to_string(c.G_samples));
  line("mixing_cap", std::to_string(c.mixing_cap));
  line("k_max", std::to_string(c.k_max));
  line("burn_in_time", fmt(c.burn_in_time));
  line("contraction_tol", fmt(c.contraction_tol));
  return o.str();
}

Vector target_mean(const PotentialModel& p, const ExperimentConfig& c) {
  if (c.ground_truth == GroundTruth::Pilot && !p.quadratic) return pilot_moments(p, c).mean;
  if (c.potential.family == PotentialSpec::Family::F1) return filled(p.d, -1.0 / static_cast<double>(p.d));
  return filled(p.d, 0.0);
}

double target_sq_norm(const PotentialModel& p, const ExperimentConfig& c) {
  if (p.quadratic) return stationary_law(*p.quadratic).expected_sq_norm();
  return pilot_moments(p, c).sq_norm;
}

SweepResult sweep_dim(const ExperimentConfig& c) {
  SweepResult r;
  const double h = c.h_list.at(0);
  for (auto d : c.d_list) {
    const auto p = instantiate(c.potential, d);
    auto row = sweep_point(p, c, h, c.window, target_mean(p, c));
    row.axis_value = static_cast<double>(d);
    r.rows.push_back(row);
  }
  fit_sweep(r);
  sweep_notes(c, r);
  return r;
}

SweepResult sweep_step(const ExperimentConfig& c) {
  SweepResult r;
  const auto p = instantiate(c.potential, c.d_list.at(0));
  const auto truth = target_mean(p, c);
  for (double h : c.h_list) {
    auto row = sweep_point(p, c, h, steps_for(c.window_time, h), truth);
    row.axis_value = h;
    r.rows.push_back(row);
  }
  fit_sweep(r);
  sweep_notes(c, r);
  return r;
}

Report render_sweep(const ExperimentConfig& c, const SweepResult& r) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  o << "axis_value,error_mean,error_std,n_samples,window_lo,window_hi\n";
  for (const auto& row : r.rows) {
    o << fmt(row.axis_value) << "," << fmt(row.error_mean) << "," << fmt(row.error_std) << "," << row.n_samples
      << "," << row.window_lo << "," << row.window_hi << "\n";
  }
  o << "# fit: slope=" << fmt(r.fit.slope) << " intercept=" << fmt(r.fit.intercept) << " r2=" << fmt(r.fit.r2)
    << "\n";
  for (const auto& row : r.rows) {
    o << "# floor: axis_value=" << fmt(row.axis_value) << " monte_carlo_floor=" << fmt(row.floor) << "\n";
  }
  for (const auto& n : r.notes) o << "# note: " << n << "\n";
  const std::string axis = c.mode == Mode::SweepDim ? "d" : "h";
  add_check(rep, o, "slope vs " + axis, c.slope_range.contains(r.fit.slope), in_range_text(r.fit.slope, c.slope_range));
  rep.text = o.str();
  return rep;
}

Report verify_orders(const ExperimentConfig& c) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  const auto p = instantiate(c.potential, c.d_list.at(0));
  const StartSpec point = StartSpec::point(filled(p.d, c.x0));
  LocalErrorOptions opt;
  opt.replicas = c.replicas;
  opt.substeps = c.substeps;
  opt.seed = c.seed;
  opt.workers = c.workers;

  std::vector<LocalErrorPoint> strong_pts, weak_pts;
  weak_pts = local_errors(p, point, c.h_list, opt);
  strong_pts = p.quadratic ? local_errors(p, StartSpec::stationary(*p.quadratic), c.h_list, opt) : weak_pts;

  o << "reference: " << (p.quadratic ? "exact OU transition" : "Euler-Maruyama with " + std::to_string(c.substeps) +
                                                                 " substeps")
    << "\n";
  o << "h,strong_rms,strong_se,weak_norm,weak_se,analytic_weak\n";
  std::vector<double> hs, strong, weak, analytic;
  for (std::size_t i = 0; i < c.h_list.size(); ++i) {
    const double h = c.h_list[i];
    const double a = exact_weak_error_unit_quadratic(h, 1.0);
    hs.push_back(h);
    strong.push_back(strong_pts[i].strong_rms);
    weak.push_back(weak_pts[i].weak_norm);
    analytic.push_back(a);
    o << fmt(h) << "," << fmt(strong_pts[i].strong_rms) << "," << fmt(strong_pts[i].strong_rms_se) << ","
      << fmt(weak_pts[i].weak_norm) << "," << fmt(weak_pts[i].weak_se) << "," << fmt(a) << "\n";
  }

  const auto sf = fit_loglog(hs, strong);
  o << "# fit strong: slope=" << fmt(sf.slope) << " intercept=" << fmt(sf.intercept) << " r2=" << fmt(sf.r2) << "\n";
  add_check(rep, o, "strong order", c.strong_range.contains(sf.slope) && sf.r2 >= c.r2_min,
            in_range_text(sf.slope, c.strong_range) + ", r2=" + fmt(sf.r2) + " >= " + label(c.r2_min));

  if (std::all_of(weak.begin(), weak.end(), [](double w) { return w > 0.0; })) {
    const auto wf = fit_loglog(hs, weak);
    o << "# fit weak: slope=" << fmt(wf.slope) << " intercept=" << fmt(wf.intercept) << " r2=" << fmt(wf.r2) << "\n";
    add_check(rep, o, "weak order", c.weak_range.contains(wf.slope), in_range_text(wf.slope, c.weak_range));
  } else {
    add_check(rep, o, "weak order", false, "zero weak error on the grid");
  }
  if (c.x0 == 0.0 && is_even(c.potential)) {
    o << "# note: x0 = 0 on an even target: the weak error vanishes by symmetry; use a nonzero x0\n";
  }
  const auto af = fit_loglog(hs, analytic);
  o << "# fit analytic weak: slope=" << fmt(af.slope) << " intercept=" << fmt(af.intercept) << " r2=" << fmt(af.r2)
    << "\n";
  add_check(rep, o, "analytic weak order", c.analytic_range.contains(af.slope),
            in_range_text(af.slope, c.analytic_range));
  rep.text = o.str();
  return rep;
}

Report verify_contraction(const ExperimentConfig& c) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  const auto p = instantiate(c.potential, c.d_list.at(0));
  const Vector x = filled(p.d, c.x0);
  const Vector y = filled(p.d, -c.x0);
  o << "h,steps,lmc_rate,lmc_expected_rate,ou_rate,max_factor_deviation\n";
  for (double h : c.h_list) {
    ChainConfig cc;
    cc.h = h;
    cc.steps = horizon(c, h);
    cc.replicas = c.replicas;
    cc.seed = c.seed;
    cc.workers = c.workers;
    const std::size_t burn = std::min(cc.steps - 1, steps_for(c.burn_in_time, h));
    const auto lmc = contraction_rate(p, cc, x, y, burn);

    std::string ou_text = "";
    double expected = 0.0;
    double max_dev = 0.0;
    if (p.quadratic) {
      const auto& q = *p.quadratic;
      std::vector<double> times;
      for (std::size_t k = burn; k <= cc.steps; ++k) times.push_back(static_cast<double>(k) * h);
      const auto ou = ou_contraction_rate(q, x, y, times);
      ou_text = fmt(ou.rate);
      const double m = q.min_curvature();
      add_check(rep, o, "OU contraction rate h=" + label(h),
                !ou.degenerate && std::abs(ou.rate - m) <= c.contraction_tol * m,
                "rate " + fmt(ou.rate) + " vs m=" + fmt(m) + ", tol " + label(c.contraction_tol));

      expected = std::numeric_limits<double>::infinity();
      for (double lam : q.curvatures) expected = std::min(expected, -std::log(std::abs(1.0 - lam * h)) / h);
      add_check(rep, o, "LMC contraction rate h=" + label(h),
                !lmc.degenerate && std::abs(lmc.rate - expected) <= c.contraction_tol * expected,
                "rate " + fmt(lmc.rate) + " vs " + fmt(expected) + ", tol " + label(c.contraction_tol));

      // Noise cancels exactly in the coupled difference: each coordinate
      // shrinks by |1 - lambda h| per step up to rounding.
      const auto run = run_coupled_pair(p, cc, x, y);
      for (std::size_t k = 0; k < cc.steps; ++k) {
        for (std::size_t i = 0; i < p.d; ++i) {
          const double dk = std::sqrt(run.coord_mean_sq[k][i]);
          const double dk1 = std::sqrt(run.coord_mean_sq[k + 1][i]);
          max_dev = std::max(max_dev, std::abs(dk1 - std::abs(1.0 - q.curvatures[i] * h) * dk));
        }
      }
      add_check(rep, o, "LMC per-step factor h=" + label(h), max_dev <= 1e-13,
                "max |d_{k+1} - |1 - lambda h| d_k| = " + fmt(max_dev) + " <= 1e-13");
    } else {
      expected = p.m;
      add_check(rep, o, "LMC contraction rate h=" + label(h), !lmc.degenerate && lmc.rate >= p.m * (1.0 - c.contraction_tol),
                "rate " + fmt(lmc.rate) + " >= m(1 - tol) = " + fmt(p.m * (1.0 - c.contraction_tol)));
    }
    o << fmt(h) << "," << cc.steps << "," << fmt(lmc.rate) << "," << fmt(expected) << "," << ou_text << ","
      << fmt(max_dev) << "\n";
  }
  rep.text = o.str();
  return rep;
}

std::vector<double> mixing_h_grid(const QuadraticSpec& q, std::vector<double> extra) {
  const double top = 0.98 * 2.0 / q.max_curvature();
  const double bottom = std::min(1e-4, top / 2.0);
  std::vector<double> hs;
  const int n = 48;
  for (int i = 0; i < n; ++i) hs.push_back(bottom * std::pow(top / bottom, static_cast<double>(i) / (n - 1)));
  for (double h : extra) {
    if (h > 0.0 && h < 2.0 / q.max_curvature()) hs.push_back(h);
  }
  std::sort(hs.begin(), hs.end());
  return hs;
}

Report bounds_report(const ExperimentConfig& c) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  for (auto d : c.d_list) {
    auto p = instantiate(c.potential, d);
    p.G = resolve_G(p, c);
    const Vector x0 = filled(p.d, c.x0);
    double ex0 = 0.0;
    for (double v : x0) ex0 += v * v;
    double w2_0 = 0.0;
    double emu = 0.0;
    if (p.quadratic) {
      const auto target = stationary_law(*p.quadratic);
      emu = target.expected_sq_norm();
      w2_0 = w2_diag(DiagonalGaussian::point(x0), target);
    } else {
      const auto pm = pilot_moments(p, c);
      const auto mu = c.ground_truth == GroundTruth::Exact ? target_mean(p, c) : pm.mean;
      emu = pm.sq_norm;
      double cross = 0.0;
      for (std::size_t i = 0; i < p.d; ++i) cross += x0[i] * mu[i];
      // Independent coupling: an upper bound on W2(delta_x0, mu).
      w2_0 = std::sqrt(std::max(0.0, ex0 - 2.0 * cross + emu));
    }
    const auto ledger = lmc_ledger(p, ex0, emu);
    const auto relaxed = with_relaxed_constant(ledger);

    o << "[" << p.name << "]\n";
    o << "d=" << p.d << "\n";
    o << "m=" << fmt(p.m) << "\nL=" << fmt(p.L) << "\nkappa=" << fmt(p.kappa()) << "\nG=" << fmt(*p.G) << "\n";
    o << "E|x0|^2=" << fmt(ex0) << "\nE_mu|x|^2=" << fmt(emu) << "\nW2_0=" << fmt(w2_0) << "\n";
    o << "beta=" << fmt(ledger.beta) << "\nkappa_A=" << fmt(ledger.kappa_A) << "\nC0=" << fmt(ledger.C0)
      << "\nC1=" << fmt(ledger.C1) << "\nD1=" << fmt(ledger.D1) << "\nC2=" << fmt(ledger.C2)
      << "\nD2=" << fmt(ledger.D2) << "\np1=" << fmt(ledger.p1) << "\np2=" << fmt(ledger.p2)
      << "\nh0=" << fmt(ledger.h0) << "\nU^2=" << fmt(ledger.Usq) << "\n";
    o << "h1=" << fmt(ledger.h1) << "\nC=" << fmt(ledger.C) << "\nC_LMC=" << fmt(*ledger.C_lmc) << "\n";

    const bool two_block = c.potential.family == PotentialSpec::Family::TwoBlock;
    o << "eps,mixing_upper,mixing_upper_C_LMC,upper_step,mixing_lower,exact_k,exact_h\n";
    for (double eps : c.eps_list) {
      const auto up = mixing_upper(eps, w2_0, ledger);
      const auto up_relaxed = mixing_upper(eps, w2_0, relaxed);
      const double h_up = mixing_upper_step(eps, relaxed);
      const double lower = two_block ? mixing_lower(d, eps) : 0.0;
      o << fmt(eps) << "," << up << "," << up_relaxed << "," << fmt(h_up) << ","
        << (two_block ? fmt(lower) : "") << ",";
      const double bound_at = w2_upper(up_relaxed, h_up, w2_0, relaxed);
      if (p.quadratic) {
        const auto ex = exact_mixing_time(*p.quadratic, x0, eps, mixing_h_grid(*p.quadratic, {h_up}), c.mixing_cap);
        o << ex.k << "," << fmt(ex.h) << "\n";
        const bool ok = (!two_block || lower <= static_cast<double>(ex.k)) && ex.k <= up_relaxed;
        add_check(rep, o, "mixing sandwich d=" + std::to_string(d) + " eps=" + label(eps), ok,
                  (two_block ? fmt(lower) + " <= " : "") + std::to_string(ex.k) + " <= " + std::to_string(up_relaxed));
      } else {
        o << ",\n";
      }
      add_check(rep, o, "upper bound attains eps d=" + std::to_string(d) + " eps=" + label(eps),
                up_relaxed == 0 || bound_at <= eps * (1.0 + 1e-9),
                "w2_upper(k=" + std::to_string(up_relaxed) + ", h=" + fmt(h_up) + ")=" + fmt(bound_at));
    }

    if (p.quadratic) {
      const auto target = stationary_law(*p.quadratic);
      for (double h : c.h_list) {
        if (h > relaxed.h1 * (1.0 + 1e-12)) {
          o << "# note: h=" << fmt(h) << " exceeds h1=" << fmt(relaxed.h1) << "; bound not certified there\n";
          continue;
        }
        double worst = std::numeric_limits<double>::infinity();
        std::size_t worst_k = 0;
        for (std::size_t k = 0; k <= c.k_max; ++k) {
          const double exact = w2_diag(lmc_iterate_law(*p.quadratic, h, k, x0), target);
          const double margin = w2_upper(k, h, w2_0, relaxed) - exact;
          if (margin < worst) {
            worst = margin;
            worst_k = k;
          }
        }
        add_check(rep, o, "W2 bound soundness d=" + std::to_string(d) + " h=" + label(h), worst >= 0.0,
                  "min margin " + fmt(worst) + " at k=" + std::to_string(worst_k) + ", k <= " +
                      std::to_string(c.k_max));
      }
    }
  }
  rep.text = o.str();
  return rep;
}

Report lower_bound_check(const ExperimentConfig& c) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  if (c.x0 != 1.0) o << "# note: the lower bound is stated for x0 = 1; x0=" << fmt(c.x0) << "\n";
  o << "d,eps,mixing_lower,exact_k,exact_h,mixing_upper,upper_step\n";
  for (auto d : c.d_list) {
    const auto p = instantiate(c.potential, d);
    const auto& q = *p.quadratic;
    const Vector x0 = filled(p.d, c.x0);
    const auto target = stationary_law(q);
    const double ex0 = DiagonalGaussian::point(x0).expected_sq_norm();
    const double w2_0 = w2_diag(DiagonalGaussian::point(x0), target);
    const auto relaxed = with_relaxed_constant(lmc_ledger(p, ex0, target.expected_sq_norm()));
    for (double eps : c.eps_list) {
      const double lower = mixing_lower(d, eps);
      const auto upper = mixing_upper(eps, w2_0, relaxed);
      const double h_up = mixing_upper_step(eps, relaxed);
      const auto ex = exact_mixing_time(q, x0, eps, mixing_h_grid(q, {h_up}), c.mixing_cap);
      o << d << "," << fmt(eps) << "," << fmt(lower) << "," << ex.k << "," << fmt(ex.h) << "," << upper << ","
        << fmt(h_up) << "\n";
      add_check(rep, o, "sandwich d=" + std::to_string(d) + " eps=" + label(eps),
                lower <= static_cast<double>(ex.k) && ex.k <= upper,
                fmt(lower) + " <= " + std::to_string(ex.k) + " <= " + std::to_string(upper));
    }
  }
  rep.text = o.str();
  return rep;
}

Report sample(const ExperimentConfig& c) {
  Report rep;
  std::ostringstream o;
  o << config_header(c);
  const auto p = instantiate(c.potential, c.d_list.at(0));
  ChainConfig cc;
  cc.h = c.h_list.at(0);
  cc.steps = horizon(c, cc.h);
  cc.replicas = c.replicas;
  cc.seed = c.seed;
  cc.x0 = StartSpec::point(filled(p.d, c.x0));
  cc.workers = c.workers;
  const auto run = run_chains(p, cc, {cc.steps}, true);
  const auto& states = run.records.back().states;
  o << "replica";
  for (std::size_t i = 0; i < p.d; ++i) o << ",x" << (i + 1);
  o << "\n";
  for (std::size_t j = 0; j < c.replicas; ++j) {
    o << j;
    for (std::size_t i = 0; i < p.d; ++i) o << "," << fmt(states[j * p.d + i]);
    o << "\n";
  }
  rep.text = o.str();
  return rep;
}

Report run_experiment(const ExperimentConfig& c) {
  switch (c.mode) {
    case Mode::SweepDim: return render_sweep(c, sweep_dim(c));
    case Mode::SweepStep: return render_sweep(c, sweep_step(c));
    case Mode::VerifyOrders: return verify_orders(c);
    case Mode::VerifyContraction: return verify_contraction(c);
    case Mode::BoundsReport: return bounds_report(c);
    case Mode::LowerBoundCheck: return lower_bound_check(c);
    case Mode::Sample: return sample(c);
  }
  throw ConfigError("unhandled mode");
}

}  // namespace lmsa
