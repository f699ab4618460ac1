#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmsa/estimators.hpp"
#include "lmsa/potentials.hpp"

namespace lmsa {

enum class Mode { SweepDim, SweepStep, VerifyOrders, VerifyContraction, BoundsReport, LowerBoundCheck, Sample };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Closed acceptance interval for a fitted slope or rate.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

enum class GroundTruth { Exact, Pilot };

/// Effective experiment configuration. Every field has a mode-dependent
/// default; see make_config.
struct ExperimentConfig {
  Mode mode = Mode::SweepDim;
  PotentialSpec potential;
  std::vector<std::size_t> d_list;
  std::vector<double> h_list;
  std::size_t replicas = 10'000;
  std::optional<std::size_t> steps;  // horizon K
  std::optional<double> time;        // horizon T; K = ceil(T/h) when steps is unset
  std::uint64_t seed = 1;
  std::vector<double> eps_list;
  double x0 = 0.0;  // chains start at x0 * 1_d

  std::size_t window = 10;    // sweep-dim: trailing iterates averaged
  double window_time = 10.0;  // sweep-step: trailing iterates = ceil(window_time/h)

  GroundTruth ground_truth = GroundTruth::Exact;
  double h_gt = 0.01;
  std::size_t replicas_gt = 20'000;
  double time_gt = 10.0;

  std::size_t substeps = 16;
  Range strong_range{1.4, 1.6};
  Range weak_range{1.7, 2.3};
  Range analytic_range{1.9, 2.1};
  Range slope_range{0.35, 0.65};
  double r2_min = 0.99;  // strong-order fit quality

  std::optional<double> G;
  double G_radius = 10.0;
  std::size_t G_samples = 10'000;

  std::size_t mixing_cap = 10'000'000;
  std::size_t k_max = 10'000;
  double burn_in_time = 2.0;
  double contraction_tol = 0.01;

  // Not echoed into output headers: neither changes any result.
  std::size_t workers = 0;
  std::string out;
};

/// Ordered key=value pairs as read from a file or flags.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Keys accepted by make_config.
const std::vector<std::string>& config_keys();

/// Parses config text. Lines "key=value", blank lines and '#' comments are
/// accepted. If any line starts with "# config:" (an output header), only
/// those lines are read, so a previous output file can be used as config.
/// Throws ConfigError on malformed lines.
ConfigEntries parse_config_text(const std::string& text);

ConfigEntries read_config_file(const std::string& path);

/// Applies mode defaults, then entries in order (later entries win; each
/// repeated key adds a message to `warnings`), then validates. Requires a
/// "mode" entry. Throws ConfigError for unknown keys or bad values and
/// StabilityError for unstable quadratic step sizes.
ExperimentConfig make_config(const ConfigEntries& entries, std::vector<std::string>* warnings = nullptr);

/// "# config: key=value" lines for every result-affecting field.
std::string config_header(const ExperimentConfig& cfg);

/// One pass/fail outcome of an experiment.
struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string text;  // full output: config header, body, footer
  std::vector<Check> checks;
  bool pass() const;
};

/// One row of a sweep CSV.
struct SweepRow {
  double axis_value = 0.0;
  double error_mean = 0.0;
  double error_std = 0.0;
  std::size_t n_samples = 0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  double floor = 0.0;  // Monte Carlo floor sqrt(sum_i Var x_i / M), window average
};

struct SweepResult {
  std::vector<SweepRow> rows;
  OrderFit fit;
  std::vector<std::string> notes;
};

/// Stationary mean of the target: exact (f1: -(1/d) 1 from E grad f = 0 and
/// symmetry; f2 and quadratics: 0) or from a pilot run, per cfg.
Vector target_mean(const PotentialModel& p, const ExperimentConfig& cfg);

/// E_mu |x|^2: exact for quadratics, pilot run otherwise.
double target_sq_norm(const PotentialModel& p, const ExperimentConfig& cfg);

SweepResult sweep_dim(const ExperimentConfig& cfg);
SweepResult sweep_step(const ExperimentConfig& cfg);

/// CSV text (header, rows, footer) and the slope check for a sweep.
Report render_sweep(const ExperimentConfig& cfg, const SweepResult& result);

Report verify_orders(const ExperimentConfig& cfg);
Report verify_contraction(const ExperimentConfig& cfg);
Report bounds_report(const ExperimentConfig& cfg);
Report lower_bound_check(const ExperimentConfig& cfg);
Report sample(const ExperimentConfig& cfg);

/// Dispatches on cfg.mode.
Report run_experiment(const ExperimentConfig& cfg);

/// Step sizes searched by the exact mixing time: 48 log-spaced points in
/// [1e-4, 0.98 * 2/L] plus `extra`.
std::vector<double> mixing_h_grid(const QuadraticSpec& q, std::vector<double> extra = {});

}  // namespace lmsa
