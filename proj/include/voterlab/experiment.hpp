#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace voterlab {

enum class ExperimentKind {
  kCurveShort,
  kPlateau,
  kLongDecay,
  kMeetingTail,
  kCoalescenceScaling,
  kFvtlReturns,
  kDistributional,
  kConcentrationSweep,
  kFigure1,
  kFigure2,
};

// Kind names as used on the command line, e.g. "curve-short", "figure1".
ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

// "lin:a:b:k" (k evenly spaced points from a to b) or "geo:a:b:k"
// (log-evenly spaced, requires a > 0).
std::vector<double> parse_grid(const std::string& text);

// Explicit request, else VOTERLAB_WORKERS, else hardware concurrency.
std::uint32_t resolve_workers(std::uint32_t requested);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kCurveShort;
  std::uint32_t n = 1000;
  std::uint32_t d = 3;
  double u = 0.5;
  std::uint32_t replicas = 0;  // 0 picks the kind default
  std::uint64_t seed = 1;
  std::uint32_t workers = 0;   // 0 defers to environment, then hardware
  std::string out_prefix;      // empty runs without writing files
  bool fixed_graph = false;    // one shared graph instead of one per replica
  double t_cap = 0.0;          // 0 picks the kind default
  std::vector<double> grid;    // empty picks the kind default
  double tolerance = 0.0;      // 0 picks the kind default

  // Kind-specific knobs.
  std::string meeting_mode = "stationary";  // meeting-tail: or "adjacent"
  double s_horizon = 1.0;                   // distributional: voter time s * n
  double dt = 1e-4;                         // distributional: diffusion step
  double delta = 0.2;                       // concentration: window n^(1-delta)
  double sweep_spacing = 0.0;               // concentration: grid step, 0 = 1/n
  std::vector<double> eps_list = {0.02, 0.05, 0.1};  // concentration thresholds
  std::uint32_t fvtl_T = 0;                 // fvtl-returns: 0 = ceil(log^2 n)
};

// Flat key-value summary; written as <prefix>.summary.json. `passed` mirrors
// the "pass" field; a nonempty `error` marks a run whose statistics could not
// be evaluated as specified (exit code 1 at the CLI).
struct ExperimentSummary {
  nlohmann::ordered_json fields;
  bool passed = false;
  std::string error;
};

// Runs one experiment; writes <prefix>.summary.json plus the kind's data
// file(s) when out_prefix is nonempty. Statistical tolerance misses set
// passed = false; parameter and I/O problems throw.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

}  // namespace voterlab
