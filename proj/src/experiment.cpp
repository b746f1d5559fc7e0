#include "voterlab/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "voterlab/analytic.hpp"
#include "voterlab/diffusion.hpp"
#include "voterlab/dual.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/version.hpp"
#include "voterlab/voter.hpp"

namespace voterlab {

namespace {

// Substream tags; replica indices stay below 2^40.
constexpr std::uint64_t kGraphStream = 1;
constexpr std::uint64_t kVoterStream = 2;
constexpr std::uint64_t kDualStream = 3;
constexpr std::uint64_t kDualStreamB = 4;
constexpr std::uint64_t kDiffStream = 5;

std::uint64_t salt(std::uint64_t tag, std::uint64_t replica, std::uint64_t aux = 0) {
  return (aux << 48) | (tag << 40) | replica;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

std::vector<double> linspace(double a, double b, std::uint32_t k) {
  if (k == 0) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> out(k);
  if (k == 1) {
    out[0] = a;
    return out;
  }
  for (std::uint32_t i = 0; i < k; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / (k - 1);
  return out;
}

std::vector<double> geomspace(double a, double b, std::uint32_t k) {
  if (!(a > 0.0) || !(b >= a)) throw std::invalid_argument("geo grid needs 0 < a <= b");
  std::vector<double> out = linspace(std::log(a), std::log(b), k);
  for (double& x : out) x = std::exp(x);
  return out;
}

// Runs fn(replica) across a small thread pool; replicas are claimed through an
// atomic counter and every result lands in a replica-indexed slot upstream, so
// aggregation order never depends on scheduling.
template <typename Fn>
void parallel_replicas(std::uint32_t count, std::uint32_t workers, const Fn& fn) {
  workers = std::min(std::max(workers, 1u), std::max(count, 1u));
  if (workers <= 1) {
    for (std::uint32_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<std::uint32_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::uint32_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::uint32_t r = next.fetch_add(1);
        if (r >= count) return;
        try {
          fn(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> se;
};

ColumnStats column_stats(const std::vector<std::vector<double>>& rows) {
  ColumnStats out;
  if (rows.empty()) return out;
  const std::size_t cols = rows.front().size();
  out.mean.assign(cols, 0.0);
  out.se.assign(cols, 0.0);
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][j];
    out.mean[j] = mean(column);
    out.se[j] = standard_error(column);
  }
  return out;
}

void check_schedule(const std::vector<double>& schedule) {
  double prev = 0.0;
  for (double t : schedule) {
    if (t < prev) throw std::invalid_argument("time grid must be non-decreasing from 0");
    prev = t;
  }
}

// One voter run per replica sampled on a common schedule; annealed (fresh
// graph per replica) unless the spec pins one shared graph.
std::vector<std::vector<double>> voter_rows(const ExperimentSpec& spec, std::uint32_t replicas,
                                            const std::vector<double>& schedule,
                                            std::uint32_t workers, std::uint64_t aux = 0) {
  check_schedule(schedule);
  std::optional<RegularGraph> shared;
  if (spec.fixed_graph)
    shared.emplace(generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0, aux))));
  std::vector<std::vector<double>> rows(replicas);
  parallel_replicas(replicas, workers, [&](std::uint32_t r) {
    std::optional<RegularGraph> own;
    const RegularGraph& g =
        shared ? *shared
               : own.emplace(generate_regular(spec.n, spec.d,
                                              derive_seed(spec.seed, salt(kGraphStream, r, aux))));
    VoterState st(g, spec.u, derive_seed(spec.seed, salt(kVoterStream, r, aux)));
    auto& row = rows[r];
    row.reserve(schedule.size());
    for (double t : schedule) {
      st.advance_to(t);
      row.push_back(st.d_density());
    }
  });
  return rows;
}

void echo_common(const ExperimentSpec& spec, std::uint32_t replicas, std::uint32_t workers,
                 ExperimentSummary& s) {
  s.fields["experiment"] = to_string(spec.kind);
  s.fields["version"] = kVersion;
  s.fields["n"] = spec.n;
  s.fields["d"] = spec.d;
  s.fields["u"] = spec.u;
  s.fields["replicas"] = replicas;
  s.fields["seed"] = spec.seed;
  s.fields["workers"] = workers;
  s.fields["fixed_graph"] = spec.fixed_graph;
}

void finish_summary(const ExperimentSpec& spec, ExperimentSummary& s) {
  if (!s.error.empty()) {
    s.fields["error"] = s.error;
    s.passed = false;
  }
  s.fields["pass"] = s.passed;
  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".summary.json");
    f << s.fields.dump(2) << '\n';
  }
}

void write_samples_csv(const std::string& path,
                       const std::vector<std::optional<double>>& samples, double t_cap,
                       const char* hit_outcome) {
  auto f = open_out(path);
  f << "replica,outcome,time\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const bool hit = samples[r].has_value();
    f << r << ',' << (hit ? hit_outcome : "censored") << ','
      << fmt17(hit ? *samples[r] : t_cap) << '\n';
  }
}

// Mean with censored entries clamped to the cap; the censored count is
// reported alongside wherever this is used.
double clamped_mean(const std::vector<std::optional<double>>& samples, double t_cap) {
  double sum = 0.0;
  for (const auto& s : samples) sum += s ? *s : t_cap;
  return sum / static_cast<double>(samples.size());
}

std::size_t censored_count(const std::vector<std::optional<double>>& samples) {
  std::size_t c = 0;
  for (const auto& s : samples) c += !s.has_value();
  return c;
}

// Weighted fit of log(survival) against t over the grid window, keeping only
// points with 0 < S < 1. Weight S*N/(1-S) is the delta-method inverse variance.
std::optional<LineFit> survival_log_fit(const std::vector<std::pair<double, double>>& curve,
                                        std::size_t sample_count) {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  for (const auto& [t, sv] : curve) {
    if (!(sv > 0.0 && sv < 1.0)) continue;
    x.push_back(t);
    y.push_back(std::log(sv));
    w.push_back(sv * static_cast<double>(sample_count) / (1.0 - sv));
  }
  if (x.size() < 2) return std::nullopt;
  return weighted_least_squares(x, y, w);
}

ExperimentSummary run_curve_short(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 200;
  const double tol = spec.tolerance > 0 ? spec.tolerance : 0.02;
  const std::vector<double> grid = spec.grid.empty() ? linspace(0.0, 5.0, 51) : spec.grid;

  const auto rows = voter_rows(spec, replicas, grid, workers);
  const auto stats = column_stats(rows);

  double sup_gap = 0.0;
  std::vector<double> prediction(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    prediction[j] = expected_discordance(spec.u, spec.d, grid[j], spec.n, 1e-10);
    sup_gap = std::max(sup_gap, std::abs(stats.mean[j] - prediction[j]));
  }

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["grid_points"] = grid.size();
  s.fields["t_min"] = grid.front();
  s.fields["t_max"] = grid.back();
  s.fields["sup_gap"] = sup_gap;
  s.fields["tolerance"] = tol;
  s.passed = sup_gap <= tol;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "t,mean_d,se_d,prediction\n";
    for (std::size_t j = 0; j < grid.size(); ++j)
      f << fmt17(grid[j]) << ',' << fmt17(stats.mean[j]) << ',' << fmt17(stats.se[j]) << ','
        << fmt17(prediction[j]) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_plateau(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 200;
  const double tol = spec.tolerance > 0 ? spec.tolerance : 0.02;
  const std::vector<double> grid = spec.grid.empty() ? std::vector<double>{20.0, 30.0, 50.0} : spec.grid;

  const auto rows = voter_rows(spec, replicas, grid, workers);
  const auto stats = column_stats(rows);
  const double plateau = 2.0 * spec.u * (1.0 - spec.u) * theta(spec.d);

  double max_abs_dev = 0.0;
  for (double m : stats.mean) max_abs_dev = std::max(max_abs_dev, std::abs(m - plateau));

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["plateau"] = plateau;
  s.fields["max_abs_deviation"] = max_abs_dev;
  s.fields["tolerance"] = tol;
  s.passed = max_abs_dev <= tol;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "t,mean_d,se_d,plateau,deviation\n";
    for (std::size_t j = 0; j < grid.size(); ++j)
      f << fmt17(grid[j]) << ',' << fmt17(stats.mean[j]) << ',' << fmt17(stats.se[j]) << ','
        << fmt17(plateau) << ',' << fmt17(stats.mean[j] - plateau) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_long_decay(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 500;
  const double slope_tol = spec.tolerance > 0 ? spec.tolerance : 0.10;
  const double intercept_tol = 0.05;
  const std::vector<double> s_grid =
      spec.grid.empty() ? std::vector<double>{0.25, 0.5, 1.0, 1.5, 2.0} : spec.grid;

  ExperimentSummary s;
  if (!(spec.u > 0.0 && spec.u < 1.0)) {
    echo_common(spec, replicas, workers, s);
    s.error = "long-decay needs an interior initial density u";
    finish_summary(spec, s);
    return s;
  }

  std::vector<double> schedule(s_grid.size());
  for (std::size_t j = 0; j < s_grid.size(); ++j) schedule[j] = s_grid[j] * spec.n;
  const auto rows = voter_rows(spec, replicas, schedule, workers);
  const auto stats = column_stats(rows);

  std::vector<double> y(s_grid.size());
  std::vector<double> w(s_grid.size());
  echo_common(spec, replicas, workers, s);
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    if (!(stats.mean[j] > 0.0)) {
      s.error = "no surviving discordance mass at a grid point; cannot fit the decay";
      finish_summary(spec, s);
      return s;
    }
    y[j] = std::log(stats.mean[j]);
    const double se = std::max(stats.se[j], 1e-12);
    w[j] = (stats.mean[j] / se) * (stats.mean[j] / se);
  }
  const LineFit fit = weighted_least_squares(s_grid, y, w);

  const double th = theta(spec.d);
  const double slope_target = -2.0 * th;
  const double intercept_target = std::log(2.0 * spec.u * (1.0 - spec.u) * th);
  const double slope_rel_err = std::abs(fit.slope - slope_target) / std::abs(slope_target);
  const double intercept_abs_err = std::abs(fit.intercept - intercept_target);

  s.fields["slope"] = fit.slope;
  s.fields["slope_target"] = slope_target;
  s.fields["slope_rel_err"] = slope_rel_err;
  s.fields["slope_tolerance"] = slope_tol;
  s.fields["intercept"] = fit.intercept;
  s.fields["intercept_target"] = intercept_target;
  s.fields["intercept_abs_err"] = intercept_abs_err;
  s.fields["intercept_tolerance"] = intercept_tol;
  const bool slope_ok = slope_rel_err <= slope_tol;
  const bool intercept_ok = intercept_abs_err <= intercept_tol;
  s.fields["pass_slope"] = slope_ok;
  s.fields["pass_intercept"] = intercept_ok;
  s.passed = slope_ok && intercept_ok;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "s,t,mean_d,se_d\n";
    for (std::size_t j = 0; j < s_grid.size(); ++j)
      f << fmt17(s_grid[j]) << ',' << fmt17(schedule[j]) << ',' << fmt17(stats.mean[j]) << ','
        << fmt17(stats.se[j]) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_meeting_tail(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 2000;
  const double t_cap = spec.t_cap > 0 ? spec.t_cap : 10.0 * spec.n;
  const bool adjacent = spec.meeting_mode == "adjacent";
  if (!adjacent && spec.meeting_mode != "stationary")
    throw std::invalid_argument("meeting mode must be stationary or adjacent");
  const double plateau_t = 50.0;
  if (adjacent && t_cap < plateau_t)
    throw std::invalid_argument("adjacent mode needs t_cap >= 50");

  std::optional<RegularGraph> shared;
  if (spec.fixed_graph)
    shared.emplace(generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0))));

  const auto radius = static_cast<std::uint32_t>(std::max(
      1.0, std::floor(std::log(static_cast<double>(spec.n)) / std::log(static_cast<double>(spec.d)) / 5.0)));

  std::vector<std::optional<double>> samples(replicas);
  std::vector<char> no_ltle(replicas, 0);
  parallel_replicas(replicas, workers, [&](std::uint32_t r) {
    std::optional<RegularGraph> own;
    const RegularGraph& g =
        shared ? *shared
               : own.emplace(generate_regular(spec.n, spec.d,
                                              derive_seed(spec.seed, salt(kGraphStream, r))));
    Rng rng(derive_seed(spec.seed, salt(kDualStream, r)));
    if (!adjacent) {
      samples[r] = meeting_time_stationary(g, t_cap, rng);
      return;
    }
    // Uniform LTLE edge by rejection; the graph is overwhelmingly tree-like
    // locally, so this settles almost immediately.
    RegularGraph::Edge e = g.edges()[rng.uniform_below(g.edge_count())];
    bool found = false;
    for (std::uint32_t tries = 0; tries < 4 * g.edge_count(); ++tries) {
      if (is_ltle_edge(g, e, radius)) {
        found = true;
        break;
      }
      e = g.edges()[rng.uniform_below(g.edge_count())];
    }
    no_ltle[r] = !found;
    samples[r] = meeting_time_pair(g, e.first, e.second, t_cap, rng);
  });

  const std::size_t censored = censored_count(samples);
  const std::size_t uncensored = samples.size() - censored;
  const double th = theta(spec.d);

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["mode"] = adjacent ? "adjacent" : "stationary";
  s.fields["t_cap"] = t_cap;
  s.fields["censored"] = censored;
  if (adjacent) {
    std::size_t misses = 0;
    for (char c : no_ltle) misses += c;
    s.fields["ltle_radius"] = radius;
    s.fields["no_ltle_replicas"] = misses;
  }

  if (uncensored < 100) {
    s.error = "insufficient uncensored samples for tail estimation";
    finish_summary(spec, s);
    return s;
  }

  const auto fit_grid = geomspace(spec.n / 2.0, 3.0 * spec.n, 25);
  const auto curve = survival_curve(samples, t_cap, fit_grid);
  const auto fit = survival_log_fit(curve, samples.size());
  const double rate_target = 2.0 * th / spec.n;

  bool rate_ok = false;
  if (fit) {
    const double rate = -fit->slope;
    s.fields["tail_rate"] = rate;
    s.fields["tail_rate_target"] = rate_target;
    s.fields["tail_rate_rel_err"] = std::abs(rate - rate_target) / rate_target;
    rate_ok = std::abs(rate - rate_target) <= 0.10 * rate_target;
    s.fields["pass_tail_rate"] = rate_ok;
  } else {
    s.error = "survival curve degenerate over the fit window";
    finish_summary(spec, s);
    return s;
  }

  if (!adjacent) {
    const double mean_over_n = clamped_mean(samples, t_cap) / spec.n;
    const double mean_target = 1.0 / (2.0 * th);
    const bool mean_ok = std::abs(mean_over_n - mean_target) <= 0.15 * mean_target;
    s.fields["mean_over_n"] = mean_over_n;
    s.fields["mean_target"] = mean_target;
    s.fields["pass_mean"] = mean_ok;
    s.passed = mean_ok && rate_ok;
  } else {
    std::size_t beyond = 0;
    for (const auto& v : samples) beyond += !v.has_value() || *v > plateau_t;
    const double s_plateau = static_cast<double>(beyond) / samples.size();
    const bool plateau_ok = std::abs(s_plateau - th) <= 0.05;
    s.fields["plateau_t"] = plateau_t;
    s.fields["survival_at_plateau"] = s_plateau;
    s.fields["plateau_target"] = th;
    s.fields["pass_plateau"] = plateau_ok;
    s.passed = plateau_ok && rate_ok;
  }

  if (!spec.out_prefix.empty())
    write_samples_csv(spec.out_prefix + ".data.csv", samples, t_cap, "met");
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_coalescence_scaling(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 300;
  const double t_cap = spec.t_cap > 0 ? spec.t_cap : 20.0 * spec.n;

  std::optional<RegularGraph> shared;
  if (spec.fixed_graph)
    shared.emplace(generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0))));

  std::vector<std::optional<double>> coal(replicas);
  std::vector<std::optional<double>> meet(replicas);
  parallel_replicas(replicas, workers, [&](std::uint32_t r) {
    std::optional<RegularGraph> own;
    const RegularGraph& g =
        shared ? *shared
               : own.emplace(generate_regular(spec.n, spec.d,
                                              derive_seed(spec.seed, salt(kGraphStream, r))));
    Rng rng_c(derive_seed(spec.seed, salt(kDualStream, r)));
    Rng rng_m(derive_seed(spec.seed, salt(kDualStreamB, r)));
    coal[r] = coalescence_time(g, t_cap, rng_c);
    meet[r] = meeting_time_stationary(g, t_cap, rng_m);
  });

  const double th = theta(spec.d);
  const double mean_coal = clamped_mean(coal, t_cap);
  const double mean_meet = clamped_mean(meet, t_cap);
  const double coal_over_n = mean_coal / spec.n;
  const double coal_target = 1.0 / th;
  const double ratio = mean_coal / mean_meet;
  const bool coal_ok = std::abs(coal_over_n - coal_target) <= 0.15 * coal_target;
  const bool ratio_ok = std::abs(ratio - 2.0) <= 0.30;

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["t_cap"] = t_cap;
  s.fields["censored_coalescence"] = censored_count(coal);
  s.fields["censored_meeting"] = censored_count(meet);
  s.fields["coalescence_over_n"] = coal_over_n;
  s.fields["coalescence_target"] = coal_target;
  s.fields["meeting_over_n"] = mean_meet / spec.n;
  s.fields["ratio"] = ratio;
  s.fields["ratio_target"] = 2.0;
  s.fields["pass_coalescence"] = coal_ok;
  s.fields["pass_ratio"] = ratio_ok;
  s.passed = coal_ok && ratio_ok;

  if (!spec.out_prefix.empty()) {
    write_samples_csv(spec.out_prefix + ".data.csv", coal, t_cap, "coalesced");
    write_samples_csv(spec.out_prefix + ".meeting.csv", meet, t_cap, "met");
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_fvtl_returns(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 100000;
  const double log_n = std::log(static_cast<double>(spec.n));
  const std::uint32_t T =
      spec.fvtl_T ? spec.fvtl_T : static_cast<std::uint32_t>(std::ceil(log_n * log_n));
  const double tol = spec.tolerance > 0 ? spec.tolerance : 0.10;

  const RegularGraph g =
      generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0)));
  const std::uint64_t chain_seed = derive_seed(spec.seed, salt(kDualStream, 0));

  std::vector<double> counts(replicas);
  parallel_replicas(replicas, workers, [&](std::uint32_t r) {
    Rng rng = Rng::for_stream(chain_seed, r);
    counts[r] = product_chain_visits(g, T, rng);
  });

  const double estimate = 1.0 + mean(counts);
  const double se = standard_error(counts);
  const double target = (spec.d - 1.0) / (spec.d - 2.0);

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["T"] = T;
  s.fields["estimate"] = estimate;
  s.fields["se"] = se;
  s.fields["target"] = target;
  s.fields["tolerance"] = tol;
  s.passed = std::abs(estimate - target) <= tol;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "replica,visits\n";
    for (std::size_t r = 0; r < counts.size(); ++r)
      f << r << ',' << static_cast<std::uint64_t>(counts[r]) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_distributional(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 500;
  const double tol = spec.tolerance > 0 ? spec.tolerance : 0.10;
  const double mass_tol = 0.06;
  const double th = theta(spec.d);
  const double t_voter = spec.s_horizon * spec.n;
  const double horizon = 2.0 * th * spec.s_horizon;

  const auto rows = voter_rows(spec, replicas, {t_voter}, workers);
  std::vector<double> voter_vals(replicas);
  for (std::uint32_t r = 0; r < replicas; ++r) voter_vals[r] = rows[r][0];

  const auto endpoints = endpoint_samples(spec.u, spec.d, horizon, spec.dt, replicas,
                                          derive_seed(spec.seed, salt(kDiffStream, 0)));
  std::vector<double> diff_vals(replicas);
  for (std::uint32_t r = 0; r < replicas; ++r)
    diff_vals[r] = 2.0 * th * endpoints[r] * (1.0 - endpoints[r]);

  const double ks = ks_statistic(voter_vals, diff_vals);
  double mass_voter = 0.0;
  double mass_diff = 0.0;
  for (double v : voter_vals) mass_voter += v == 0.0;
  for (double v : diff_vals) mass_diff += v == 0.0;
  mass_voter /= replicas;
  mass_diff /= replicas;
  const double mass_gap = std::abs(mass_voter - mass_diff);

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["s"] = spec.s_horizon;
  s.fields["t_voter"] = t_voter;
  s.fields["diffusion_horizon"] = horizon;
  s.fields["dt"] = spec.dt;
  s.fields["ks"] = ks;
  s.fields["ks_tolerance"] = tol;
  s.fields["consensus_mass_voter"] = mass_voter;
  s.fields["consensus_mass_diffusion"] = mass_diff;
  s.fields["consensus_mass_gap"] = mass_gap;
  s.fields["consensus_mass_tolerance"] = mass_tol;
  const bool ks_ok = ks <= tol;
  const bool mass_ok = mass_gap <= mass_tol;
  s.fields["pass_ks"] = ks_ok;
  s.fields["pass_consensus_mass"] = mass_ok;
  s.passed = ks_ok && mass_ok;

  if (!spec.out_prefix.empty()) {
    {
      auto f = open_out(spec.out_prefix + ".data.csv");
      f << "replica,value\n";
      for (std::size_t r = 0; r < voter_vals.size(); ++r)
        f << r << ',' << fmt17(voter_vals[r]) << '\n';
    }
    auto f = open_out(spec.out_prefix + ".diffusion.csv");
    for (double b : endpoints) f << fmt17(b) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

struct SweepResult {
  std::vector<double> sup_dev;            // per replica
  std::vector<double> exceedance;         // per eps entry
  double gate_fraction = 0.0;             // at eps = 0.05
};

SweepResult sweep_one_size(const ExperimentSpec& spec, std::uint32_t size, std::uint32_t replicas,
                           std::uint32_t workers, std::uint64_t aux) {
  const double t_max = std::pow(static_cast<double>(size), 1.0 - spec.delta);
  const double spacing = spec.sweep_spacing > 0 ? spec.sweep_spacing : 1.0 / size;
  const auto points = static_cast<std::size_t>(std::floor(t_max / spacing)) + 1;

  std::optional<RegularGraph> shared;
  if (spec.fixed_graph)
    shared.emplace(generate_regular(size, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0, aux))));

  const auto replica_graph = [&](std::uint32_t r) {
    return generate_regular(size, spec.d, derive_seed(spec.seed, salt(kGraphStream, r, aux)));
  };
  const auto replica_state = [&](std::uint32_t r, const RegularGraph& g) {
    return VoterState(g, spec.u, derive_seed(spec.seed, salt(kVoterStream, r, aux)));
  };

  // Pass 1: mean curve. Replicas are grouped in fixed blocks and block sums
  // are reduced in index order, so the result is bit-stable for any worker
  // count. Pass 2 replays the same replicas against the mean curve.
  constexpr std::uint32_t kBlock = 32;
  const std::uint32_t blocks = (replicas + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_sum(blocks);
  parallel_replicas(blocks, workers, [&](std::uint32_t b) {
    auto& sum = block_sum[b];
    sum.assign(points, 0.0);
    const std::uint32_t lo = b * kBlock;
    const std::uint32_t hi = std::min(replicas, lo + kBlock);
    for (std::uint32_t r = lo; r < hi; ++r) {
      std::optional<RegularGraph> own;
      const RegularGraph& g = shared ? *shared : own.emplace(replica_graph(r));
      VoterState st = replica_state(r, g);
      for (std::size_t k = 0; k < points; ++k) {
        st.advance_to(static_cast<double>(k) * spacing);
        sum[k] += st.d_density();
      }
    }
  });
  std::vector<double> mean_curve(points, 0.0);
  for (std::uint32_t b = 0; b < blocks; ++b)
    for (std::size_t k = 0; k < points; ++k) mean_curve[k] += block_sum[b][k];
  for (double& v : mean_curve) v /= replicas;
  block_sum.clear();
  block_sum.shrink_to_fit();

  SweepResult out;
  out.sup_dev.assign(replicas, 0.0);
  parallel_replicas(replicas, workers, [&](std::uint32_t r) {
    std::optional<RegularGraph> own;
    const RegularGraph& g = shared ? *shared : own.emplace(replica_graph(r));
    VoterState st = replica_state(r, g);
    double sup = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      st.advance_to(static_cast<double>(k) * spacing);
      sup = std::max(sup, std::abs(st.d_density() - mean_curve[k]));
    }
    out.sup_dev[r] = sup;
  });

  const auto fraction_over = [&](double eps) {
    std::size_t c = 0;
    for (double v : out.sup_dev) c += v > eps;
    return static_cast<double>(c) / replicas;
  };
  out.exceedance.reserve(spec.eps_list.size());
  for (double eps : spec.eps_list) out.exceedance.push_back(fraction_over(eps));
  out.gate_fraction = fraction_over(0.05);
  return out;
}

ExperimentSummary run_concentration_sweep(const ExperimentSpec& spec, std::uint32_t workers) {
  const std::uint32_t replicas = spec.replicas ? spec.replicas : 200;
  const double frac_tol = spec.tolerance > 0 ? spec.tolerance : 0.10;
  if (!(spec.delta > 0.0 && spec.delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");

  const SweepResult base = sweep_one_size(spec, spec.n, replicas, workers, 0);
  const SweepResult doubled = sweep_one_size(spec, 2 * spec.n, replicas, workers, 1);

  const double p1 = base.gate_fraction;
  const double p2 = doubled.gate_fraction;
  const double trend_se =
      std::sqrt(p1 * (1.0 - p1) / replicas + p2 * (1.0 - p2) / replicas);
  const bool frac_ok = p1 <= frac_tol;
  const bool trend_ok = p2 <= p1 + 2.0 * trend_se;

  ExperimentSummary s;
  echo_common(spec, replicas, workers, s);
  s.fields["delta"] = spec.delta;
  s.fields["gate_eps"] = 0.05;
  s.fields["gate_fraction_n"] = p1;
  s.fields["gate_fraction_2n"] = p2;
  s.fields["gate_tolerance"] = frac_tol;
  s.fields["trend_se"] = trend_se;
  for (std::size_t i = 0; i < spec.eps_list.size(); ++i) {
    const std::string key = "eps_" + fmt17(spec.eps_list[i]);
    s.fields["exceedance_n_" + key] = base.exceedance[i];
    s.fields["exceedance_2n_" + key] = doubled.exceedance[i];
  }
  s.fields["pass_fraction"] = frac_ok;
  s.fields["pass_trend"] = trend_ok;
  s.passed = frac_ok && trend_ok;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "n,replica,sup_dev\n";
    for (std::size_t r = 0; r < base.sup_dev.size(); ++r)
      f << spec.n << ',' << r << ',' << fmt17(base.sup_dev[r]) << '\n';
    for (std::size_t r = 0; r < doubled.sup_dev.size(); ++r)
      f << 2 * spec.n << ',' << r << ',' << fmt17(doubled.sup_dev[r]) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_figure1(const ExperimentSpec& spec, std::uint32_t workers) {
  const double t_cap = spec.t_cap > 0 ? spec.t_cap : 2e4;
  const RegularGraph g =
      generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0)));
  const std::uint64_t voter_seed = derive_seed(spec.seed, salt(kVoterStream, 0));

  // First pass pins the exact consensus time, second pass replays the same
  // stream onto a recording schedule.
  VoterState probe(g, spec.u, voter_seed);
  const auto consensus = probe.run_until_consensus(t_cap);
  const double t_end = consensus ? *consensus : t_cap;

  std::vector<double> schedule;
  for (double t = 0.0; t <= 5.0 + 1e-12 && t < t_end; t += 0.01) schedule.push_back(t);
  for (double t = 6.0; t < t_end; t += 1.0) schedule.push_back(t);
  schedule.push_back(t_end);

  VoterState st(g, spec.u, voter_seed);
  Trajectory tr = run_recorded(st, schedule);

  ExperimentSummary s;
  echo_common(spec, 1, workers, s);
  s.fields["t_cap"] = t_cap;
  s.fields["consensus_reached"] = consensus.has_value();
  if (consensus) s.fields["consensus_time"] = *consensus;
  s.fields["samples"] = tr.samples.size();
  s.passed = consensus.has_value();

  if (!spec.out_prefix.empty()) {
    save_trajectory(tr, spec.out_prefix + ".data.csv");
    auto f = open_out(spec.out_prefix + ".overlay.csv");
    f << "t,prediction\n";
    for (double t : linspace(0.0, 5.0, 501))
      f << fmt17(t) << ',' << fmt17(expected_discordance(spec.u, spec.d, t, spec.n, 1e-10)) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

ExperimentSummary run_figure2(const ExperimentSpec& spec, std::uint32_t workers) {
  const double t_cap = spec.t_cap > 0 ? spec.t_cap : 2e4;
  const double tol = spec.tolerance > 0 ? spec.tolerance : 0.03;
  const double th = theta(spec.d);
  const RegularGraph g =
      generate_regular(spec.n, spec.d, derive_seed(spec.seed, salt(kGraphStream, 0)));
  VoterState st(g, spec.u, derive_seed(spec.seed, salt(kVoterStream, 0)));

  struct Row {
    double t;
    double minority;
    double d_density;
    double reference;
  };
  std::vector<Row> rows;
  bool reached = false;
  for (double t = 0.0; t <= t_cap; t += 1.0) {
    st.advance_to(t);
    const double b = st.b_density();
    rows.push_back({t, std::min(b, 1.0 - b), st.d_density(), b * (1.0 - b)});
    if (st.at_consensus()) {
      reached = true;
      break;
    }
  }

  double late_gap = 0.0;
  std::size_t late_count = 0;
  for (const Row& r : rows) {
    if (r.t < spec.n / 4.0) continue;
    late_gap += std::abs(r.d_density - 2.0 * th * r.reference);
    ++late_count;
  }
  if (late_count > 0) late_gap /= static_cast<double>(late_count);

  ExperimentSummary s;
  echo_common(spec, 1, workers, s);
  s.fields["t_cap"] = t_cap;
  s.fields["consensus_reached"] = reached;
  s.fields["samples"] = rows.size();
  s.fields["late_samples"] = late_count;
  s.fields["mean_abs_late_gap"] = late_gap;
  s.fields["tolerance"] = tol;
  s.passed = late_gap <= tol;

  if (!spec.out_prefix.empty()) {
    auto f = open_out(spec.out_prefix + ".data.csv");
    f << "minority_density,d_density,reference\n";
    for (const Row& r : rows)
      f << fmt17(r.minority) << ',' << fmt17(r.d_density) << ',' << fmt17(r.reference) << '\n';
  }
  finish_summary(spec, s);
  return s;
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "curve-short") return ExperimentKind::kCurveShort;
  if (name == "plateau") return ExperimentKind::kPlateau;
  if (name == "long-decay") return ExperimentKind::kLongDecay;
  if (name == "meeting-tail") return ExperimentKind::kMeetingTail;
  if (name == "coalescence-scaling") return ExperimentKind::kCoalescenceScaling;
  if (name == "fvtl-returns") return ExperimentKind::kFvtlReturns;
  if (name == "distributional") return ExperimentKind::kDistributional;
  if (name == "concentration-sweep") return ExperimentKind::kConcentrationSweep;
  if (name == "figure1") return ExperimentKind::kFigure1;
  if (name == "figure2") return ExperimentKind::kFigure2;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kCurveShort: return "curve-short";
    case ExperimentKind::kPlateau: return "plateau";
    case ExperimentKind::kLongDecay: return "long-decay";
    case ExperimentKind::kMeetingTail: return "meeting-tail";
    case ExperimentKind::kCoalescenceScaling: return "coalescence-scaling";
    case ExperimentKind::kFvtlReturns: return "fvtl-returns";
    case ExperimentKind::kDistributional: return "distributional";
    case ExperimentKind::kConcentrationSweep: return "concentration-sweep";
    case ExperimentKind::kFigure1: return "figure1";
    case ExperimentKind::kFigure2: return "figure2";
  }
  throw std::logic_error("unhandled experiment kind");
}

std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  const auto c3 = text.find(':', c2 == std::string::npos ? c2 : c2 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos)
    throw std::invalid_argument("grid must be lin:a:b:k or geo:a:b:k");
  const std::string form = text.substr(0, c1);
  double a = 0.0;
  double b = 0.0;
  unsigned long k = 0;
  try {
    a = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    b = std::stod(text.substr(c2 + 1, c3 - c2 - 1));
    k = std::stoul(text.substr(c3 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must be lin:a:b:k or geo:a:b:k with numeric fields");
  }
  if (k == 0 || k > 100000000) throw std::invalid_argument("grid point count out of range");
  if (!(b >= a)) throw std::invalid_argument("grid needs a <= b");
  if (form == "lin") return linspace(a, b, static_cast<std::uint32_t>(k));
  if (form == "geo") return geomspace(a, b, static_cast<std::uint32_t>(k));
  throw std::invalid_argument("grid form must be lin or geo");
}

std::uint32_t resolve_workers(std::uint32_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VOTERLAB_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0 && v < 4096) return static_cast<std::uint32_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  const std::uint32_t workers = resolve_workers(spec.workers);
  switch (spec.kind) {
    case ExperimentKind::kCurveShort: return run_curve_short(spec, workers);
    case ExperimentKind::kPlateau: return run_plateau(spec, workers);
    case ExperimentKind::kLongDecay: return run_long_decay(spec, workers);
    case ExperimentKind::kMeetingTail: return run_meeting_tail(spec, workers);
    case ExperimentKind::kCoalescenceScaling: return run_coalescence_scaling(spec, workers);
    case ExperimentKind::kFvtlReturns: return run_fvtl_returns(spec, workers);
    case ExperimentKind::kDistributional: return run_distributional(spec, workers);
    case ExperimentKind::kConcentrationSweep: return run_concentration_sweep(spec, workers);
    case ExperimentKind::kFigure1: return run_figure1(spec, workers);
    case ExperimentKind::kFigure2: return run_figure2(spec, workers);
  }
  throw std::logic_error("unhandled experiment kind");
}

}  // namespace voterlab
