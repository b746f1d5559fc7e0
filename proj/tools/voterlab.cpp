#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voterlab/analytic.hpp"
#include "voterlab/dual.hpp"
#include "voterlab/experiment.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/version.hpp"
#include "voterlab/voter.hpp"

namespace {

using namespace voterlab;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RegularGraph make_graph(const std::string& graph_path, std::uint32_t n, std::uint32_t d,
                        std::uint64_t seed) {
  if (!graph_path.empty()) return load_graph(graph_path);
  return generate_regular(n, d, seed);
}

int cmd_gen_graph(std::uint32_t n, std::uint32_t d, std::uint64_t seed, const std::string& out,
                  std::uint32_t ltle_radius) {
  const RegularGraph g = generate_regular(n, d, seed);
  save_graph(g, out);
  std::cout << "n=" << g.vertex_count() << " d=" << g.degree() << " edges=" << g.edge_count()
            << " connected=" << (is_connected(g) ? "yes" : "no");
  if (ltle_radius > 0) {
    std::uint32_t good = 0;
    for (const auto& e : g.edges()) good += is_ltle_edge(g, e, ltle_radius);
    std::cout << " ltle_edges=" << good << "/" << g.edge_count() << " radius=" << ltle_radius;
  }
  std::cout << '\n';
  return 0;
}

int cmd_fd_curve(std::uint32_t d, const std::string& grid_text, double eps,
                 const std::string& out) {
  const std::vector<double> grid = parse_grid(grid_text);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot open " + out + " for writing");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "t,cdf,survival\n";
  for (double t : grid) {
    const double cdf = meeting_cdf_tree(d, t, eps);
    os << fmt17(t) << ',' << fmt17(cdf) << ',' << fmt17(1.0 - cdf) << '\n';
  }
  std::cerr << "theta=" << fmt17(theta(d)) << " cdf_limit=" << fmt17(1.0 / (d - 1.0)) << '\n';
  return 0;
}

int cmd_simulate(std::uint32_t n, std::uint32_t d, double u, std::uint64_t seed,
                 const std::string& grid_text, const std::string& graph_path,
                 const std::string& out) {
  const RegularGraph g = make_graph(graph_path, n, d, derive_seed(seed, 1));
  VoterState st(g, u, derive_seed(seed, 2));
  const Trajectory tr = run_recorded(st, parse_grid(grid_text));
  if (!out.empty()) save_trajectory(tr, out);
  std::cout << "t=" << fmt17(st.time()) << " b=" << fmt17(st.b_density())
            << " d=" << fmt17(st.d_density())
            << " consensus=" << (st.at_consensus() ? "yes" : "no") << '\n';
  return 0;
}

int cmd_dual(std::uint32_t n, std::uint32_t d, std::uint64_t seed, const std::string& mode,
             std::uint32_t x, std::uint32_t y, double t_cap, std::uint32_t replicas,
             const std::string& graph_path, const std::string& out) {
  const RegularGraph g = make_graph(graph_path, n, d, derive_seed(seed, 1));
  if (t_cap <= 0) t_cap = (mode == "coalescence" ? 20.0 : 10.0) * g.vertex_count();

  std::vector<std::optional<double>> samples(replicas);
  for (std::uint32_t r = 0; r < replicas; ++r) {
    Rng rng = Rng::for_stream(derive_seed(seed, 2), r);
    if (mode == "stationary") {
      samples[r] = meeting_time_stationary(g, t_cap, rng);
    } else if (mode == "pair") {
      samples[r] = meeting_time_pair(g, x, y, t_cap, rng);
    } else if (mode == "coalescence") {
      samples[r] = coalescence_time(g, t_cap, rng);
    } else {
      throw std::invalid_argument("mode must be stationary, pair or coalescence");
    }
  }

  double sum = 0.0;
  std::size_t censored = 0;
  for (const auto& s : samples) {
    sum += s ? *s : t_cap;
    censored += !s.has_value();
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    f << "replica,outcome,time\n";
    for (std::size_t r = 0; r < samples.size(); ++r)
      f << r << ',' << (samples[r] ? "hit" : "censored") << ','
        << fmt17(samples[r] ? *samples[r] : t_cap) << '\n';
  }
  std::cout << "mode=" << mode << " replicas=" << replicas << " censored=" << censored
            << " clamped_mean=" << fmt17(sum / replicas)
            << " clamped_mean_over_n=" << fmt17(sum / replicas / g.vertex_count()) << '\n';
  return 0;
}

int cmd_experiment(const ExperimentSpec& spec) {
  const ExperimentSummary summary = run_experiment(spec);
  std::cout << summary.fields.dump(2) << '\n';
  if (!summary.error.empty()) return 1;
  return summary.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven voter model and coalescing random walk laboratory"};
  app.set_version_flag("--version", voterlab::kVersion);
  app.require_subcommand(1);
  std::function<int()> action;

  {
    auto* c = app.add_subcommand("gen-graph", "sample a random d-regular graph and save it");
    auto n = std::make_shared<std::uint32_t>(1000);
    auto d = std::make_shared<std::uint32_t>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto out = std::make_shared<std::string>();
    auto radius = std::make_shared<std::uint32_t>(0);
    c->add_option("--n", *n, "vertex count");
    c->add_option("--d", *d, "degree");
    c->add_option("--seed", *seed, "master seed");
    c->add_option("--out", *out, "output path")->required();
    c->add_option("--ltle-radius", *radius, "also count locally tree-like edges at this radius");
    c->callback([&action, n, d, seed, out, radius] {
      action = [=] { return cmd_gen_graph(*n, *d, *seed, *out, *radius); };
    });
  }

  {
    auto* c = app.add_subcommand("fd-curve", "tabulate the tree meeting-time law");
    auto d = std::make_shared<std::uint32_t>(3);
    auto grid = std::make_shared<std::string>("lin:0:10:101");
    auto eps = std::make_shared<double>(1e-10);
    auto out = std::make_shared<std::string>();
    c->add_option("--d", *d, "degree");
    c->add_option("--grid", *grid, "time grid, lin:a:b:k or geo:a:b:k");
    c->add_option("--eps", *eps, "series truncation error");
    c->add_option("--out", *out, "output path (default stdout)");
    c->callback([&action, d, grid, eps, out] {
      action = [=] { return cmd_fd_curve(*d, *grid, *eps, *out); };
    });
  }

  {
    auto* c = app.add_subcommand("simulate", "run one voter trajectory on a sampling grid");
    auto n = std::make_shared<std::uint32_t>(1000);
    auto d = std::make_shared<std::uint32_t>(3);
    auto u = std::make_shared<double>(0.5);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto grid = std::make_shared<std::string>("lin:0:50:501");
    auto graph = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--n", *n, "vertex count");
    c->add_option("--d", *d, "degree");
    c->add_option("--u", *u, "initial density of opinion 1");
    c->add_option("--seed", *seed, "master seed");
    c->add_option("--grid", *grid, "sampling grid, lin:a:b:k or geo:a:b:k");
    c->add_option("--graph", *graph, "load this graph file instead of sampling one");
    c->add_option("--out", *out, "trajectory CSV path");
    c->callback([&action, n, d, u, seed, grid, graph, out] {
      action = [=] { return cmd_simulate(*n, *d, *u, *seed, *grid, *graph, *out); };
    });
  }

  {
    auto* c = app.add_subcommand("dual", "sample meeting or coalescence times");
    auto n = std::make_shared<std::uint32_t>(1000);
    auto d = std::make_shared<std::uint32_t>(3);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto mode = std::make_shared<std::string>("stationary");
    auto x = std::make_shared<std::uint32_t>(0);
    auto y = std::make_shared<std::uint32_t>(1);
    auto t_cap = std::make_shared<double>(0.0);
    auto replicas = std::make_shared<std::uint32_t>(1000);
    auto graph = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--n", *n, "vertex count");
    c->add_option("--d", *d, "degree");
    c->add_option("--seed", *seed, "master seed");
    c->add_option("--mode", *mode, "stationary, pair or coalescence");
    c->add_option("--x", *x, "first walker start (pair mode)");
    c->add_option("--y", *y, "second walker start (pair mode)");
    c->add_option("--t-cap", *t_cap, "censoring time (0 = mode default)");
    c->add_option("--replicas", *replicas, "sample count");
    c->add_option("--graph", *graph, "load this graph file instead of sampling one");
    c->add_option("--out", *out, "samples CSV path");
    c->callback([&action, n, d, seed, mode, x, y, t_cap, replicas, graph, out] {
      action = [=] {
        return cmd_dual(*n, *d, *seed, *mode, *x, *y, *t_cap, *replicas, *graph, *out);
      };
    });
  }

  {
    auto* c = app.add_subcommand("experiment", "run a predefined experiment to a summary");
    auto spec = std::make_shared<ExperimentSpec>();
    auto kind = std::make_shared<std::string>();
    auto grid = std::make_shared<std::string>();
    c->add_option("kind", *kind,
                  "curve-short, plateau, long-decay, meeting-tail, coalescence-scaling, "
                  "fvtl-returns, distributional, concentration-sweep, figure1 or figure2")
        ->required();
    c->add_option("--n", spec->n, "vertex count");
    c->add_option("--d", spec->d, "degree");
    c->add_option("--u", spec->u, "initial density of opinion 1");
    c->add_option("--replicas", spec->replicas, "replica count (0 = experiment default)");
    c->add_option("--seed", spec->seed, "master seed");
    c->add_option("--workers", spec->workers,
                  "worker threads (0 = VOTERLAB_WORKERS or hardware)");
    c->add_option("--out", spec->out_prefix, "output prefix for summary and data files");
    c->add_flag("--fixed-graph", spec->fixed_graph, "reuse one graph across replicas");
    c->add_option("--t-cap", spec->t_cap, "censoring or run cap (0 = experiment default)");
    c->add_option("--grid", *grid, "override the sampling grid, lin:a:b:k or geo:a:b:k");
    c->add_option("--tol", spec->tolerance, "override the primary tolerance");
    c->add_option("--mode", spec->meeting_mode, "meeting-tail start law: stationary or adjacent");
    c->add_option("--s", spec->s_horizon, "diffusive time horizon in units of n");
    c->add_option("--dt", spec->dt, "Euler step for the diffusion comparison");
    c->add_option("--delta", spec->delta, "concentration window exponent: t up to n^(1-delta)");
    c->add_option("--sweep-spacing", spec->sweep_spacing,
                  "concentration sampling spacing (0 = 1/n)");
    c->add_option("--eps", spec->eps_list, "concentration exceedance thresholds");
    c->add_option("--T", spec->fvtl_T, "product-chain step budget (0 = ceil(log^2 n))");
    c->callback([&action, spec, kind, grid] {
      action = [=] {
        ExperimentSpec s = *spec;
        s.kind = parse_experiment_kind(*kind);
        if (!grid->empty()) s.grid = parse_grid(*grid);
        return cmd_experiment(s);
      };
    });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
