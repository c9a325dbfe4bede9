// gm: command-line front end for the complex momentum experiments.
//
//   gm trajectory --game dirac --opt cm:0.9:pi/8 --alpha 0.1
//   gm heatmap --mode alternating --grid mag=0:0.99:64 --grid arg=0:pi:64
//   gm spectrum --game bilinear:1
//   gm sweep --seed 3 --out sweep.csv
//   gm corollary
//
// Every CSV begins with a "# {json}" line holding the resolved configuration;
// pass that file back with --config to reproduce it.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmgame/errors.hpp"
#include "cmgame/harness.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string game;
  std::vector<std::string> opts;
  double alpha = 0.0;
  std::vector<std::string> grids;
  std::string mode;
  std::string metric;
  std::size_t steps = 0;
  double tol = 0.0;
  std::size_t budget = 0;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::vector<double> start;
  std::string out;
  unsigned workers = 0;
};

void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--config", o.config_path, "Load a JSON config or a previous output file");
  sub->add_option("--game", o.game, "dirac | bilinear:<n> | interp:<n>:<gamma_max>:<seed>");
  sub->add_option("--opt", o.opts, "Optimizer preset (sweep: method names)");
  sub->add_option("--alpha", o.alpha, "Step size");
  sub->add_option("--grid", o.grids, "Grid axis KEY=lo:hi:n[:log] or KEY=v1,v2,...");
  sub->add_option("--seed", o.seed, "Seed for randomised games");
  sub->add_option("--out", o.out, "Output path (default stdout)");
  sub->add_option("--start", o.start, "Initial joint parameters")->delimiter(',');
  sub->add_option("--steps", o.steps, "Trajectory length");
  sub->add_option("--tol", o.tol, "Relative distance tolerance");
  sub->add_option("--budget", o.budget, "Gradient evaluation cap per run");
  sub->add_option("--size", o.size, "Per-player dimension of the sweep game");
  sub->add_option("--mode", o.mode, "simultaneous | alternating");
  sub->add_option("--metric", o.metric, "steps | grad_evals");
  sub->add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)");
}

bool given(const CLI::App* sub, const std::string& name) { return sub->count(name) > 0; }

cmgame::ExperimentConfig build_config(const CLI::App* sub, const CliOptions& o) {
  cmgame::ExperimentConfig c;
  if (given(sub, "--config")) c = cmgame::load_config(o.config_path);
  c.experiment = sub->get_name();
  if (given(sub, "--game")) c.game = o.game;
  if (given(sub, "--opt")) c.optimizers = o.opts;
  if (given(sub, "--alpha")) c.alpha = o.alpha;
  for (const std::string& g : o.grids) {
    const auto eq = g.find('=');
    if (eq == std::string::npos || eq == 0) throw cmgame::EmptyGrid("grid '" + g + "' must be KEY=SPEC");
    c.grids[g.substr(0, eq)] = cmgame::parse_grid(std::string_view(g).substr(eq + 1));
  }
  if (given(sub, "--seed")) c.seed = o.seed;
  if (given(sub, "--out")) c.out = o.out;
  if (given(sub, "--start")) c.start = o.start;
  if (given(sub, "--steps")) c.steps = o.steps;
  if (given(sub, "--tol")) c.tol = o.tol;
  if (given(sub, "--budget")) c.eval_budget = o.budget;
  if (given(sub, "--size")) c.size = o.size;
  if (given(sub, "--mode")) c.mode = o.mode;
  if (given(sub, "--metric")) c.metric = o.metric;
  return cmgame::resolve(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex momentum experiments"};
  app.require_subcommand(1);
  CliOptions opts;
  for (const char* name : {"trajectory", "heatmap", "spectrum", "sweep", "corollary"}) {
    add_common(app.add_subcommand(name), opts);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    const cmgame::ExperimentConfig cfg = build_config(sub, opts);
    if (cfg.out.empty()) return cmgame::run_experiment(cfg, std::cout, opts.workers);
    std::ofstream file(cfg.out);
    if (!file) {
      std::cerr << "gm: cannot write " << cfg.out << '\n';
      return 2;
    }
    return cmgame::run_experiment(cfg, file, opts.workers);
  } catch (const cmgame::Error& e) {
    std::cerr << "gm: " << e.what() << '\n';
    return 2;
  }
}
