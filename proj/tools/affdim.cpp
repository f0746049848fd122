// affdim: affinity dimension, pressure and equilibrium-measure tools for
// self-affine iterated function systems.

#include <iostream>

#include <CLI11.hpp>

#include "affdim/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"affdim: subadditive pressure and affinity dimension of affine IFS"};
  app.require_subcommand(1);
  affdim::RunConfig config;
  double t = 0;
  std::string grid;
  std::uint64_t budget = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--ifs", config.ifs_path, "IFS document (JSON)")->required();
    sub->add_option("--nmax", config.n_max, "deepest level n");
    sub->add_option("--tol", config.tolerance, "root bracket width");
    sub->add_option("--workers", config.workers, "OpenMP threads (results do not depend on it)");
    sub->add_option("--out", config.out_dir, "output directory for reports and side files");
    sub->add_option("--budget", budget, "maximum number of words per enumeration");
    sub->add_option("--cache", config.cache_path, "persistent partition-sum cache file");
    sub->add_option("--seed", config.seed, "64-bit seed");
  };
  auto with_t = [&](CLI::App* sub) {
    sub->add_option("--t", t, "parameter t");
    sub->add_option("--t-grid", grid, "A:B:STEP or t0,t1,...");
  };
  auto with_cloud = [&](CLI::App* sub) {
    sub->add_option("--driver", config.driver, "uniform | equilibrium")->check(CLI::IsMember({"uniform", "equilibrium"}));
    sub->add_option("--depth", config.depth, "depth of the equilibrium driver");
    sub->add_option("--points", config.points, "number of chaos-game points");
    sub->add_option("--burn-in", config.burn_in, "discarded iterates per chain");
  };

  auto* dim = app.add_subcommand("dim", "affinity dimension: roots t_n of P_n");
  common(dim);
  auto* pressure = app.add_subcommand("pressure", "P_n(t) sequence or curve");
  common(pressure);
  with_t(pressure);
  auto* measure = app.add_subcommand("measure", "Cesaro equilibrium approximant mu_n at depth k");
  common(measure);
  with_t(measure);
  measure->add_option("--depth", config.depth, "cylinder depth k");
  auto* verify = app.add_subcommand("verify", "randomized check of the cylinder-function axioms");
  common(verify);
  with_t(verify);
  verify->add_option("--samples", config.samples, "random words");
  auto* render = app.add_subcommand("render", "chaos-game raster (PGM)");
  common(render);
  with_cloud(render);
  render->add_option("--resolution", config.resolution, "raster side in pixels");
  auto* boxdim = app.add_subcommand("boxdim", "box-counting estimate of a chaos-game cloud");
  common(boxdim);
  with_cloud(boxdim);
  boxdim->add_option("--box-first", config.box_first, "coarsest scale exponent j (extent * 2^-j)");
  boxdim->add_option("--box-last", config.box_last, "finest scale exponent j");

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  config.subcommand = sub->get_name();
  if (sub->get_option_no_throw("--t") && sub->count("--t") > 0) config.t = t;
  if (sub->get_option_no_throw("--t-grid") && sub->count("--t-grid") > 0) config.t_grid = grid;
  if (sub->count("--budget") > 0) config.budget = budget;
  return affdim::run(config, std::cout, std::cerr);
}
