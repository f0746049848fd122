#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>

#include "affdim/affine.hpp"
#include "affdim/cylinder.hpp"
#include "affdim/equilibrium.hpp"
#include "affdim/io.hpp"
#include "affdim/pressure.hpp"

namespace affdim {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kVerifyTolerance = 1e-9;

struct Context {
  const RunConfig& config;
  std::ostream& out;
  std::ostream& err;
  AffineIFS ifs;
  ComputeOptions opts;
  KeyValueReport report;
};

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path.string() + ": cannot write");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::filesystem::path out_path(const Context& ctx, const std::string& name) {
  std::filesystem::path dir = ctx.config.out_dir.empty() ? "." : ctx.config.out_dir;
  std::filesystem::create_directories(dir);
  return dir / name;
}

void header(Context& ctx) {
  const auto& c = ctx.config;
  auto& r = ctx.report;
  r.add("tool", "affdim");
  r.add("version", kToolVersion);
  r.add("subcommand", c.subcommand);
  r.add("ifs.name", ctx.ifs.name());
  r.add("ifs.hash", format_hex(ctx.ifs.content_hash()));
  r.add("ifs.dimension", ctx.ifs.dim());
  r.add("ifs.maps", static_cast<std::uint64_t>(ctx.ifs.size()));
  r.add("config.nmax", c.n_max);
  r.add("config.depth", c.depth);
  r.add("config.tol", c.tolerance);
  r.add("config.seed", c.seed);
  r.add("config.budget", ctx.opts.budget.max_words);
  r.add("config.driver", c.driver);
  if (c.t) r.add("config.t", *c.t);
  if (c.t_grid) r.add("config.t_grid", *c.t_grid);
}

int cmd_dim(Context& ctx) {
  const auto rep = affinity_dimension(ctx.ifs, ctx.config.n_max, ctx.config.tolerance, ctx.opts);
  auto& r = ctx.report;
  std::string csv = "n,t_n\n";
  for (const auto& [n, t] : rep.roots) {
    r.add("t_n." + std::to_string(n), t);
    csv += std::to_string(n) + "," + format_double(t) + "\n";
  }
  r.add("upper_bound", rep.upper_bound);
  r.add("upper_bound.kind", "rigorous upper bound (min over levels of t_n)");
  r.add("extrapolated", rep.extrapolated);
  r.add("extrapolated.kind", std::string("estimate (") + rep.extrapolation_method + ")");
  r.add("dimension", rep.prediction);
  r.add("dimension.kind", "min(d, upper_bound)");
  r.add("hypothesis.norm_below_half", rep.norm_half_hypothesis);
  r.add("hypothesis.max_norm", rep.max_norm);
  r.add("partial", rep.partial);
  if (!rep.note.empty()) r.add("note", rep.note);
  if (!ctx.config.out_dir.empty()) write_file(out_path(ctx, "roots.csv"), csv);
  ctx.err << "wall_seconds = " << format_double(rep.wall_seconds) << "\n";
  return 0;
}

int cmd_pressure(Context& ctx) {
  const auto cf = CylinderFunction::natural(ctx.ifs);
  auto& r = ctx.report;
  std::string csv = "t,n,P_n\n";
  if (ctx.config.t_grid) {
    std::vector<double> grid;
    try {
      grid = parse_t_grid(*ctx.config.t_grid);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const auto curve = pressure_curve(cf, grid, ctx.config.n_max, ctx.opts);
    for (const auto& [t, p] : curve) {
      csv += format_double(t) + "," + std::to_string(ctx.config.n_max) + "," + format_double(p) + "\n";
    }
    r.add("curve.points", static_cast<std::uint64_t>(curve.size()));
    r.add("curve.level", ctx.config.n_max);
  } else if (ctx.config.t) {
    const double t = *ctx.config.t;
    if (t < 0) throw UsageError("--t must be non-negative");
    const auto rep = pressure_sequence(cf, t, ctx.config.n_max, ctx.opts);
    for (const auto& [n, p] : rep.per_level) {
      r.add("P_n." + std::to_string(n), p);
      csv += format_double(t) + "," + std::to_string(n) + "," + format_double(p) + "\n";
    }
    r.add("fekete_upper", rep.fekete_upper);
    r.add("fekete_upper.kind", "rigorous upper bound");
    r.add("extrapolated", rep.extrapolated);
    r.add("extrapolated.kind", std::string("estimate (") + rep.extrapolation_method + ")");
    r.add("partial", rep.partial);
    if (!rep.note.empty()) r.add("note", rep.note);
  } else {
    throw UsageError("pressure needs --t or --t-grid");
  }
  if (!ctx.config.out_dir.empty()) write_file(out_path(ctx, "pressure.csv"), csv);
  else ctx.out << csv;
  return 0;
}

struct DriverChoice {
  ChaosDriver driver;
  std::optional<double> t_star;
};

DriverChoice make_driver(Context& ctx) {
  if (ctx.config.driver == "uniform") return {UniformDriver{}, std::nullopt};
  if (ctx.config.driver != "equilibrium") throw UsageError("--driver must be uniform or equilibrium");
  const auto cf = CylinderFunction::natural(ctx.ifs);
  const int n = ctx.config.n_max;
  const int k = std::min(ctx.config.depth, n);
  if (k < 1) throw UsageError("--depth must be >= 1");
  const double t = pressure_root(cf, n, ctx.config.tolerance, ctx.opts).t;
  return {MeasureDriver{mu_cesaro(cf, t, n, k, ctx.opts)}, t};
}

int cmd_measure(Context& ctx) {
  const auto cf = CylinderFunction::natural(ctx.ifs);
  const int n = ctx.config.n_max;
  const int k = ctx.config.depth;
  if (k < 1 || k > n) throw UsageError("--depth must lie in 1..nmax");
  const double t = ctx.config.t ? *ctx.config.t : pressure_root(cf, n, ctx.config.tolerance, ctx.opts).t;
  auto& r = ctx.report;
  r.add("t", t);
  r.add("t.source", ctx.config.t ? "--t" : "root of P_n");
  const auto mu = mu_cesaro(cf, t, n, k, ctx.opts);
  r.add("measure", mu.provenance());
  r.add("measure.depth", k);
  r.add("entropy_k", entropy_depth(mu));
  r.add("energy_k", energy_depth(cf, t, mu, ctx.opts));
  const auto nu = nu_weights(cf, t, n, ctx.opts);
  r.add("jensen_residual_nu", jensen_residual(cf, t, n, nu, ctx.opts));
  if (k < n) {
    const auto diag = equilibrium_diagnostics(cf, t, n, k, ctx.opts);
    r.add("pressure_upper", diag.pressure_upper);
    r.add("gap", diag.gap);
    r.add("invariance_defect_max", diag.invariance_defect_max);
    r.add("invariance_defect_bound", 1.0 / n);
  }
  std::string csv = "word,mass\n";
  const auto masses = mu.masses();
  for (std::size_t i = 0; i < masses.size(); ++i) {
    csv += Word::unpack(i, mu.alphabet(), k).to_string() + "," + format_double(masses[i]) + "\n";
  }
  if (!ctx.config.out_dir.empty()) write_file(out_path(ctx, "measure.csv"), csv);
  else ctx.out << csv;
  return 0;
}

int cmd_verify(Context& ctx) {
  const auto cf = CylinderFunction::natural(ctx.ifs);
  std::vector<double> grid;
  try {
    grid = parse_t_grid(ctx.config.t_grid.value_or("0:3:0.25"));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const auto rep = verify_axioms(cf, grid, ctx.config.n_max, ctx.config.samples, ctx.config.seed,
                                 {.workers = ctx.opts.workers});
  const auto c = cf.constants(0.0);
  auto& r = ctx.report;
  r.add("constants.K_t", c.k_t);
  r.add("constants.s_lo", c.s_lo);
  r.add("constants.s_hi", c.s_hi);
  r.add("samples", rep.samples);
  r.add("bvp_max_ratio", rep.bvp_max_ratio);
  r.add("worst_subchain_violation", rep.worst_subchain_violation);
  r.add("worst_param_violation", rep.worst_param_violation);
  r.add("tolerance", kVerifyTolerance);
  const bool ok = rep.holds(kVerifyTolerance);
  r.add("axioms_hold", ok);
  return ok ? 0 : 2;
}

PointCloud make_cloud(Context& ctx, KeyValueReport& r) {
  auto choice = make_driver(ctx);
  if (choice.t_star) r.add("driver.t", *choice.t_star);
  auto cloud = attractor_points(ctx.ifs, choice.driver, ctx.config.points, ctx.config.burn_in, ctx.config.seed,
                                {.chains = 8, .workers = ctx.opts.workers});
  r.add("cloud.points", static_cast<std::uint64_t>(cloud.size()));
  r.add("cloud.burn_in", ctx.config.burn_in);
  r.add("cloud.driver", cloud.driver);
  return cloud;
}

int cmd_render(Context& ctx) {
  auto& r = ctx.report;
  const auto cloud = make_cloud(ctx, r);
  const auto bounds = cloud_bounds(cloud);
  const auto pgm = render_pgm(cloud, ctx.config.resolution, bounds);
  Fnv1a h;
  h.bytes(pgm.data(), pgm.size());
  r.add("render.resolution", ctx.config.resolution);
  r.add("render.bounds", format_double(bounds.x_min) + "," + format_double(bounds.x_max) + "," +
                             format_double(bounds.y_min) + "," + format_double(bounds.y_max));
  r.add("render.fnv1a", format_hex(h.digest()));
  write_file(out_path(ctx, "attractor.pgm"), std::string(pgm.begin(), pgm.end()));
  return 0;
}

int cmd_boxdim(Context& ctx) {
  auto& r = ctx.report;
  const auto cloud = make_cloud(ctx, r);
  const auto scales = dyadic_scales(cloud, ctx.config.box_first, ctx.config.box_last);
  const auto box = box_dimension(cloud, scales, ctx.opts.workers);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    r.add("box.scale." + std::to_string(k), scales[k]);
    r.add("box.count." + std::to_string(k), box.counts[k]);
  }
  r.add("box.estimate", box.estimate);
  r.add("box.residual", box.residual);
  const auto dim = affinity_dimension(ctx.ifs, ctx.config.n_max, ctx.config.tolerance, ctx.opts);
  r.add("affinity.prediction", dim.prediction);
  r.add("difference", box.estimate - dim.prediction);
  if (!ctx.config.out_dir.empty()) {
    std::string csv;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto p = cloud.point(i);
      for (int c = 0; c < cloud.dim; ++c) {
        if (c > 0) csv += ',';
        csv += format_double(p[static_cast<std::size_t>(c)]);
      }
      csv += '\n';
    }
    write_file(out_path(ctx, "points.csv"), csv);
  }
  return 0;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (!(config.tolerance > 0)) throw UsageError("--tol must be positive");
    if (config.n_max < 1) throw UsageError("--nmax must be >= 1");
    if (config.workers < 1) throw UsageError("--workers must be >= 1");
    if (config.ifs_path.empty()) throw UsageError("--ifs is required");

    PartitionCache cache;
    std::unique_ptr<PersistentCache> store;
    Context ctx{config, out, err, parse_ifs_file(config.ifs_path), {}, {}};
    ctx.opts.workers = config.workers;
    if (config.budget) ctx.opts.budget.max_words = *config.budget;
    ctx.opts.cache = &cache;
    if (!config.cache_path.empty()) {
      store = std::make_unique<PersistentCache>(config.cache_path);
      for (const auto& w : store->warnings()) err << "warning: " << w << "\n";
      store->load_into(cache);
    }
    for (const auto& w : validate_ifs(ctx.ifs).warnings) err << "warning: " << w << "\n";
    header(ctx);

    int status;
    const auto& sub = config.subcommand;
    if (sub == "dim") status = cmd_dim(ctx);
    else if (sub == "pressure") status = cmd_pressure(ctx);
    else if (sub == "measure") status = cmd_measure(ctx);
    else if (sub == "verify") status = cmd_verify(ctx);
    else if (sub == "render") status = cmd_render(ctx);
    else if (sub == "boxdim") status = cmd_boxdim(ctx);
    else throw UsageError("unknown subcommand '" + sub + "'");

    const std::string text = ctx.report.str();
    out << text;
    if (!config.out_dir.empty()) write_file(out_path(ctx, sub + ".txt"), text);
    if (store) store->store_from(cache);
    err << "cache.hits = " << cache.hits() << "\ncache.misses = " << cache.misses() << "\n";
    err << "elapsed_seconds = "
        << format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) << "\n";
    return status;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace affdim
