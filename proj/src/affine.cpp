#include "affdim/affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affdim/rng.hpp"
#include "word_walk.hpp"

namespace affdim {

ValidationReport validate_ifs(const AffineIFS& ifs) {
  ValidationReport report;
  if (ifs.size() < 2) report.errors.push_back("an IFS needs at least two maps, got " + std::to_string(ifs.size()));
  double max_ratio = 0;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto label = "map " + std::to_string(i) + ": ";
    try {
      const double ratio = singular_values(ifs.map(i).linear).top();
      report.contraction_ratios.push_back(ratio);
      max_ratio = std::max(max_ratio, ratio);
      if (!(ratio < 1.0)) {
        report.errors.push_back(label + "not contracting (alpha_1 = " + std::to_string(ratio) + ")");
      } else if (!(ratio < 0.5)) {
        report.warnings.push_back(label + "alpha_1 = " + std::to_string(ratio) +
                                  " is not below 1/2; the full-dimension statement does not apply");
      }
    } catch (const NumericallySingular&) {
      report.contraction_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
      report.errors.push_back(label + "singular matrix");
    } catch (const DomainError& e) {
      report.contraction_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
      report.errors.push_back(label + e.what());
    }
  }
  if (report.ok()) report.bounding_radius = bounding_radius(ifs);
  return report;
}

void require_valid(const AffineIFS& ifs) {
  const auto report = validate_ifs(ifs);
  if (report.ok()) return;
  std::string message = "invalid IFS";
  for (const auto& e : report.errors) message += "; " + e;
  throw DomainError(message);
}

double bounding_radius(const AffineIFS& ifs) {
  double max_ratio = 0;
  double max_shift = 0;
  for (const auto& m : ifs.maps()) {
    max_ratio = std::max(max_ratio, operator_norm(m.linear));
    double norm2 = 0;
    for (double a : m.translation) norm2 += a * a;
    max_shift = std::max(max_shift, std::sqrt(norm2));
  }
  if (!(max_ratio < 1.0)) throw DomainError("bounding radius needs contracting maps");
  return max_shift / (1.0 - max_ratio);
}

std::vector<std::vector<double>> sample_translations(int d, std::size_t maps, std::size_t count,
                                                     double radius, std::uint64_t seed) {
  if (!(radius > 0)) throw DomainError("translation radius must be positive");
  if (d < 1) throw DomainError("dimension must be positive");
  Rng rng(seed);
  std::vector<std::vector<double>> out(count, std::vector<double>(maps * static_cast<std::size_t>(d)));
  for (auto& tuple : out)
    for (double& x : tuple) x = rng.uniform(-radius, radius);
  return out;
}

namespace {

// Cumulative distribution tables for one chaos-game driver.
class SymbolSampler {
 public:
  SymbolSampler(const ChaosDriver& driver, std::size_t q) : q_(q) {
    if (std::holds_alternative<UniformDriver>(driver)) {
      add_row(std::vector<double>(q, 1.0));
    } else if (const auto* w = std::get_if<WeightDriver>(&driver)) {
      if (w->weights.size() != q) throw DomainError("driver weights must have one entry per map");
      add_row(w->weights);
    } else {
      const auto& m = std::get<MeasureDriver>(driver).measure;
      if (m.alphabet().size() != q) throw DomainError("driver measure alphabet differs from the IFS");
      if (m.depth() < 1) throw DomainError("driver measure needs depth >= 1");
      const int k = m.depth();
      contexts_ = detail::ipow(q, k - 1);
      const auto masses = m.masses();
      const auto marginal = m.marginal(1);
      for (std::uint64_t ctx = 0; ctx < contexts_; ++ctx) {
        std::vector<double> row(q);
        double total = 0;
        for (std::size_t a = 0; a < q; ++a) total += row[a] = masses[a * contexts_ + ctx];
        if (total == 0) row.assign(marginal.masses().begin(), marginal.masses().end());
        add_row(row);
      }
      shift_ = contexts_ / q;  // weight of the newest symbol inside a context
    }
  }

  Symbol draw(Rng& rng, std::uint64_t& ctx) const {
    const double* row = cdf_.data() + ctx * q_;
    const double u = rng.uniform();
    std::size_t a = 0;
    while (a + 1 < q_ && !(u < row[a])) ++a;
    if (contexts_ > 1) ctx = a * shift_ + ctx / q_;
    return static_cast<Symbol>(a);
  }

 private:
  void add_row(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0)) throw DomainError("driver weights must be non-negative");
      total += w;
    }
    if (!(total > 0)) throw DomainError("driver weights sum to zero");
    double acc = 0;
    for (double w : weights) cdf_.push_back(acc += w / total);
  }

  std::size_t q_;
  std::uint64_t contexts_ = 1;
  std::uint64_t shift_ = 0;
  std::vector<double> cdf_;
};

std::string driver_name(const ChaosDriver& driver) {
  if (std::holds_alternative<UniformDriver>(driver)) return "uniform";
  if (std::holds_alternative<WeightDriver>(driver)) return "weights";
  return "measure:" + std::get<MeasureDriver>(driver).measure.provenance() + ",depth=" +
         std::to_string(std::get<MeasureDriver>(driver).measure.depth());
}

}  // namespace

PointCloud attractor_points(const AffineIFS& ifs, const ChaosDriver& driver, std::size_t count,
                            std::size_t burn_in, std::uint64_t seed, ChaosOptions opts) {
  const int d = ifs.dim();
  const std::size_t q = ifs.size();
  const SymbolSampler sampler(driver, q);
  const auto chains = static_cast<std::size_t>(std::max(opts.chains, 1));

  PointCloud cloud;
  cloud.dim = d;
  cloud.seed = seed;
  cloud.driver = driver_name(driver);
  cloud.coords.resize(count * static_cast<std::size_t>(d));

  std::vector<std::size_t> offsets(chains + 1, 0);
  for (std::size_t c = 0; c < chains; ++c) offsets[c + 1] = offsets[c] + count / chains + (c < count % chains ? 1 : 0);

#pragma omp parallel for schedule(static, 1) num_threads(std::max(opts.workers, 1))
  for (long long c = 0; c < static_cast<long long>(chains); ++c) {
    Rng rng = Rng::split(seed, static_cast<std::uint64_t>(c));
    std::array<double, kMaxDim> x{};
    std::array<double, kMaxDim> y{};
    std::uint64_t ctx = 0;
    auto step = [&] {
      const auto& map = ifs.map(sampler.draw(rng, ctx));
      map.linear.apply(x, y);
      for (int r = 0; r < d; ++r) x[static_cast<std::size_t>(r)] = y[static_cast<std::size_t>(r)] + map.translation[static_cast<std::size_t>(r)];
    };
    for (std::size_t s = 0; s < burn_in; ++s) step();
    const auto cc = static_cast<std::size_t>(c);
    for (std::size_t i = offsets[cc]; i < offsets[cc + 1]; ++i) {
      step();
      std::copy_n(x.begin(), d, cloud.coords.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d)));
    }
  }
  return cloud;
}

namespace {

struct Box {
  std::array<double, kMaxDim> lo{};
  double extent = 0;
};

Box bounding_box(const PointCloud& cloud) {
  Box box;
  const auto d = static_cast<std::size_t>(cloud.dim);
  std::array<double, kMaxDim> hi{};
  for (std::size_t c = 0; c < d; ++c) {
    box.lo[c] = std::numeric_limits<double>::infinity();
    hi[c] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t c = 0; c < d; ++c) {
      box.lo[c] = std::min(box.lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  for (std::size_t c = 0; c < d; ++c) box.extent = std::max(box.extent, hi[c] - box.lo[c]);
  return box;
}

std::uint64_t occupied_boxes(const PointCloud& cloud, const Box& box, double delta) {
  const auto d = static_cast<std::size_t>(cloud.dim);
  const double cells_per_side = std::floor(box.extent / delta) + 1.0;
  if (std::pow(cells_per_side, static_cast<double>(d)) > 1.8e19) {
    throw DomainError("box scale too fine to index");
  }
  const auto side = static_cast<std::uint64_t>(cells_per_side);
  std::vector<std::uint64_t> keys(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    std::uint64_t key = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const auto cell = static_cast<std::uint64_t>(std::floor((p[c] - box.lo[c]) / delta));
      key = key * side + std::min(cell, side - 1);
    }
    keys[i] = key;
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace

std::vector<double> dyadic_scales(const PointCloud& cloud, int first, int last) {
  const Box box = bounding_box(cloud);
  if (!(box.extent > 0)) throw DomainError("degenerate cloud");
  std::vector<double> scales;
  for (int j = first; j <= last; ++j) scales.push_back(std::ldexp(box.extent, -j));
  return scales;
}

BoxCount box_dimension(const PointCloud& cloud, std::span<const double> scales, int workers) {
  if (scales.size() < 3) throw DomainError("box counting needs at least three scales");
  for (std::size_t k = 1; k < scales.size(); ++k)
    if (!(scales[k] < scales[k - 1]) || !(scales[k] > 0)) throw DomainError("box scales must be positive and decreasing");
  if (cloud.size() < 2) throw DomainError("degenerate cloud");
  const Box box = bounding_box(cloud);
  if (!(box.extent > 0)) throw DomainError("degenerate cloud");

  BoxCount out;
  out.scales.assign(scales.begin(), scales.end());
  out.counts.assign(scales.size(), 0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
  for (long long k = 0; k < static_cast<long long>(scales.size()); ++k) {
    out.counts[static_cast<std::size_t>(k)] = occupied_boxes(cloud, box, scales[static_cast<std::size_t>(k)]);
  }

  const auto m = static_cast<double>(scales.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    sx += -std::log(scales[k]);
    sy += std::log(static_cast<double>(out.counts[k]));
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double dx = -std::log(scales[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(static_cast<double>(out.counts[k])) - my);
  }
  out.estimate = sxy / sxx;
  const double intercept = my - out.estimate * mx;
  double rss = 0;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double r = std::log(static_cast<double>(out.counts[k])) - (intercept - out.estimate * std::log(scales[k]));
    rss += r * r;
  }
  out.residual = std::sqrt(rss / m);
  return out;
}

RenderBounds cloud_bounds(const PointCloud& cloud) {
  RenderBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  if (cloud.size() == 0) return RenderBounds{};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    b.x_min = std::min(b.x_min, p[0]);
    b.x_max = std::max(b.x_max, p[0]);
    const double y = cloud.dim >= 2 ? p[1] : 0.0;
    b.y_min = std::min(b.y_min, y);
    b.y_max = std::max(b.y_max, y);
  }
  if (cloud.dim < 2) {
    b.y_min = -1.0;
    b.y_max = 1.0;
  }
  auto pad = [](double& lo, double& hi) {
    const double w = hi - lo;
    const double margin = w > 0 ? 0.01 * w : 0.5;
    lo -= margin;
    hi += margin;
  };
  pad(b.x_min, b.x_max);
  if (cloud.dim >= 2) pad(b.y_min, b.y_max);
  return b;
}

std::vector<std::uint8_t> render_pgm(const PointCloud& cloud, int resolution, const RenderBounds& bounds) {
  if (resolution < 16) throw DomainError("render resolution must be at least 16");
  if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) throw DomainError("empty render bounds");
  const auto res = static_cast<std::size_t>(resolution);
  std::vector<std::uint64_t> hits(res * res, 0);
  auto cell = [&](double v, double lo, double hi) -> long long {
    const double f = (v - lo) / (hi - lo);
    if (!(f >= 0.0) || f > 1.0) return -1;
    return std::min(static_cast<long long>(f * resolution), static_cast<long long>(resolution - 1));
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const long long px = cell(p[0], bounds.x_min, bounds.x_max);
    const long long py = cell(cloud.dim >= 2 ? p[1] : 0.0, bounds.y_min, bounds.y_max);
    if (px < 0 || py < 0) continue;
    const auto row = res - 1 - static_cast<std::size_t>(py);
    ++hits[row * res + static_cast<std::size_t>(px)];
  }
  const std::uint64_t peak = *std::max_element(hits.begin(), hits.end());

  const std::string header = "P5\n" + std::to_string(resolution) + " " + std::to_string(resolution) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + hits.size());
  const double denom = peak > 0 ? std::log1p(static_cast<double>(peak)) : 1.0;
  for (std::uint64_t h : hits) {
    if (h == 0) {
      out.push_back(0);
      continue;
    }
    const double v = 255.0 * std::log1p(static_cast<double>(h)) / denom;
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 1L, 255L)));
  }
  return out;
}

}  // namespace affdim
