#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affdim/equilibrium.hpp"
#include "affdim/ifs.hpp"

namespace affdim {

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::vector<double> contraction_ratios;  ///< s_i = alpha_1(A_i)
  double bounding_radius = 0;              ///< max|a_i| / (1 - max s_i)

  bool ok() const noexcept { return errors.empty(); }
};

/// Errors: fewer than two maps, singular or non-contracting matrices.
/// Warning: some alpha_1(A_i) >= 1/2 (the full-dimension result assumes < 1/2).
ValidationReport validate_ifs(const AffineIFS& ifs);

/// Throws DomainError carrying every validation error.
void require_valid(const AffineIFS& ifs);

/// R with phi_i(B(0, R)) inside B(0, R) for every map.
double bounding_radius(const AffineIFS& ifs);

/// `count` tuples of maps * d coordinates, uniform in [-radius, radius].
std::vector<std::vector<double>> sample_translations(int d, std::size_t maps, std::size_t count,
                                                     double radius, std::uint64_t seed);

struct PointCloud {
  int dim = 0;
  std::vector<double> coords;  ///< point-major, dim values per point
  std::uint64_t seed = 0;
  std::string driver;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

struct UniformDriver {};

/// Symbol probabilities for an i.i.d. chaos game.
struct WeightDriver {
  std::vector<double> weights;
};

/// Symbols drawn from a cylinder measure of depth k. The point after m steps
/// is phi_{i_m} o ... o phi_{i_1}(x_0), whose address reads i_m, i_{m-1}, ...;
/// each new symbol a is drawn with probability m([a w]) / m(sigma^{-1}[w])
/// where w holds the k-1 most recent symbols, newest first.
struct MeasureDriver {
  CylinderMeasure measure;
};

using ChaosDriver = std::variant<UniformDriver, WeightDriver, MeasureDriver>;

struct ChaosOptions {
  /// Independent chains; fixed so that output never depends on `workers`.
  int chains = 8;
  int workers = 1;
};

/// Chaos game. Chain c starts at the origin with RNG stream
/// Rng::split(seed, c), discards `burn_in` iterates, then contributes its
/// share of `count` points; chains are concatenated in order.
PointCloud attractor_points(const AffineIFS& ifs, const ChaosDriver& driver, std::size_t count,
                            std::size_t burn_in, std::uint64_t seed, ChaosOptions opts = {});

struct BoxCount {
  double estimate = 0;
  std::vector<double> scales;
  std::vector<std::uint64_t> counts;
  double residual = 0;  ///< RMS residual of the log-log fit
};

/// Least-squares slope of log N(delta) against log(1/delta). Grids are
/// anchored at the lower corner of the cloud's bounding box.
BoxCount box_dimension(const PointCloud& cloud, std::span<const double> scales, int workers = 1);

/// Scales extent * 2^{-j} for j = first..last, extent being the largest side
/// of the cloud's bounding box.
std::vector<double> dyadic_scales(const PointCloud& cloud, int first, int last);

struct RenderBounds {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
};

/// Bounding box of the first two coordinates (y range [-1, 1] for d = 1),
/// padded so the extreme points fall inside the raster.
RenderBounds cloud_bounds(const PointCloud& cloud);

/// Binary PGM (P5): header "P5\n<w> <h>\n255\n" then row-major bytes, top row
/// first. Pixel value round(255 log(1 + hits) / log(1 + max hits)).
std::vector<std::uint8_t> render_pgm(const PointCloud& cloud, int resolution, const RenderBounds& bounds);

}  // namespace affdim
