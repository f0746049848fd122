#pragma once

// Finite-level topological pressure P_n(t) = (1/n) log S_n(t), where
// S_n(t) = sum over I^n of psi_w^t, and everything built on it: the Fekete
// envelope, the zero of P_n, and the affinity dimension of an affine IFS.
//
// For the constant cylinder functions implemented here K_t = 1, so
// log S_n is subadditive and P(t) = inf_n P_n(t). Every P_n(t) is therefore
// an upper bound for P(t), and every root t_n an upper bound for the zero
// of P. No finite-level lower bound is available; the 1/n extrapolation is
// an estimate and is always labelled as such.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "affdim/cylinder.hpp"
#include "affdim/ifs.hpp"
#include "affdim/kernels.hpp"

namespace affdim {

struct PartitionKey {
  std::uint64_t cf_hash = 0;
  std::uint64_t t_bits = 0;
  int n = 0;

  friend auto operator<=>(const PartitionKey&, const PartitionKey&) = default;
};

PartitionKey partition_key(const CylinderFunction& cf, double t, int n);

/// Thread-safe memo of log partition sums. Readers share, writers exclude.
class PartitionCache {
 public:
  std::optional<double> get(const PartitionKey& key) const;
  void put(const PartitionKey& key, double log_sum);
  std::vector<std::pair<PartitionKey, double>> entries() const;
  std::size_t size() const;

  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<PartitionKey, double> entries_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

/// log S_n(t), through opts.cache when one is supplied.
double log_partition_sum(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts = {});

/// Straight-line least-squares fit y = a + b/n over the upper half of the
/// given levels; returns the intercept a (the n -> infinity value).
double extrapolate_inverse_n(std::span<const int> levels, std::span<const double> values);

inline constexpr const char* kExtrapolationMethod = "lsq-1/n-top-half";

struct PressureReport {
  double t = 0;
  std::vector<std::pair<int, double>> per_level;  ///< (n, P_n(t))
  double fekete_upper = 0;                        ///< min_n P_n(t), rigorous upper bound
  double extrapolated = 0;                        ///< estimate, not a bound
  std::string extrapolation_method = kExtrapolationMethod;
  bool partial = false;  ///< budget stopped the sequence early
  std::string note;
};

PressureReport pressure_sequence(const CylinderFunction& cf, double t, int n_max,
                                 const ComputeOptions& opts = {});

struct RootResult {
  double t = 0;   ///< midpoint of the final bracket (or an exact zero)
  double lo = 0;  ///< P_n(lo) > 0
  double hi = 0;  ///< P_n(hi) < 0
  int evaluations = 0;
};

/// Zero of t -> P_n(t) by bisection. The bracket starts at [0, 1] and the
/// upper end doubles until P_n < 0; bisection stops once hi - lo <= t_tol.
RootResult pressure_root(const CylinderFunction& cf, int n, double t_tol, const ComputeOptions& opts = {});

/// (t, P_n(t)) on an ascending grid. Throws DomainError for unsorted grids.
std::vector<std::pair<double, double>> pressure_curve(const CylinderFunction& cf,
                                                      std::span<const double> t_grid, int n,
                                                      const ComputeOptions& opts = {});

struct DimensionReport {
  std::vector<std::pair<int, double>> roots;  ///< (n, t_n)
  double upper_bound = 0;                     ///< min_n t_n
  double extrapolated = 0;                    ///< estimate of lim t_n
  std::string extrapolation_method = kExtrapolationMethod;
  int ambient_dim = 0;
  double prediction = 0;  ///< min(d, upper_bound)
  bool norm_half_hypothesis = false;  ///< every alpha_1(A_i) < 1/2
  double max_norm = 0;
  double t_tol = 0;
  int levels_requested = 0;
  bool partial = false;
  std::string note;
  double wall_seconds = 0;
};

DimensionReport affinity_dimension(const AffineIFS& ifs, int n_max, double t_tol,
                                   const ComputeOptions& opts = {});

}  // namespace affdim
