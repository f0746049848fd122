#include "affdim/pressure.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <mutex>

namespace affdim {

PartitionKey partition_key(const CylinderFunction& cf, double t, int n) {
  return {cf.content_hash(), std::bit_cast<std::uint64_t>(t), n};
}

std::optional<double> PartitionCache::get(const PartitionKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void PartitionCache::put(const PartitionKey& key, double log_sum) {
  std::unique_lock lock(mutex_);
  entries_[key] = log_sum;
}

std::vector<std::pair<PartitionKey, double>> PartitionCache::entries() const {
  std::shared_lock lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::size_t PartitionCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::uint64_t PartitionCache::hits() const { return hits_; }
std::uint64_t PartitionCache::misses() const { return misses_; }

double log_partition_sum(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts) {
  if (n < 1) throw DomainError("partition sums need n >= 1");
  if (opts.cache != nullptr) {
    const auto key = partition_key(cf, t, n);
    if (auto hit = opts.cache->get(key)) return *hit;
    const double value = kernels::log_partition_sum(cf, t, n, opts);
    opts.cache->put(key, value);
    return value;
  }
  return kernels::log_partition_sum(cf, t, n, opts);
}

double extrapolate_inverse_n(std::span<const int> levels, std::span<const double> values) {
  if (levels.empty() || levels.size() != values.size()) {
    throw DomainError("extrapolation needs matching, non-empty level and value lists");
  }
  const std::size_t first = levels.size() / 2;
  const std::size_t m = levels.size() - first;
  if (m < 2) return values.back();
  double sx = 0, sy = 0;
  for (std::size_t k = first; k < levels.size(); ++k) {
    sx += 1.0 / levels[k];
    sy += values[k];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t k = first; k < levels.size(); ++k) {
    const double dx = 1.0 / levels[k] - mx;
    sxx += dx * dx;
    sxy += dx * (values[k] - my);
  }
  return my - (sxy / sxx) * mx;
}

PressureReport pressure_sequence(const CylinderFunction& cf, double t, int n_max,
                                 const ComputeOptions& opts) {
  if (n_max < 1) throw DomainError("pressure_sequence needs n_max >= 1");
  PressureReport report;
  report.t = t;
  std::vector<int> levels;
  std::vector<double> values;
  for (int n = 1; n <= n_max; ++n) {
    try {
      const double p = log_partition_sum(cf, t, n, opts) / n;
      report.per_level.emplace_back(n, p);
      levels.push_back(n);
      values.push_back(p);
    } catch (const BudgetExceeded& e) {
      report.partial = true;
      report.note = e.what();
      break;
    }
  }
  if (values.empty()) throw BudgetExceeded(*cf.alphabet().count(1), opts.budget.max_words);
  report.fekete_upper = *std::min_element(values.begin(), values.end());
  report.extrapolated = extrapolate_inverse_n(levels, values);
  return report;
}

RootResult pressure_root(const CylinderFunction& cf, int n, double t_tol, const ComputeOptions& opts) {
  if (!(t_tol > 0)) throw DomainError("root tolerance must be positive");
  RootResult r;
  auto pressure = [&](double t) {
    ++r.evaluations;
    return log_partition_sum(cf, t, n, opts) / n;
  };

  double lo = 0.0;
  double hi = 1.0;
  double p_hi = pressure(hi);
  while (p_hi > 0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw DomainError("pressure does not change sign below t = 1e6");
    p_hi = pressure(hi);
  }
  if (p_hi == 0.0) {
    r.t = r.lo = r.hi = hi;
    return r;
  }
  while (hi - lo > t_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = pressure(mid);
    if (p == 0.0) {
      r.t = r.lo = r.hi = mid;
      return r;
    }
    (p > 0 ? lo : hi) = mid;
  }
  r.lo = lo;
  r.hi = hi;
  r.t = 0.5 * (lo + hi);
  return r;
}

std::vector<std::pair<double, double>> pressure_curve(const CylinderFunction& cf,
                                                      std::span<const double> t_grid, int n,
                                                      const ComputeOptions& opts) {
  if (n < 1) throw DomainError("pressure_curve needs n >= 1");
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw DomainError("t grid must be strictly ascending");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(t_grid.size());

  std::vector<double> missing;
  std::vector<std::size_t> missing_at;
  std::vector<double> values(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    std::optional<double> hit;
    if (opts.cache != nullptr) hit = opts.cache->get(partition_key(cf, t_grid[k], n));
    if (hit) {
      values[k] = *hit;
    } else {
      missing.push_back(t_grid[k]);
      missing_at.push_back(k);
    }
  }
  if (!missing.empty()) {
    const auto sums = kernels::log_partition_sums(cf, missing, n, opts);
    for (std::size_t k = 0; k < sums.size(); ++k) {
      values[missing_at[k]] = sums[k];
      if (opts.cache != nullptr) opts.cache->put(partition_key(cf, missing[k], n), sums[k]);
    }
  }
  for (std::size_t k = 0; k < t_grid.size(); ++k) out.emplace_back(t_grid[k], values[k] / n);
  return out;
}

DimensionReport affinity_dimension(const AffineIFS& ifs, int n_max, double t_tol,
                                   const ComputeOptions& opts) {
  if (n_max < 1) throw DomainError("affinity_dimension needs n_max >= 1");
  const auto start = std::chrono::steady_clock::now();
  const auto cf = CylinderFunction::natural(ifs);

  DimensionReport report;
  report.ambient_dim = ifs.dim();
  report.t_tol = t_tol;
  report.levels_requested = n_max;
  report.max_norm = cf.constants(0.0).s_hi;
  report.norm_half_hypothesis = report.max_norm < 0.5;

  std::vector<int> levels;
  std::vector<double> roots;
  for (int n = 1; n <= n_max; ++n) {
    try {
      opts.budget.check(cf.alphabet(), n);
    } catch (const BudgetExceeded& e) {
      report.partial = true;
      report.note = e.what();
      break;
    }
    const double t = pressure_root(cf, n, t_tol, opts).t;
    report.roots.emplace_back(n, t);
    levels.push_back(n);
    roots.push_back(t);
  }
  if (roots.empty()) throw BudgetExceeded(*cf.alphabet().count(1), opts.budget.max_words);
  report.upper_bound = *std::min_element(roots.begin(), roots.end());
  report.extrapolated = extrapolate_inverse_n(levels, roots);
  report.prediction = std::min(static_cast<double>(ifs.dim()), report.upper_bound);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace affdim
