#include "affdim/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdim/pressure.hpp"
#include "affdim/rng.hpp"
#include "word_walk.hpp"

namespace affdim {

using detail::ipow;

CylinderMeasure::CylinderMeasure(Alphabet alphabet, int depth, std::vector<double> masses,
                                 std::string provenance)
    : alphabet_(alphabet), depth_(depth), masses_(std::move(masses)), provenance_(std::move(provenance)) {
  if (depth_ < 0) throw DomainError("measure depth must be non-negative");
  const auto expected = alphabet_.count(depth_);
  if (!expected || *expected != masses_.size()) {
    throw DomainError("measure table size does not match #I^depth");
  }
  for (double m : masses_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("measure masses must be finite and non-negative");
}

CylinderMeasure CylinderMeasure::bernoulli(std::span<const double> p, int depth) {
  const Alphabet alphabet = Alphabet::degenerate_allowed(p.size());
  const std::uint64_t total = EnumerationBudget{}.check(alphabet, depth);
  std::vector<double> masses(total, 1.0);
  const std::size_t q = p.size();
  for (std::uint64_t index = 0; index < total; ++index) {
    std::uint64_t rest = index;
    double m = 1.0;
    for (int k = 0; k < depth; ++k) {
      m *= p[rest % q];
      rest /= q;
    }
    masses[index] = m;
  }
  return CylinderMeasure(alphabet, depth, std::move(masses), "bernoulli");
}

CylinderMeasure CylinderMeasure::uniform(const Alphabet& alphabet, int depth) {
  const std::uint64_t total = EnumerationBudget{}.check(alphabet, depth);
  return CylinderMeasure(alphabet, depth, std::vector<double>(total, 1.0 / static_cast<double>(total)),
                         "uniform");
}

CylinderMeasure CylinderMeasure::point_mass(const Alphabet& alphabet, const Word& w) {
  w.validate(alphabet);
  const int depth = static_cast<int>(w.length());
  std::vector<double> masses(EnumerationBudget{}.check(alphabet, depth), 0.0);
  masses[w.pack(alphabet)] = 1.0;
  return CylinderMeasure(alphabet, depth, std::move(masses), "custom");
}

double CylinderMeasure::mass(const Word& w) const {
  if (static_cast<int>(w.length()) != depth_) throw DomainError("word length differs from measure depth");
  w.validate(alphabet_);
  return masses_[w.pack(alphabet_)];
}

double CylinderMeasure::total() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

CylinderMeasure CylinderMeasure::marginal(int k) const {
  if (k < 0 || k > depth_) throw DomainError("marginal depth must lie in [0, depth]");
  const std::uint64_t block = ipow(alphabet_.size(), depth_ - k);
  std::vector<double> out(masses_.size() / block, 0.0);
  for (std::size_t i = 0; i < masses_.size(); ++i) out[i / block] += masses_[i];
  return CylinderMeasure(alphabet_, k, std::move(out), provenance_);
}

std::vector<double> CylinderMeasure::preimage_masses() const {
  if (depth_ < 1) throw DomainError("preimage masses need depth >= 1");
  const std::uint64_t inner = ipow(alphabet_.size(), depth_ - 1);
  std::vector<double> out(inner, 0.0);
  for (std::size_t a = 0; a < alphabet_.size(); ++a)
    for (std::uint64_t i = 0; i < inner; ++i) out[i] += masses_[a * inner + i];
  return out;
}

namespace {

std::string tag(const char* name, double t, int n) {
  return std::string(name) + "(n=" + std::to_string(n) + ",t=" + std::to_string(t) + ")";
}

double log_sum_in_order(std::span<const double> values) {
  LogSumExp acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

std::vector<double> normalized_from_logs(std::span<const double> log_values) {
  const double log_total = log_sum_in_order(log_values);
  std::vector<double> masses(log_values.size());
  for (std::size_t i = 0; i < masses.size(); ++i) masses[i] = std::exp(log_values[i] - log_total);
  return masses;
}

// Accumulates the depth-k windows of every weighted level-n word.
std::vector<double> cesaro_table(std::span<const double> nu, std::size_t q, int n, int k, TailMode mode,
                                 int workers) {
  const std::uint64_t cells = ipow(q, k);
  const int p = kernels::block_depth(n);
  const auto blocks = static_cast<long long>(ipow(q, p));
  const std::uint64_t per_block = ipow(q, n - p);
  std::vector<std::uint64_t> pow_q(static_cast<std::size_t>(n) + 1);
  for (int e = 0; e <= n; ++e) pow_q[static_cast<std::size_t>(e)] = ipow(q, e);
  const int windows = mode == TailMode::pad ? n : n - k + 1;
  const double scale = 1.0 / windows;

  std::vector<double> partial(static_cast<std::size_t>(blocks) * cells, 0.0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
  for (long long b = 0; b < blocks; ++b) {
    double* local = partial.data() + static_cast<std::size_t>(b) * cells;
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * per_block;
    for (std::uint64_t w = begin; w < begin + per_block; ++w) {
      const double weight = nu[w] * scale;
      if (weight == 0.0) continue;
      for (int j = 0; j < windows; ++j) {
        std::uint64_t window;
        if (j + k <= n) {
          window = (w / pow_q[static_cast<std::size_t>(n - j - k)]) % cells;
        } else {
          // suffix of length n - j followed by tail symbols (kTailSymbol == 0)
          window = (w % pow_q[static_cast<std::size_t>(n - j)]) * pow_q[static_cast<std::size_t>(j + k - n)];
        }
        local[window] += weight;
      }
    }
  }

  std::vector<double> table(cells, 0.0);
  for (long long b = 0; b < blocks; ++b)
    for (std::uint64_t c = 0; c < cells; ++c) table[c] += partial[static_cast<std::size_t>(b) * cells + c];
  return table;
}

}  // namespace

CylinderMeasure nu_weights(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts) {
  if (n < 1) throw DomainError("nu_weights needs n >= 1");
  const auto logs = kernels::log_value_table(cf, t, n, opts);
  return CylinderMeasure(cf.alphabet(), n, normalized_from_logs(logs), tag("nu", t, n));
}

CylinderMeasure mu_cesaro(const CylinderFunction& cf, double t, int n, int k, const ComputeOptions& opts,
                          TailMode mode) {
  if (k < 1 || k > n) throw DomainError("mu_cesaro needs 1 <= k <= n");
  const auto nu = nu_weights(cf, t, n, opts);
  const std::size_t q = cf.alphabet().size();
  auto table = cesaro_table(nu.masses(), q, n, k, mode, opts.workers);
  return CylinderMeasure(cf.alphabet(), k, std::move(table),
                         tag(mode == TailMode::pad ? "mu_cesaro" : "mu_cesaro_drop", t, n));
}

double entropy_term(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

double entropy_depth(const CylinderMeasure& m) {
  if (m.depth() < 1) throw DomainError("entropy needs depth >= 1");
  double h = 0;
  for (double x : m.masses()) h += entropy_term(x);
  return h / m.depth();
}

double energy_depth(const CylinderFunction& cf, double t, const CylinderMeasure& m,
                    const ComputeOptions& opts) {
  if (m.depth() < 1) throw DomainError("energy needs depth >= 1");
  if (m.alphabet().size() != cf.alphabet().size()) throw DomainError("measure and potential alphabets differ");
  const auto logs = kernels::log_value_table(cf, t, m.depth(), opts);
  double e = 0;
  const auto masses = m.masses();
  for (std::size_t i = 0; i < logs.size(); ++i)
    if (masses[i] > 0.0) e += masses[i] * logs[i];
  return e / m.depth();
}

double jensen_residual(const CylinderFunction& cf, double t, int n, const CylinderMeasure& m,
                       const ComputeOptions& opts) {
  if (m.depth() != n) throw DomainError("jensen_residual needs a measure at depth n");
  const auto logs = kernels::log_value_table(cf, t, n, opts);
  const double pressure = log_sum_in_order(logs) / n;
  return pressure - entropy_depth(m) - energy_depth(cf, t, m, opts);
}

double invariance_defect(const CylinderFunction& cf, double t, int n, int k, const ComputeOptions& opts,
                         TailMode mode) {
  if (k < 1 || k > n - 1) throw DomainError("invariance_defect needs 1 <= k <= n - 1");
  const auto nu = nu_weights(cf, t, n, opts);
  const std::size_t q = cf.alphabet().size();
  const auto level_k = cesaro_table(nu.masses(), q, n, k, mode, opts.workers);
  const auto level_k1 = cesaro_table(nu.masses(), q, n, k + 1, mode, opts.workers);
  const CylinderMeasure deeper(cf.alphabet(), k + 1, level_k1, "mu_cesaro");
  const auto pre = deeper.preimage_masses();
  double worst = 0;
  for (std::size_t i = 0; i < level_k.size(); ++i) worst = std::max(worst, std::abs(level_k[i] - pre[i]));
  return worst;
}

LocalDimensionSamples local_dimension_samples(const CylinderFunction& cf, double t_star, int n,
                                              std::size_t count, std::uint64_t seed,
                                              const ComputeOptions& opts) {
  if (n < 1) throw DomainError("local_dimension_samples needs n >= 1");
  const std::size_t q = cf.alphabet().size();
  // levels[j][i] = log of the nu-weight sum over all extensions of prefix i, |i| = j
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(n) + 1);
  levels[static_cast<std::size_t>(n)] = kernels::log_value_table(cf, t_star, n, opts);
  for (int j = n - 1; j >= 0; --j) {
    const auto& child = levels[static_cast<std::size_t>(j) + 1];
    auto& parent = levels[static_cast<std::size_t>(j)];
    parent.resize(child.size() / q);
    for (std::size_t i = 0; i < parent.size(); ++i)
      parent[i] = log_sum_in_order(std::span<const double>(child.data() + i * q, q));
  }
  const double log_total = levels[0][0];
  const auto& leaf = levels[static_cast<std::size_t>(n)];

  LocalDimensionSamples out;
  out.ratios.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Rng rng = Rng::split(seed, s);
    std::uint64_t index = 0;
    for (int j = 0; j < n; ++j) {
      const auto& child = levels[static_cast<std::size_t>(j) + 1];
      const double here = levels[static_cast<std::size_t>(j)][index];
      const double u = rng.uniform();
      double cumulative = 0;
      std::size_t pick = q - 1;
      for (std::size_t a = 0; a < q; ++a) {
        cumulative += std::exp(child[index * q + a] - here);
        if (u < cumulative) {
          pick = a;
          break;
        }
      }
      index = index * q + pick;
    }
    const double log_mass = leaf[index] - log_total;
    out.ratios.push_back(log_mass / leaf[index]);
  }
  if (!out.ratios.empty()) {
    out.mean = std::accumulate(out.ratios.begin(), out.ratios.end(), 0.0) / static_cast<double>(count);
    double var = 0;
    for (double r : out.ratios) var += (r - out.mean) * (r - out.mean);
    out.stddev = count > 1 ? std::sqrt(var / static_cast<double>(count - 1)) : 0.0;
  }
  return out;
}

namespace {

struct BernoulliObjective {
  std::size_t q;
  int k;
  std::vector<double> logs;                // log psi_i^t at depth k
  std::vector<std::uint8_t> counts;        // counts[i * q + a] = occurrences of a in word i

  BernoulliObjective(const CylinderFunction& cf, double t, int depth, const ComputeOptions& opts)
      : q(cf.alphabet().size()), k(depth), logs(kernels::log_value_table(cf, t, depth, opts)) {
    counts.assign(logs.size() * q, 0);
    for (std::size_t i = 0; i < logs.size(); ++i) {
      std::size_t rest = i;
      for (int j = 0; j < k; ++j) {
        ++counts[i * q + rest % q];
        rest /= q;
      }
    }
  }

  double word_mass(const std::vector<double>& p, std::size_t i) const {
    double m = 1.0;
    for (std::size_t a = 0; a < q; ++a) m *= std::pow(p[a], counts[i * q + a]);
    return m;
  }

  double score(const std::vector<double>& p) const {
    double h = 0;
    for (double x : p) h += entropy_term(x);
    double e = 0;
    for (std::size_t i = 0; i < logs.size(); ++i) e += word_mass(p, i) * logs[i];
    return h + e / k;
  }

  // d E_k / d p_a
  std::vector<double> gradient(const std::vector<double>& p) const {
    std::vector<double> g(q, 0.0);
    for (std::size_t i = 0; i < logs.size(); ++i) {
      for (std::size_t a = 0; a < q; ++a) {
        const auto c = counts[i * q + a];
        if (c == 0 || p[a] == 0.0) continue;
        // P(i) c / p_a, written without dividing by a tiny p_a
        double m = c * std::pow(p[a], c - 1);
        for (std::size_t b = 0; b < q; ++b)
          if (b != a) m *= std::pow(p[b], counts[i * q + b]);
        g[a] += m * logs[i];
      }
    }
    for (double& x : g) x /= k;
    return g;
  }
};

std::vector<double> softmax(const std::vector<double>& x) {
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double sum = 0;
  for (std::size_t a = 0; a < x.size(); ++a) sum += out[a] = std::exp(x[a] - top);
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

BernoulliEstimate bernoulli_lower_estimate(const CylinderFunction& cf, double t, int k, int iterations,
                                           const ComputeOptions& opts) {
  if (k < 1) throw DomainError("bernoulli_lower_estimate needs k >= 1");
  const BernoulliObjective objective(cf, t, k, opts);
  const std::size_t q = objective.q;

  BernoulliEstimate est;
  est.p.assign(q, 1.0 / static_cast<double>(q));
  est.score = objective.score(est.p);
  for (int it = 0; it < iterations; ++it) {
    const auto target = softmax(objective.gradient(est.p));
    double step = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      std::vector<double> trial(q);
      for (std::size_t a = 0; a < q; ++a) trial[a] = step * target[a] + (1.0 - step) * est.p[a];
      const double s = objective.score(trial);
      if (s >= est.score) {
        moved = trial != est.p;
        est.p = std::move(trial);
        est.score = s;
        break;
      }
    }
    est.iterations = it + 1;
    if (!moved) break;
  }
  return est;
}

EquilibriumDiagnostics equilibrium_diagnostics(const CylinderFunction& cf, double t, int n, int k,
                                               const ComputeOptions& opts) {
  if (k < 1 || k >= n) throw DomainError("equilibrium_diagnostics needs 1 <= k < n");
  EquilibriumDiagnostics d;
  const auto mu = mu_cesaro(cf, t, n, k, opts);
  d.entropy_k = entropy_depth(mu);
  d.energy_k = energy_depth(cf, t, mu, opts);
  d.pressure_upper = pressure_sequence(cf, t, n, opts).fekete_upper;
  d.gap = d.pressure_upper - d.entropy_k - d.energy_k;
  d.invariance_defect_max = invariance_defect(cf, t, n, k, opts);
  return d;
}

}  // namespace affdim
