#pragma once

// Finite-n objects from the existence proof of equilibrium measures:
//   nu_n   mass psi_w^t / S_n(t) on each level-n cylinder [w];
//   mu_n   the shift average (1/n) sum_{j<n} nu_n o sigma^{-j};
// together with finite-depth entropy and energy and the inequalities they
// satisfy at every finite n.
//
// Masses of nu_n live on the cylinders [w, h] with the tail h = 000...
// (kTailSymbol repeated), so mu_n at depth k reads the length-k window of
// w000... starting at position j. Windows that run past the end of w are
// completed with the tail symbol. TailMode::drop instead keeps only the
// n - k + 1 windows inside w and renormalizes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affdim/cylinder.hpp"
#include "affdim/kernels.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

/// Mass assignment to every cylinder of one level, addressed by packed index.
class CylinderMeasure {
 public:
  CylinderMeasure(Alphabet alphabet, int depth, std::vector<double> masses, std::string provenance);

  /// Product measure p^{(x)k}.
  static CylinderMeasure bernoulli(std::span<const double> p, int depth);
  static CylinderMeasure uniform(const Alphabet& alphabet, int depth);
  static CylinderMeasure point_mass(const Alphabet& alphabet, const Word& w);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  int depth() const noexcept { return depth_; }
  std::span<const double> masses() const noexcept { return masses_; }
  const std::string& provenance() const noexcept { return provenance_; }

  double mass(const Word& w) const;
  double total() const;

  /// Restriction to depth k <= depth(): m([i]) = sum of m([i a...]).
  CylinderMeasure marginal(int k) const;

  /// m(sigma^{-1}[i]) = sum_a m([a i]) for every i of length depth() - 1.
  std::vector<double> preimage_masses() const;

 private:
  Alphabet alphabet_;
  int depth_;
  std::vector<double> masses_;
  std::string provenance_;
};

enum class TailMode { pad, drop };

CylinderMeasure nu_weights(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts = {});

CylinderMeasure mu_cesaro(const CylinderFunction& cf, double t, int n, int k,
                          const ComputeOptions& opts = {}, TailMode mode = TailMode::pad);

/// H(x) = -x log x with H(0) = 0.
double entropy_term(double x);

/// -(1/k) sum m log m, in nats.
double entropy_depth(const CylinderMeasure& m);

/// (1/k) sum m([i]) log psi_i^t.
double energy_depth(const CylinderFunction& cf, double t, const CylinderMeasure& m,
                    const ComputeOptions& opts = {});

/// (1/n) log S_n(t) - entropy_depth(m) - energy_depth(m) for m at depth n.
/// Non-negative for every probability vector; zero exactly at nu_n.
double jensen_residual(const CylinderFunction& cf, double t, int n, const CylinderMeasure& m,
                       const ComputeOptions& opts = {});

/// max over |i| = k of |mu_n([i]) - mu_n(sigma^{-1}[i])|, bounded by 1/n.
double invariance_defect(const CylinderFunction& cf, double t, int n, int k,
                         const ComputeOptions& opts = {}, TailMode mode = TailMode::pad);

struct LocalDimensionSamples {
  std::vector<double> ratios;  ///< log nu_n([w]) / log psi_w^t per sampled w
  double mean = 0;
  double stddev = 0;
};

/// Draws words from nu_n by sequential conditional sampling (exact) and
/// returns the local-dimension ratios. Sample s uses Rng::split(seed, s).
LocalDimensionSamples local_dimension_samples(const CylinderFunction& cf, double t_star, int n,
                                              std::size_t count, std::uint64_t seed,
                                              const ComputeOptions& opts = {});

struct BernoulliEstimate {
  std::vector<double> p;
  double score = 0;  ///< h(p) + E_k(p); an estimate, not a bound on P(t)
  int iterations = 0;
};

/// Maximizes h(p) + E_k(p) over Bernoulli measures. Each step moves p to
/// softmax(grad_p E_k) and backtracks towards the current p until the score
/// does not decrease. Starts from the uniform vector; deterministic.
BernoulliEstimate bernoulli_lower_estimate(const CylinderFunction& cf, double t, int k, int iterations,
                                           const ComputeOptions& opts = {});

struct EquilibriumDiagnostics {
  double entropy_k = 0;
  double energy_k = 0;
  double pressure_upper = 0;
  double gap = 0;  ///< pressure_upper - entropy_k - energy_k
  double invariance_defect_max = 0;
};

/// Diagnostics of mu_n at depth k (k < n).
EquilibriumDiagnostics equilibrium_diagnostics(const CylinderFunction& cf, double t, int n, int k,
                                               const ComputeOptions& opts = {});

}  // namespace affdim
