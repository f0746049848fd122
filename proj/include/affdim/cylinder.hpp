#pragma once

// Cylinder functions psi_w^t: positive word-indexed potentials with certified
// constants (K_t, s_lo, s_hi).
//
// Two constant (tail-independent) kinds are provided:
//   natural  psi_w^t = alpha^t(A_w) for an affine IFS;
//   product  psi_w^t = prod_k s_{w_k}^t for similarity weights s_i in (0,1).
//
// Each kind is a "potential" with a cheap incremental state: extending a
// word by one symbol updates the state in O(1), so enumerations can walk the
// word tree depth-first and pay one update per tree node.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

/// Natural cylinder function alpha^t(A_w).
class NaturalPotential {
 public:
  /// Scaled product: A_w = 2^{exp2} * m, with |det A_w| = exp(log_det).
  /// The power-of-two rescaling is exact, so two different walks to the
  /// same word produce bit-identical states.
  struct State {
    Matrix m;
    int exp2 = 0;
    double log_det = 0.0;
  };

  explicit NaturalPotential(const AffineIFS& ifs);

  Alphabet alphabet() const { return Alphabet::degenerate_allowed(linear_.size()); }
  int dim() const noexcept { return dim_; }
  const std::vector<Matrix>& matrices() const noexcept { return linear_; }

  State root() const;
  State extend(const State& s, Symbol a) const;
  /// log alpha_1 >= ... >= log alpha_d of the product held by the state.
  std::array<double, kMaxDim> log_singular_values(const State& s) const;
  double log_value(const State& s, double t) const;

 private:
  int dim_;
  std::vector<Matrix> linear_;
  std::vector<double> log_dets_;
};

/// Similarity weights: psi_w^t = prod s_{w_k}^t (chain rule holds with equality).
class ProductPotential {
 public:
  struct State {
    double log_product = 0.0;
  };

  explicit ProductPotential(std::vector<double> weights);

  Alphabet alphabet() const { return Alphabet::degenerate_allowed(weights_.size()); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  State root() const { return {}; }
  State extend(const State& s, Symbol a) const {
    return {s.log_product + log_weights_[a]};
  }
  double log_value(const State& s, double t) const { return t * s.log_product; }

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
};

struct CylinderConstants {
  double k_t = 1.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
};

enum class CylinderKind { natural, product };

class CylinderFunction {
 public:
  using Potential = std::variant<NaturalPotential, ProductPotential>;

  static CylinderFunction natural(const AffineIFS& ifs);
  static CylinderFunction product(std::vector<double> weights);

  CylinderKind kind() const noexcept;
  Alphabet alphabet() const;
  const Potential& potential() const noexcept { return potential_; }

  /// log psi_w^t(h). The tail h is accepted for interface completeness and
  /// ignored: both kinds are constant cylinder functions.
  double log_value(double t, const Word& w, const Word& tail = {}) const;
  double value(double t, const Word& w, const Word& tail = {}) const;

  /// (K_t, s_lo, s_hi). K_t = 1 for both constant kinds.
  CylinderConstants constants(double t) const;

  /// Identifies the potential for partition-sum caching.
  std::uint64_t content_hash() const noexcept { return hash_; }

 private:
  CylinderFunction(Potential p, std::uint64_t hash) : potential_(std::move(p)), hash_(hash) {}

  Potential potential_;
  std::uint64_t hash_;
};

double cf_value(const CylinderFunction& cf, double t, const Word& w);
CylinderConstants cf_constants(const CylinderFunction& cf, double t);

/// Worst observed slack per axiom. Positive subchain/parameter entries are
/// violations (relative excess over the bound). The subchain bound already
/// includes the rounding allowance (1 + 1e-12), so exact chain-rule cases
/// report about -1e-12.
struct AxiomReport {
  double bvp_max_ratio = 1.0;
  double worst_subchain_violation = -1.0;
  double worst_param_violation = -1.0;
  std::uint64_t samples = 0;

  /// True when every slack is within `tolerance`.
  bool holds(double tolerance) const;
};

struct AxiomCheckOptions {
  int workers = 1;
  /// Step used for the parameter bounds when the grid has a single point.
  double fallback_delta = 0.25;
};

/// Randomized check of the bounded variation principle, the subchain rule
/// and the two-sided parameter bound. Sample k uses the RNG stream
/// Rng::split(seed, k), so the report does not depend on the worker count.
AxiomReport verify_axioms(const CylinderFunction& cf, std::span<const double> t_grid, int n_max,
                          std::uint64_t samples, std::uint64_t seed, AxiomCheckOptions opts = {});

}  // namespace affdim
