#pragma once

// Enumeration kernels over I^n.
//
// The parallel kernels split I^n into #I^p prefix blocks (p = min(n, 4)),
// walk each block depth-first with incremental potential states, and reduce
// per-block results in lexicographic block order. Block results never depend
// on which thread produced them, so every output is bitwise identical for
// any worker count.
//
// The serial reference kernels evaluate every word from scratch and reduce
// with a plain two-pass log-sum-exp. They exist for testing and
// benchmarking; they agree with the parallel kernels to rounding.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "affdim/cylinder.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

class PartitionCache;

struct ComputeOptions {
  /// OpenMP threads; results do not depend on this value.
  int workers = 1;
  EnumerationBudget budget{};
  /// Optional memo for log partition sums, shared between calls.
  PartitionCache* cache = nullptr;
};

/// Streaming log-sum-exp accumulator: value() = log sum exp(x_k).
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }

  void merge(const LogSumExp& other) {
    if (other.sum_ == 0.0) return;
    if (other.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
  }

  double value() const {
    return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

namespace kernels {

/// Prefix depth at which I^n is split into independent blocks.
inline int block_depth(int n) { return n < 4 ? n : 4; }

/// log sum_{w in I^n} psi_w^t.
double log_partition_sum(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts);

/// Same enumeration evaluated for every t in `ts` at once.
std::vector<double> log_partition_sums(const CylinderFunction& cf, std::span<const double> ts, int n,
                                       const ComputeOptions& opts);

/// log psi_w^t for every w in I^n, indexed by packed word index.
std::vector<double> log_value_table(const CylinderFunction& cf, double t, int n,
                                    const ComputeOptions& opts);

namespace serial {

double log_partition_sum(const CylinderFunction& cf, double t, int n, EnumerationBudget budget = {});

std::vector<double> log_value_table(const CylinderFunction& cf, double t, int n,
                                    EnumerationBudget budget = {});

}  // namespace serial

}  // namespace kernels
}  // namespace affdim
