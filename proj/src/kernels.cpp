#include "affdim/kernels.hpp"

#include <algorithm>

#include "word_walk.hpp"

namespace affdim::kernels {

namespace {

int thread_count(const ComputeOptions& opts) { return std::max(opts.workers, 1); }

void check_t(double t) {
  if (!(t >= 0)) throw DomainError("cylinder functions are defined for t >= 0");
}

void check_level(int n) {
  if (n < 1) throw DomainError("partition sums need n >= 1");
}

}  // namespace

double log_partition_sum(const CylinderFunction& cf, double t, int n, const ComputeOptions& opts) {
  return log_partition_sums(cf, std::span<const double>(&t, 1), n, opts)[0];
}

std::vector<double> log_partition_sums(const CylinderFunction& cf, std::span<const double> ts, int n,
                                       const ComputeOptions& opts) {
  for (double t : ts) check_t(t);
  check_level(n);
  const Alphabet alphabet = cf.alphabet();
  opts.budget.check(alphabet, n);
  const std::size_t q = alphabet.size();
  const int p = block_depth(n);
  const auto blocks = static_cast<long long>(detail::ipow(q, p));
  const std::size_t nt = ts.size();
  std::vector<LogSumExp> partial(static_cast<std::size_t>(blocks) * nt);

  std::visit(
      [&](const auto& pot) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(opts))
        for (long long b = 0; b < blocks; ++b) {
          LogSumExp* acc = partial.data() + static_cast<std::size_t>(b) * nt;
          detail::walk_block(pot, q, p, n, static_cast<std::uint64_t>(b),
                             [&](std::uint64_t, const auto& state) {
                               for (std::size_t k = 0; k < nt; ++k) acc[k].add(pot.log_value(state, ts[k]));
                             });
        }
      },
      cf.potential());

  std::vector<double> out(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    LogSumExp total;
    for (long long b = 0; b < blocks; ++b) total.merge(partial[static_cast<std::size_t>(b) * nt + k]);
    out[k] = total.value();
  }
  return out;
}

std::vector<double> log_value_table(const CylinderFunction& cf, double t, int n,
                                    const ComputeOptions& opts) {
  check_t(t);
  const Alphabet alphabet = cf.alphabet();
  const std::uint64_t total = opts.budget.check(alphabet, n);
  const std::size_t q = alphabet.size();
  const int p = block_depth(n);
  const auto blocks = static_cast<long long>(detail::ipow(q, p));
  std::vector<double> table(total);

  std::visit(
      [&](const auto& pot) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(opts))
        for (long long b = 0; b < blocks; ++b) {
          detail::walk_block(pot, q, p, n, static_cast<std::uint64_t>(b),
                             [&](std::uint64_t index, const auto& state) {
                               table[index] = pot.log_value(state, t);
                             });
        }
      },
      cf.potential());
  return table;
}

namespace serial {

double log_partition_sum(const CylinderFunction& cf, double t, int n, EnumerationBudget budget) {
  check_level(n);
  const auto values = log_value_table(cf, t, n, budget);
  const double top = *std::max_element(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

std::vector<double> log_value_table(const CylinderFunction& cf, double t, int n,
                                    EnumerationBudget budget) {
  WordStream stream(cf.alphabet(), n, budget);
  std::vector<double> out;
  out.reserve(stream.total());
  Word w;
  while (stream.next(w)) out.push_back(cf.log_value(t, w));
  return out;
}

}  // namespace serial

}  // namespace affdim::kernels
