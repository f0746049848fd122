#include <doctest.h>

#include <bit>
#include <cmath>

#include "affdim/kernels.hpp"
#include "affdim/rng.hpp"

using namespace affdim;

namespace {

AffineIFS generic_pair() {
  const Matrix a = Matrix::rotation(0.4) * Matrix::diagonal({0.45, 0.3});
  const Matrix b = Matrix::rotation(-1.1) * Matrix::diagonal({0.42, 0.25});
  return AffineIFS("generic", 2, {{a, {0, 0}}, {b, {1, 0}}});
}

AffineIFS generic_triple_3d() {
  const Matrix a{{0.3, 0.1, 0.0}, {-0.1, 0.4, 0.05}, {0.02, 0.0, 0.2}};
  const Matrix b{{0.25, 0.0, 0.1}, {0.0, 0.35, 0.0}, {-0.1, 0.05, 0.3}};
  const Matrix c{{0.5, 0.0, 0.0}, {0.1, 0.2, 0.0}, {0.0, 0.1, 0.1}};
  return AffineIFS("generic3", 3, {{a, {0, 0, 0}}, {b, {1, 0, 0}}, {c, {0, 1, 0}}});
}

// Independent oracle: every word multiplied out from scratch.
long double brute_sum(const AffineIFS& ifs, double t, int n) {
  long double sum = 0;
  for (const Word& w : words_of_length(ifs.alphabet(), n)) sum += svf_alpha_t(word_matrix(ifs, w), t);
  return sum;
}

}  // namespace

TEST_CASE("log-sum-exp accumulator") {
  LogSumExp a;
  CHECK(a.value() == -std::numeric_limits<double>::infinity());
  a.add(std::log(2.0));
  a.add(std::log(3.0));
  CHECK(a.value() == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  LogSumExp b;
  b.add(-1000.0);
  b.add(-1000.0);
  CHECK(b.value() == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  a.merge(b);
  CHECK(a.value() == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  LogSumExp empty;
  b.merge(empty);
  CHECK(b.value() == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  a.add(-std::numeric_limits<double>::infinity());
  CHECK(a.value() == doctest::Approx(std::log(5.0)).epsilon(1e-15));
}

TEST_CASE("parallel kernel against brute force") {
  for (const AffineIFS& ifs : {generic_pair(), generic_triple_3d()}) {
    const auto cf = CylinderFunction::natural(ifs);
    for (int n = 1; n <= 6; ++n) {
      for (double t : {0.0, 0.7, 1.0, 1.8, 2.6, 3.5}) {
        const double oracle = static_cast<double>(std::log(brute_sum(ifs, t, n)));
        const double got = kernels::log_partition_sum(cf, t, n, {.workers = 2});
        if (std::abs(got - oracle) > 1e-11 * std::max(1.0, std::abs(oracle)))
          FAIL(ifs.name() << " n=" << n << " t=" << t << " got " << got << " want " << oracle);
      }
    }
  }
}

TEST_CASE("t = 0 counts words") {
  const auto cf = CylinderFunction::natural(generic_pair());
  CHECK(kernels::log_partition_sum(cf, 0.0, 3, {}) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-15));
  CHECK(kernels::serial::log_partition_sum(cf, 0.0, 3) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("serial reference and parallel kernel agree") {
  const auto nat = CylinderFunction::natural(generic_pair());
  const auto prod = CylinderFunction::product({0.5, 0.3, 0.2});
  for (int n = 1; n <= 12; ++n) {
    for (double t : {0.3, 1.2, 2.4}) {
      const double s = kernels::serial::log_partition_sum(nat, t, n);
      const double p = kernels::log_partition_sum(nat, t, n, {.workers = 4});
      CHECK(std::abs(s - p) <= 1e-12 * std::max(1.0, std::abs(s)));
    }
  }
  for (int n = 1; n <= 8; ++n) {
    const double s = kernels::serial::log_partition_sum(prod, 1.1, n);
    const double p = kernels::log_partition_sum(prod, 1.1, n, {.workers = 3});
    CHECK(std::abs(s - p) <= 1e-12 * std::max(1.0, std::abs(s)));
    // Chain rule: S_n = (sum s_i^t)^n.
    const double closed = n * std::log(std::pow(0.5, 1.1) + std::pow(0.3, 1.1) + std::pow(0.2, 1.1));
    CHECK(std::abs(p - closed) <= 1e-12 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("outputs are bitwise identical across worker counts") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const std::vector<double> ts{0.2, 0.9, 1.4, 2.2};
  for (int n : {1, 3, 4, 5, 9, 14}) {
    const double ref = kernels::log_partition_sum(cf, 1.37, n, {.workers = 1});
    const auto ref_multi = kernels::log_partition_sums(cf, ts, n, {.workers = 1});
    const auto ref_table = kernels::log_value_table(cf, 0.8, std::min(n, 10), {.workers = 1});
    for (int w : {2, 8}) {
      for (int repeat = 0; repeat < 2; ++repeat) {
        CHECK(std::bit_cast<std::uint64_t>(kernels::log_partition_sum(cf, 1.37, n, {.workers = w})) ==
              std::bit_cast<std::uint64_t>(ref));
        const auto multi = kernels::log_partition_sums(cf, ts, n, {.workers = w});
        for (std::size_t k = 0; k < ts.size(); ++k)
          CHECK(std::bit_cast<std::uint64_t>(multi[k]) == std::bit_cast<std::uint64_t>(ref_multi[k]));
        CHECK(kernels::log_value_table(cf, 0.8, std::min(n, 10), {.workers = w}) == ref_table);
      }
    }
  }
}

TEST_CASE("multi-t enumeration equals separate enumerations bitwise") {
  const auto cf = CylinderFunction::natural(generic_triple_3d());
  const std::vector<double> ts{0.0, 0.5, 1.5, 2.5, 3.5};
  const auto multi = kernels::log_partition_sums(cf, ts, 7, {.workers = 2});
  for (std::size_t k = 0; k < ts.size(); ++k)
    CHECK(std::bit_cast<std::uint64_t>(multi[k]) ==
          std::bit_cast<std::uint64_t>(kernels::log_partition_sum(cf, ts[k], 7, {.workers = 2})));
}

TEST_CASE("value table is indexed by packed word") {
  const AffineIFS ifs = generic_pair();
  const auto cf = CylinderFunction::natural(ifs);
  const auto table = kernels::log_value_table(cf, 1.3, 6, {.workers = 2});
  const auto serial = kernels::serial::log_value_table(cf, 1.3, 6);
  REQUIRE(table.size() == 64);
  REQUIRE(serial.size() == 64);
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const auto idx = rng.below(64);
    const Word w = Word::unpack(idx, ifs.alphabet(), 6);
    CHECK(table[idx] == doctest::Approx(std::log(svf_alpha_t(word_matrix(ifs, w), 1.3))).epsilon(1e-12));
    CHECK(serial[idx] == doctest::Approx(table[idx]).epsilon(1e-12));
  }
}

TEST_CASE("no underflow at large t and depth") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const double v = kernels::log_partition_sum(cf, 40.0, 15, {.workers = 2});
  CHECK(std::isfinite(v));
  CHECK(v < -500.0);  // far below the double range of exp
}

TEST_CASE("budget is enforced by the kernels") {
  const auto cf = CylinderFunction::product({0.5, 0.5});
  ComputeOptions small;
  small.budget.max_words = 1024;
  CHECK_NOTHROW(kernels::log_partition_sum(cf, 1.0, 10, small));
  CHECK_THROWS_AS(kernels::log_partition_sum(cf, 1.0, 11, small), BudgetExceeded);
  CHECK_THROWS_AS(kernels::log_value_table(cf, 1.0, 11, small), BudgetExceeded);
  CHECK_THROWS_AS(kernels::serial::log_partition_sum(cf, 1.0, 11, small.budget), BudgetExceeded);
  CHECK_THROWS_AS(kernels::log_partition_sum(cf, 1.0, 0, {}), DomainError);
}

TEST_CASE("block depth") {
  CHECK(kernels::block_depth(1) == 1);
  CHECK(kernels::block_depth(4) == 4);
  CHECK(kernels::block_depth(12) == 4);
}
