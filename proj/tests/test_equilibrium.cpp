#include <doctest.h>

#include <cmath>
#include <numeric>

#include "affdim/equilibrium.hpp"
#include "affdim/pressure.hpp"
#include "affdim/rng.hpp"

using namespace affdim;

namespace {

AffineIFS swap_pair() {
  return AffineIFS("swap", 2,
                   {{Matrix::diagonal({0.5, 0.25}), {0, 0}}, {Matrix::diagonal({0.25, 0.5}), {1, 0}}});
}

AffineIFS generic_pair() {
  const Matrix a = Matrix::rotation(0.4) * Matrix::diagonal({0.45, 0.3});
  const Matrix b = Matrix::rotation(-1.1) * Matrix::diagonal({0.42, 0.25});
  return AffineIFS("generic", 2, {{a, {0, 0}}, {b, {1, 0}}});
}

AffineIFS random_pair(Rng& rng) {
  std::vector<AffineMap> maps;
  for (int i = 0; i < 2; ++i) {
    const Matrix m = Matrix::rotation(rng.uniform(0, 6.3)) *
                     Matrix::diagonal({rng.uniform(0.3, 0.6), rng.uniform(0.05, 0.3)}) *
                     Matrix::rotation(rng.uniform(0, 6.3));
    maps.push_back({m, {0, 0}});
  }
  return AffineIFS("random", 2, maps);
}

// Independent oracle for mu_n: every word of length n weighted by
// alpha^t(A_w) computed from scratch, each of its n windows (padded with
// symbol 0) credited with weight / n.
std::vector<long double> brute_mu(const AffineIFS& ifs, double t, int n, int k) {
  const Alphabet a = ifs.alphabet();
  const auto words = words_of_length(a, n);
  std::vector<long double> weights;
  long double total = 0;
  for (const Word& w : words) {
    weights.push_back(svf_alpha_t(word_matrix(ifs, w), t));
    total += weights.back();
  }
  std::vector<long double> table(static_cast<std::size_t>(*a.count(k)), 0.0L);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<Symbol> padded = words[i].symbols();
    padded.resize(static_cast<std::size_t>(n + k), 0);
    for (int j = 0; j < n; ++j) {
      const Word window(std::vector<Symbol>(padded.begin() + j, padded.begin() + j + k));
      table[window.pack(a)] += weights[i] / total / n;
    }
  }
  return table;
}

std::vector<double> random_probability(Rng& rng, std::size_t size) {
  std::vector<double> p(size);
  double sum = 0;
  for (auto& x : p) sum += x = -std::log(1.0 - rng.uniform());  // Dirichlet(1, ..., 1)
  for (auto& x : p) x /= sum;
  // Some vectors with exact zeros, to exercise H(0) = 0.
  if (rng.below(4) == 0) {
    for (std::size_t i = 0; i < size; i += 3) p[i] = 0.0;
    sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= sum;
  }
  return p;
}

}  // namespace

TEST_CASE("nu weights examples") {
  const auto uniform = nu_weights(CylinderFunction::product({0.5, 0.5}), 1.7, 4);
  REQUIRE(uniform.masses().size() == 16);
  for (double m : uniform.masses()) CHECK(m == doctest::Approx(1.0 / 16).epsilon(1e-14));

  // alpha^1.5 of 00, 01, 10, 11: 1/16, (1/8)^1.5, (1/8)^1.5, 1/16.
  const auto nu = nu_weights(CylinderFunction::natural(swap_pair()), 1.5, 2);
  const double a = 1.0 - 1.0 / std::sqrt(2.0), b = 1.0 / std::sqrt(2.0) - 0.5;
  CHECK(nu.mass(Word{0, 0}) == doctest::Approx(a).epsilon(1e-13));
  CHECK(nu.mass(Word{0, 1}) == doctest::Approx(b).epsilon(1e-13));
  CHECK(nu.mass(Word{1, 0}) == doctest::Approx(b).epsilon(1e-13));
  CHECK(nu.mass(Word{1, 1}) == doctest::Approx(a).epsilon(1e-13));
  CHECK(nu.mass(Word{0, 0}) == doctest::Approx(0.29290).epsilon(1e-4));
  CHECK(nu.depth() == 2);

  const AffineIFS single("single", 2, {{Matrix::diagonal({0.5, 0.3}), {0, 0}}});
  const auto one = nu_weights(CylinderFunction::natural(single), 0.8, 3);
  REQUIRE(one.masses().size() == 1);
  CHECK(one.masses()[0] == 1.0);
}

TEST_CASE("measure containers") {
  const Alphabet two(2);
  CHECK_THROWS_AS(CylinderMeasure(two, 2, {0.5, 0.5}, "custom"), DomainError);
  CHECK_THROWS_AS(CylinderMeasure(two, 1, {1.5, -0.5}, "custom"), DomainError);
  const auto pm = CylinderMeasure::point_mass(two, Word{1, 0});
  CHECK(pm.mass(Word{1, 0}) == 1.0);
  CHECK(pm.total() == 1.0);
  CHECK_THROWS_AS(pm.mass(Word{1}), DomainError);
  const std::vector<double> p{0.2, 0.8};
  const auto bern = CylinderMeasure::bernoulli(p, 3);
  CHECK(bern.mass(Word{1, 0, 1}) == doctest::Approx(0.8 * 0.2 * 0.8).epsilon(1e-15));
  CHECK(bern.marginal(1).mass(Word{1}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(bern.preimage_masses()[Word{0, 1}.pack(two)] == doctest::Approx(0.2 * 0.8).epsilon(1e-15));
  CHECK_THROWS_AS(bern.marginal(4), DomainError);
}

TEST_CASE("mu_n against the brute-force oracle") {
  const AffineIFS ifs = generic_pair();
  const auto cf = CylinderFunction::natural(ifs);
  for (int n : {2, 3, 5, 7}) {
    for (int k = 1; k <= std::min(n, 4); ++k) {
      const auto mu = mu_cesaro(cf, 1.2, n, k, {.workers = 2});
      const auto oracle = brute_mu(ifs, 1.2, n, k);
      REQUIRE(mu.masses().size() == oracle.size());
      for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(mu.masses()[i] == doctest::Approx(static_cast<double>(oracle[i])).epsilon(1e-12));
    }
  }
}

TEST_CASE("mu_n examples") {
  const auto prod = CylinderFunction::product({0.5, 0.5});
  for (int k = 1; k <= 4; ++k) {
    const auto mu = mu_cesaro(prod, 1.0, 6, k);
    // Padded windows lean towards the tail symbol by at most (k - 1) / n;
    // dropping them leaves the exactly uniform table.
    const auto drop = mu_cesaro(prod, 1.0, 6, k, {}, TailMode::drop);
    for (double m : drop.masses()) CHECK(m == doctest::Approx(std::pow(0.5, k)).epsilon(1e-13));
    for (double m : mu.masses()) CHECK(std::abs(m - std::pow(0.5, k)) <= (k - 1) / 6.0 + 1e-13);
    CHECK(mu.total() == doctest::Approx(1.0).epsilon(1e-13));
  }
  const auto mu1 = mu_cesaro(prod, 1.0, 6, 1);
  CHECK(mu1.mass(Word{0}) == doctest::Approx(0.5).epsilon(1e-14));

  const auto swap = CylinderFunction::natural(swap_pair());
  const auto half = mu_cesaro(swap, 1.5, 2, 1);
  CHECK(half.mass(Word{0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(half.mass(Word{1}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(invariance_defect(swap, 1.5, 6, 2) <= 1.0 / 6 + 1e-12);

  CHECK_THROWS_AS(mu_cesaro(swap, 1.0, 3, 4), DomainError);
  CHECK_THROWS_AS(mu_cesaro(swap, 1.0, 3, 0), DomainError);
}

TEST_CASE("produced measures sum to one and are marginal consistent") {
  Rng rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cf = CylinderFunction::natural(random_pair(rng));
    const double t = rng.uniform(0.2, 2.5);
    const int n = 8;
    for (TailMode mode : {TailMode::pad, TailMode::drop}) {
      const auto deep = mu_cesaro(cf, t, n, 4, {}, mode);
      CHECK(std::abs(deep.total() - 1.0) <= 1e-12);
      for (int k = 1; k < 4; ++k) {
        const auto direct = mu_cesaro(cf, t, n, k, {}, mode);
        const auto restricted = deep.marginal(k);
        if (mode == TailMode::pad) {
          // Both tables come from the same padded windows, so they agree.
          for (std::size_t i = 0; i < direct.masses().size(); ++i)
            CHECK(std::abs(direct.masses()[i] - restricted.masses()[i]) <= 1e-12);
        }
        CHECK(std::abs(direct.total() - 1.0) <= 1e-12);
      }
    }
    const auto nu = nu_weights(cf, t, n);
    CHECK(std::abs(nu.total() - 1.0) <= 1e-12);
    const auto nu4 = nu_weights(cf, t, 4);
    CHECK(std::abs(nu.marginal(4).total() - nu4.total()) <= 1e-12);
  }
}

TEST_CASE("entropy examples") {
  CHECK(entropy_depth(CylinderMeasure::uniform(Alphabet(2), 3)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(entropy_depth(CylinderMeasure::point_mass(Alphabet(2), Word{1, 0})) == 0.0);
  const double a = 1.0 - 1.0 / std::sqrt(2.0), b = 1.0 / std::sqrt(2.0) - 0.5;
  const CylinderMeasure m(Alphabet(2), 2, {a, b, b, a}, "custom");
  // -(a log a + b log b), evaluated independently
  CHECK(entropy_depth(m) == doctest::Approx(0.6857513293769083).epsilon(1e-13));
  CHECK(entropy_term(0.0) == 0.0);
  CHECK(entropy_term(1.0) == 0.0);
  const auto nu = nu_weights(CylinderFunction::natural(swap_pair()), 1.5, 2);
  CHECK(entropy_depth(nu) == doctest::Approx(0.6857513293769083).epsilon(1e-12));
}

TEST_CASE("entropy lies in [0, log #I]") {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const CylinderMeasure m(Alphabet(3), k, random_probability(rng, static_cast<std::size_t>(std::pow(3, k))), "custom");
    const double h = entropy_depth(m);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(3.0) + 1e-12);
  }
}

TEST_CASE("energy examples") {
  const auto prod = CylinderFunction::product({0.5, 0.5});
  Rng rng(53);
  const CylinderMeasure any(Alphabet(2), 3, random_probability(rng, 8), "custom");
  CHECK(energy_depth(prod, 1.0, any) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

  const AffineIFS pair("diag", 2, {{Matrix::diagonal({0.5, 0.25}), {0, 0}}, {Matrix::diagonal({0.5, 0.25}), {1, 0}}});
  const auto point = CylinderMeasure::point_mass(Alphabet(2), Word{0, 0});
  CHECK(energy_depth(CylinderFunction::natural(pair), 1.0, point) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

  const Matrix d = Matrix::diagonal({0.5, 0.25});
  const AffineIFS three("diag3", 2, {{d, {0, 0}}, {d, {0.5, 0}}, {d, {0, 0.75}}});
  CHECK(energy_depth(CylinderFunction::natural(three), 1.5, CylinderMeasure::uniform(Alphabet(3), 1)) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK_THROWS_AS(energy_depth(CylinderFunction::natural(three), 1.5, CylinderMeasure::uniform(Alphabet(2), 1)),
                  DomainError);
}

TEST_CASE("jensen residual") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const int n = 6;
  const double t = 1.1;
  const auto nu = nu_weights(cf, t, n);
  CHECK(std::abs(jensen_residual(cf, t, n, nu)) <= 1e-12);

  const Word w{1, 0, 0, 1, 1, 0};
  const auto point = CylinderMeasure::point_mass(cf.alphabet(), w);
  const double expect = (log_partition_sum(cf, t, n) - cf.log_value(t, w)) / n;
  CHECK(jensen_residual(cf, t, n, point) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect >= 0);

  Rng rng(54);
  double worst = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const CylinderMeasure m(cf.alphabet(), n, random_probability(rng, 64), "custom");
    worst = std::min(worst, jensen_residual(cf, rng.uniform(0, 3), n, m));
  }
  CHECK(worst >= -1e-12);
  CHECK_THROWS_AS(jensen_residual(cf, t, 5, nu), DomainError);
}

TEST_CASE("invariance defect bound") {
  CHECK(invariance_defect(CylinderFunction::product({0.5, 0.5}), 1.0, 8, 2, {}, TailMode::drop) <= 1e-14);
  Rng rng(55);
  const auto random_cf = CylinderFunction::natural(random_pair(rng));
  for (const auto& cf : {CylinderFunction::natural(swap_pair()), random_cf,
                         CylinderFunction::natural(generic_pair())}) {
    for (int n : {6, 8, 12}) {
      for (int k = 1; k <= 3; ++k) {
        const double d = invariance_defect(cf, 1.3, n, k, {.workers = 2});
        CHECK(d <= 1.0 / n + 1e-12);
        CHECK(d >= 0.0);
      }
    }
  }
  CHECK_THROWS_AS(invariance_defect(random_cf, 1.0, 4, 4), DomainError);
}

TEST_CASE("the defect is exactly the boundary term") {
  // mu_n(sigma^-1[i]) - mu_n([i]) = (nu_n(sigma^-n [i]) - nu_n([i])) / n, and
  // nu_n(sigma^-n [i]) is 1 for the tail cylinder [0...0] and 0 otherwise.
  const auto cf = CylinderFunction::natural(generic_pair());
  const int n = 7, k = 2;
  const auto nu = nu_weights(cf, 0.9, n).marginal(k);
  double expect = 0;
  for (std::size_t i = 0; i < nu.masses().size(); ++i)
    expect = std::max(expect, std::abs((i == 0 ? 1.0 : 0.0) - nu.masses()[i]) / n);
  CHECK(invariance_defect(cf, 0.9, n, k) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("entropy of mu_n tables is subadditive") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const auto mu = mu_cesaro(cf, 1.2, 12, 6);
  auto block_entropy = [&](int k) { return k * entropy_depth(mu.marginal(k)); };
  for (int a = 1; a <= 5; ++a)
    for (int b = 1; a + b <= 6; ++b) CHECK(block_entropy(a + b) <= block_entropy(a) + block_entropy(b) + 1e-10);
}

TEST_CASE("local dimension ratios for the product kind are exactly 1") {
  const auto half = local_dimension_samples(CylinderFunction::product({0.5, 0.5}), 1.0, 10, 50, 3);
  REQUIRE(half.ratios.size() == 50);
  for (double r : half.ratios) CHECK(std::abs(r - 1.0) <= 1e-12);

  const auto thirds = CylinderFunction::product({1.0 / 3, 1.0 / 3});
  const double t_star = pressure_root(thirds, 10, 1e-15).t;
  CHECK(t_star == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-14));
  const auto s = local_dimension_samples(thirds, t_star, 10, 50, 4);
  for (double r : s.ratios) CHECK(std::abs(r - 1.0) <= 1e-12);
  CHECK(s.stddev <= 1e-12);
}

TEST_CASE("sampled mean ratio matches its exact expectation under nu_n") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const int n = 6;
  const auto s = local_dimension_samples(cf, 1.0, n, 4000, 9);
  const auto nu = nu_weights(cf, 1.0, n);
  const auto logs = kernels::log_value_table(cf, 1.0, n, {});
  double exact = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) exact += nu.masses()[i] * std::log(nu.masses()[i]) / logs[i];
  CHECK(std::abs(s.mean - exact) <= 4 * s.stddev / std::sqrt(4000.0) + 1e-12);
}

TEST_CASE("local dimension sampling is seed deterministic and worker independent") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const auto a = local_dimension_samples(cf, 1.0, 8, 100, 77, {.workers = 1});
  const auto b = local_dimension_samples(cf, 1.0, 8, 100, 77, {.workers = 8});
  CHECK(a.ratios == b.ratios);
  const auto c = local_dimension_samples(cf, 1.0, 8, 100, 78);
  CHECK(a.ratios != c.ratios);
}

TEST_CASE("bernoulli estimate") {
  const std::vector<double> s{0.5, 0.3, 0.2};
  const auto prod = CylinderFunction::product(s);
  const double t = 1.3;
  const auto est = bernoulli_lower_estimate(prod, t, 3, 200);
  double z = 0;
  for (double x : s) z += std::pow(x, t);
  CHECK(est.score == doctest::Approx(std::log(z)).epsilon(1e-9));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(est.p[i] == doctest::Approx(std::pow(s[i], t) / z).epsilon(1e-6));

  const auto swap = bernoulli_lower_estimate(CylinderFunction::natural(swap_pair()), 1.5, 4, 100);
  CHECK(std::abs(swap.p[0] - 0.5) <= 1e-6);
  CHECK(std::abs(swap.p[1] - 0.5) <= 1e-6);

  Rng rng(56);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cf = CylinderFunction::natural(random_pair(rng));
    for (int k : {1, 3, 6}) {
      const double tt = rng.uniform(0.2, 2.5);
      const auto e = bernoulli_lower_estimate(cf, tt, k, 100);
      CHECK(e.score <= log_partition_sum(cf, tt, k) / k + 1e-10);
      CHECK(std::accumulate(e.p.begin(), e.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("diagnostics") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const auto d = equilibrium_diagnostics(cf, 1.1, 10, 3);
  CHECK(d.entropy_k >= 0);
  CHECK(d.entropy_k <= std::log(2.0) + 1e-12);
  CHECK(d.invariance_defect_max <= 0.1 + 1e-12);
  CHECK(d.gap == doctest::Approx(d.pressure_upper - d.entropy_k - d.energy_k));
  CHECK_THROWS_AS(equilibrium_diagnostics(cf, 1.1, 3, 3), DomainError);
}

TEST_CASE("mu_n tables are identical across worker counts") {
  const auto cf = CylinderFunction::natural(generic_pair());
  const auto a = mu_cesaro(cf, 1.1, 12, 3, {.workers = 1});
  for (int w : {2, 8}) {
    const auto b = mu_cesaro(cf, 1.1, 12, 3, {.workers = w});
    CHECK(std::equal(a.masses().begin(), a.masses().end(), b.masses().begin()));
  }
}
