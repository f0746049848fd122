#include "affdim/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affdim/rng.hpp"

namespace affdim {

NaturalPotential::NaturalPotential(const AffineIFS& ifs) : dim_(ifs.dim()) {
  linear_.reserve(ifs.size());
  log_dets_.reserve(ifs.size());
  for (const auto& m : ifs.maps()) {
    const double det = m.linear.determinant();
    if (det == 0.0 || !std::isfinite(det)) {
      throw NumericallySingular("natural cylinder function needs non-singular matrices");
    }
    linear_.push_back(m.linear);
    log_dets_.push_back(std::log(std::abs(det)));
  }
}

NaturalPotential::State NaturalPotential::root() const { return {Matrix::identity(dim_), 0, 0.0}; }

NaturalPotential::State NaturalPotential::extend(const State& s, Symbol a) const {
  State next{s.m * linear_[a], s.exp2, s.log_det + log_dets_[a]};
  double big = 0;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) big = std::max(big, std::abs(next.m(r, c)));
  int e = 0;
  std::frexp(big, &e);
  if (e != 0) {
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) next.m(r, c) = std::ldexp(next.m(r, c), -e);
    next.exp2 += e;
  }
  return next;
}

std::array<double, kMaxDim> NaturalPotential::log_singular_values(const State& s) const {
  constexpr double ln2 = std::numbers::ln2;
  const double shift = s.exp2 * ln2;
  std::array<double, kMaxDim> out{};
  if (dim_ == 1) {
    out[0] = std::log(std::abs(s.m(0, 0))) + shift;
    return out;
  }
  if (dim_ == 2) {
    out[0] = std::log(top_singular_value_2x2(s.m)) + shift;
    out[1] = s.log_det - out[0];
    return out;
  }
  const auto sv = jacobi_singular_values(s.m);
  double others = 0;
  for (int k = 0; k < dim_ - 1; ++k) {
    out[static_cast<std::size_t>(k)] = std::log(sv[static_cast<std::size_t>(k)]) + shift;
    others += out[static_cast<std::size_t>(k)];
  }
  out[static_cast<std::size_t>(dim_ - 1)] = s.log_det - others;
  return out;
}

double NaturalPotential::log_value(const State& s, double t) const {
  const auto logs = log_singular_values(s);
  return log_svf(std::span<const double>(logs.data(), static_cast<std::size_t>(dim_)), t);
}

ProductPotential::ProductPotential(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("product cylinder function needs weights");
  for (double w : weights_) {
    if (!(w > 0.0 && w < 1.0)) throw DomainError("product weights must lie in (0, 1)");
    log_weights_.push_back(std::log(w));
  }
}

CylinderFunction CylinderFunction::natural(const AffineIFS& ifs) {
  Fnv1a h;
  h.str("natural");
  h.u64(static_cast<std::uint64_t>(ifs.dim()));
  h.u64(ifs.size());
  for (const auto& m : ifs.maps())
    for (int r = 0; r < ifs.dim(); ++r)
      for (int c = 0; c < ifs.dim(); ++c) h.f64(m.linear(r, c));
  return CylinderFunction(NaturalPotential(ifs), h.digest());
}

CylinderFunction CylinderFunction::product(std::vector<double> weights) {
  Fnv1a h;
  h.str("product");
  h.u64(weights.size());
  for (double w : weights) h.f64(w);
  return CylinderFunction(ProductPotential(std::move(weights)), h.digest());
}

CylinderKind CylinderFunction::kind() const noexcept {
  return std::holds_alternative<NaturalPotential>(potential_) ? CylinderKind::natural
                                                              : CylinderKind::product;
}

Alphabet CylinderFunction::alphabet() const {
  return std::visit([](const auto& p) { return p.alphabet(); }, potential_);
}

double CylinderFunction::log_value(double t, const Word& w, const Word& /*tail*/) const {
  if (!(t >= 0)) throw DomainError("cylinder functions are defined for t >= 0");
  w.validate(alphabet());
  return std::visit(
      [&](const auto& p) {
        auto state = p.root();
        for (Symbol s : w.symbols()) state = p.extend(state, s);
        return p.log_value(state, t);
      },
      potential_);
}

double CylinderFunction::value(double t, const Word& w, const Word& tail) const {
  return std::exp(log_value(t, w, tail));
}

CylinderConstants CylinderFunction::constants(double /*t*/) const {
  CylinderConstants c;
  if (const auto* nat = std::get_if<NaturalPotential>(&potential_)) {
    c.s_lo = 1.0;
    c.s_hi = 0.0;
    for (const auto& m : nat->matrices()) {
      const auto s = singular_values(m);
      c.s_lo = std::min(c.s_lo, s.bottom());
      c.s_hi = std::max(c.s_hi, s.top());
    }
  } else {
    const auto& w = std::get<ProductPotential>(potential_).weights();
    c.s_lo = *std::min_element(w.begin(), w.end());
    c.s_hi = *std::max_element(w.begin(), w.end());
  }
  return c;
}

double cf_value(const CylinderFunction& cf, double t, const Word& w) {
  if (w.empty()) throw DomainError("cf_value needs a word of length >= 1");
  return cf.value(t, w);
}

CylinderConstants cf_constants(const CylinderFunction& cf, double t) { return cf.constants(t); }

bool AxiomReport::holds(double tolerance) const {
  return bvp_max_ratio - 1.0 <= tolerance && worst_subchain_violation <= tolerance &&
         worst_param_violation <= tolerance;
}

namespace {

const double kSubchainLogSlack = std::log1p(1e-12);

Word random_word(Rng& rng, std::size_t alphabet_size, std::size_t length) {
  std::vector<Symbol> s(length);
  for (auto& x : s) x = static_cast<Symbol>(rng.below(alphabet_size));
  return Word(std::move(s));
}

}  // namespace

AxiomReport verify_axioms(const CylinderFunction& cf, std::span<const double> t_grid, int n_max,
                          std::uint64_t samples, std::uint64_t seed, AxiomCheckOptions opts) {
  if (t_grid.empty()) throw DomainError("verify_axioms needs a non-empty t grid");
  for (double t : t_grid)
    if (!(t >= 0)) throw DomainError("verify_axioms needs t >= 0");
  const std::size_t q = cf.alphabet().size();
  const int max_len = std::max(n_max, 2);

  // (t, t + delta) pairs for the parameter bounds.
  std::vector<std::pair<double, double>> steps;
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) steps.emplace_back(t_grid[k], t_grid[k + 1]);
  if (steps.empty()) steps.emplace_back(t_grid[0], t_grid[0] + opts.fallback_delta);

  const CylinderConstants c = cf.constants(0.0);
  double bvp = 1.0;
  double subchain = -1.0;
  double param = -1.0;
  const auto count = static_cast<long long>(samples);

#pragma omp parallel for schedule(static) num_threads(std::max(opts.workers, 1)) \
    reduction(max : bvp, subchain, param)
  for (long long k = 0; k < count; ++k) {
    Rng rng = Rng::split(seed, static_cast<std::uint64_t>(k));
    const auto len = static_cast<std::size_t>(2 + rng.below(static_cast<std::uint64_t>(max_len - 1)));
    const std::size_t j = 1 + rng.below(len - 1);
    const Word w = random_word(rng, q, len);
    const Word tail_a = random_word(rng, q, 8);
    const Word tail_b = random_word(rng, q, 8);
    const Word head = w.prefix(j);
    const Word rest = shift_word(w, j);

    for (double t : t_grid) {
      const double la = cf.log_value(t, w, tail_a);
      const double lb = cf.log_value(t, w, tail_b);
      bvp = std::max(bvp, std::exp(std::abs(la - lb)));
      // psi_w(h) <= psi_{w|j}(sigma^j w, h) psi_{sigma^j w}(h) (1 + 1e-12); equality
      // cases (t = 0, t >= d) would otherwise show rounding noise as violations.
      const double excess = la - cf.log_value(t, head, concat(rest, tail_a)) - cf.log_value(t, rest, tail_a) -
                            kSubchainLogSlack;
      subchain = std::max(subchain, std::expm1(excess));
    }
    for (const auto& [t0, t1] : steps) {
      const double delta = t1 - t0;
      const double n = static_cast<double>(len);
      const double l0 = cf.log_value(t0, w);
      const double l1 = cf.log_value(t1, w);
      const double lower = l0 + delta * n * std::log(c.s_lo) - l1;
      const double upper = l1 - l0 - delta * n * std::log(c.s_hi);
      param = std::max({param, std::expm1(lower), std::expm1(upper)});
    }
  }

  AxiomReport report;
  report.bvp_max_ratio = bvp;
  report.worst_subchain_violation = subchain;
  report.worst_param_violation = param;
  report.samples = samples;
  return report;
}

}  // namespace affdim
