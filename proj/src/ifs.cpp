#include "affdim/ifs.hpp"

#include <cmath>

#include "affdim/rng.hpp"

namespace affdim {

double Rng::normal() {
  double u = 0;
  while (u == 0) u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

AffineIFS::AffineIFS(std::string name, int dim, std::vector<AffineMap> maps)
    : name_(std::move(name)), dim_(dim), maps_(std::move(maps)) {
  if (dim_ < 1 || dim_ > kMaxDim) {
    throw DomainError("dimension " + std::to_string(dim_) + " outside 1.." + std::to_string(kMaxDim));
  }
  if (maps_.empty()) throw DomainError("an IFS needs at least one map");
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    if (maps_[i].linear.dim() != dim_) {
      throw DomainError("map " + std::to_string(i) + ": matrix dimension does not match d");
    }
    if (maps_[i].translation.size() != static_cast<std::size_t>(dim_)) {
      throw DomainError("map " + std::to_string(i) + ": translation length does not match d");
    }
  }
}

AffineIFS AffineIFS::with_translations(const std::vector<double>& translations) const {
  if (translations.size() != maps_.size() * static_cast<std::size_t>(dim_)) {
    throw DomainError("translation tuple has wrong length");
  }
  auto maps = maps_;
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (int c = 0; c < dim_; ++c)
      maps[i].translation[static_cast<std::size_t>(c)] =
          translations[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)];
  return AffineIFS(name_, dim_, std::move(maps));
}

std::uint64_t AffineIFS::content_hash() const {
  Fnv1a h;
  h.str(name_);
  h.u64(static_cast<std::uint64_t>(dim_));
  h.u64(maps_.size());
  for (const auto& m : maps_) {
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) h.f64(m.linear(r, c));
    for (double a : m.translation) h.f64(a);
  }
  return h.digest();
}

Matrix word_matrix(const AffineIFS& ifs, const Word& w) {
  w.validate(ifs.alphabet());
  Matrix acc = Matrix::identity(ifs.dim());
  for (Symbol s : w.symbols()) acc = acc * ifs.map(s).linear;
  return acc;
}

void Fnv1a::bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < size; ++k) {
    state_ ^= p[k];
    state_ *= 0x100000001b3ULL;
  }
}

}  // namespace affdim
