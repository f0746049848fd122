#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affdim/linalg.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

/// phi(x) = A x + a
struct AffineMap {
  Matrix linear;
  std::vector<double> translation;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// Affine iterated function system in R^d. Construction only checks shapes;
/// the contraction hypotheses are checked by validate_ifs.
class AffineIFS {
 public:
  AffineIFS() = default;
  AffineIFS(std::string name, int dim, std::vector<AffineMap> maps);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return maps_.size(); }
  const std::vector<AffineMap>& maps() const noexcept { return maps_; }
  const AffineMap& map(std::size_t i) const { return maps_[i]; }
  Alphabet alphabet() const { return Alphabet::degenerate_allowed(maps_.size()); }

  /// Same linear parts, translations replaced by `translations`
  /// (d * #I values, map-major).
  AffineIFS with_translations(const std::vector<double>& translations) const;

  /// FNV-1a over name, dimension and the exact bits of every entry.
  std::uint64_t content_hash() const;

  friend bool operator==(const AffineIFS&, const AffineIFS&) = default;

 private:
  std::string name_;
  int dim_ = 0;
  std::vector<AffineMap> maps_;
};

/// A_w = A_{w_1} A_{w_2} ... A_{w_n}; identity for the empty word.
Matrix word_matrix(const AffineIFS& ifs, const Word& w);

/// 64-bit FNV-1a, usable incrementally.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t size);
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace affdim
