#pragma once

// Depth-first walks over prefix blocks of I^n. Internal to the library.

#include <cstdint>
#include <vector>

#include "affdim/symbolic.hpp"

namespace affdim::detail {

inline std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

template <class Potential, class Visit>
void walk_suffixes(const Potential& pot, std::size_t q, int remaining,
                   const typename Potential::State& state, std::uint64_t index, Visit& visit) {
  if (remaining == 0) {
    visit(index, state);
    return;
  }
  for (std::size_t a = 0; a < q; ++a) {
    const auto next = pot.extend(state, static_cast<Symbol>(a));
    walk_suffixes(pot, q, remaining - 1, next, index * q + a, visit);
  }
}

/// Visits every word of I^n whose first p symbols encode `block`, in
/// lexicographic order, as visit(packed_index, state).
template <class Potential, class Visit>
void walk_block(const Potential& pot, std::size_t q, int p, int n, std::uint64_t block, Visit&& visit) {
  std::vector<Symbol> prefix(static_cast<std::size_t>(p));
  std::uint64_t rest = block;
  for (int k = p - 1; k >= 0; --k) {
    prefix[static_cast<std::size_t>(k)] = static_cast<Symbol>(rest % q);
    rest /= q;
  }
  auto state = pot.root();
  for (Symbol s : prefix) state = pot.extend(state, s);
  walk_suffixes(pot, q, n - p, state, block, visit);
}

}  // namespace affdim::detail
