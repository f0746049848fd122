#pragma once

// Words over a finite alphabet, the left shift, and the 2^-k symbolic metric.
//
// A word is a finite sequence of symbols in [0, #I). Infinite symbols only
// ever appear as the tail argument of a cylinder function; they are modelled
// by the constant tail 000... (see kTailSymbol) and never materialized.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "affdim/error.hpp"

namespace affdim {

using Symbol = std::uint32_t;
using PackedIndex = std::uint64_t;

/// Symbol repeated forever to complete finite words into infinite ones.
inline constexpr Symbol kTailSymbol = 0;

/// Default cap on the number of words a single enumeration may visit.
inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 24;

class Alphabet {
 public:
  explicit Alphabet(std::size_t size);

  /// Admits the degenerate one-symbol alphabet of a single-map system.
  /// Validation of user input goes through the checked constructor.
  static Alphabet degenerate_allowed(std::size_t size);

  std::size_t size() const noexcept { return size_; }

  /// #I^n, or nullopt when it does not fit in 64 bits.
  std::optional<std::uint64_t> count(int n) const noexcept;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t size_;
};

/// Enumeration guard. Throws BudgetExceeded instead of letting an
/// exponential table exhaust memory.
struct EnumerationBudget {
  std::uint64_t max_words = kDefaultWordBudget;

  /// Returns #I^n after checking it against the budget.
  std::uint64_t check(const Alphabet& alphabet, int n) const;
};

class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  /// Decodes a base-#I packed index into a word of length n.
  static Word unpack(PackedIndex index, const Alphabet& alphabet, int n);

  std::size_t length() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol operator[](std::size_t k) const { return symbols_[k]; }
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }

  /// i|_k: the first k symbols.
  Word prefix(std::size_t k) const;

  /// Base-#I packing, most significant symbol first, so numeric order of
  /// the packed index equals lexicographic order of words of equal length.
  PackedIndex pack(const Alphabet& alphabet) const;

  /// Throws DomainError if any symbol is outside the alphabet.
  void validate(const Alphabet& alphabet) const;

  /// Compact form "0120"; symbols >= 10 are comma separated.
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

/// sigma: drops the first symbol.
Word shift_word(const Word& w);

/// sigma^j.
Word shift_word(const Word& w, std::size_t j);

Word concat(const Word& i, const Word& j);

/// 2^{-(k-1)} where k is the first (1-based) position where i and j differ;
/// 0 when they are equal.
double word_metric(const Word& i, const Word& j);

/// Streams I^n in lexicographic order without materializing the list.
class WordStream {
 public:
  WordStream(const Alphabet& alphabet, int n, EnumerationBudget budget = {});

  /// Advances to the next word; returns false once the stream is exhausted.
  bool next(Word& out);

  std::uint64_t total() const noexcept { return total_; }

 private:
  Alphabet alphabet_;
  std::vector<Symbol> current_;
  std::uint64_t total_;
  std::uint64_t emitted_ = 0;
};

/// Convenience wrapper returning the whole stream as a vector.
std::vector<Word> words_of_length(const Alphabet& alphabet, int n,
                                  EnumerationBudget budget = {});

}  // namespace affdim
