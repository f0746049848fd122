#include "affdim/symbolic.hpp"

#include <cmath>
#include <limits>

namespace affdim {

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size < 2) throw DomainError("alphabet must have at least two symbols");
}

Alphabet Alphabet::degenerate_allowed(std::size_t size) {
  if (size >= 2) return Alphabet(size);
  if (size == 0) throw DomainError("alphabet must be non-empty");
  Alphabet a(2);
  a.size_ = size;
  return a;
}

std::optional<std::uint64_t> Alphabet::count(int n) const noexcept {
  if (n < 0) return std::nullopt;
  std::uint64_t total = 1;
  for (int k = 0; k < n; ++k) {
    if (total > std::numeric_limits<std::uint64_t>::max() / size_) return std::nullopt;
    total *= size_;
  }
  return total;
}

std::uint64_t EnumerationBudget::check(const Alphabet& alphabet, int n) const {
  if (n < 0) throw DomainError("level must be non-negative");
  auto total = alphabet.count(n);
  if (!total) throw BudgetExceeded(std::numeric_limits<std::uint64_t>::max(), max_words);
  if (*total > max_words) throw BudgetExceeded(*total, max_words);
  return *total;
}

Word Word::unpack(PackedIndex index, const Alphabet& alphabet, int n) {
  std::vector<Symbol> symbols(static_cast<std::size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    symbols[static_cast<std::size_t>(k)] = static_cast<Symbol>(index % alphabet.size());
    index /= alphabet.size();
  }
  return Word(std::move(symbols));
}

Word Word::prefix(std::size_t k) const {
  if (k > symbols_.size()) throw DomainError("prefix longer than word");
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(k)));
}

PackedIndex Word::pack(const Alphabet& alphabet) const {
  PackedIndex index = 0;
  for (Symbol s : symbols_) index = index * alphabet.size() + s;
  return index;
}

void Word::validate(const Alphabet& alphabet) const {
  for (std::size_t k = 0; k < symbols_.size(); ++k) {
    if (symbols_[k] >= alphabet.size()) {
      throw DomainError("symbol " + std::to_string(symbols_[k]) + " at position " +
                        std::to_string(k + 1) + " is outside an alphabet of size " +
                        std::to_string(alphabet.size()));
    }
  }
}

std::string Word::to_string() const {
  bool wide = false;
  for (Symbol s : symbols_) wide = wide || s >= 10;
  std::string out;
  for (std::size_t k = 0; k < symbols_.size(); ++k) {
    if (wide && k > 0) out += ',';
    out += std::to_string(symbols_[k]);
  }
  return out;
}

Word shift_word(const Word& w) { return shift_word(w, 1); }

Word shift_word(const Word& w, std::size_t j) {
  if (j > w.length() || (j > 0 && w.empty())) {
    throw DomainError("cannot shift a word of length " + std::to_string(w.length()) + " by " +
                      std::to_string(j));
  }
  const auto& s = w.symbols();
  return Word(std::vector<Symbol>(s.begin() + static_cast<std::ptrdiff_t>(j), s.end()));
}

Word concat(const Word& i, const Word& j) {
  std::vector<Symbol> out = i.symbols();
  out.insert(out.end(), j.symbols().begin(), j.symbols().end());
  return Word(std::move(out));
}

double word_metric(const Word& i, const Word& j) {
  if (i.length() != j.length()) throw DomainError("word_metric needs words of equal length");
  for (std::size_t k = 0; k < i.length(); ++k) {
    if (i[k] != j[k]) return std::ldexp(1.0, -static_cast<int>(k));
  }
  return 0.0;
}

WordStream::WordStream(const Alphabet& alphabet, int n, EnumerationBudget budget)
    : alphabet_(alphabet),
      current_(static_cast<std::size_t>(n < 0 ? 0 : n), 0),
      total_(budget.check(alphabet, n)) {}

bool WordStream::next(Word& out) {
  if (emitted_ == total_) return false;
  if (emitted_ > 0) {
    // odometer increment, last symbol fastest
    for (std::size_t k = current_.size(); k-- > 0;) {
      if (++current_[k] < alphabet_.size()) break;
      current_[k] = 0;
    }
  }
  ++emitted_;
  out = Word(current_);
  return true;
}

std::vector<Word> words_of_length(const Alphabet& alphabet, int n, EnumerationBudget budget) {
  WordStream stream(alphabet, n, budget);
  std::vector<Word> out;
  out.reserve(stream.total());
  Word w;
  while (stream.next(w)) out.push_back(w);
  return out;
}

}  // namespace affdim
