#pragma once

// File formats and the command dispatcher behind the affdim CLI.
//
// IFS documents are JSON:
//   { "name": "...", "dimension": d,
//     "maps": [ { "matrix": [[...], ...], "translation": [...] }, ... ] }
//
// Reports are flat "key = value" text; doubles use 17 significant digits.
// Side tables are CSV. Exit codes: 0 success, 1 error, 2 axiom violation.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/pressure.hpp"

namespace affdim {

inline constexpr const char* kToolVersion = "0.1.0";

AffineIFS parse_ifs(const std::string& json_text);
/// Parses and validates; errors name the file plus line or map index.
AffineIFS parse_ifs_file(const std::filesystem::path& path);
std::string serialize_ifs(const AffineIFS& ifs);

/// "%.17g"
std::string format_double(double v);
std::string format_hex(std::uint64_t v);

/// Ordered key = value document.
class KeyValueReport {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }

  std::string str() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  /// Parses the text form back (used by tests and tooling).
  static KeyValueReport parse(const std::string& text);
  std::optional<std::string> get(const std::string& key) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// "A:B:STEP" (inclusive of B up to rounding) or a comma list "t0,t1,...".
/// Throws DomainError if the result is empty or not strictly ascending.
std::vector<double> parse_t_grid(const std::string& spec);

/// Append-only on-disk store of log partition sums. One record per line:
///   <cf hash> <t bits> <n> <value bits> <checksum>
/// hashes and bit patterns in hex, checksum = FNV-1a of the first four
/// fields. Malformed or corrupted lines are skipped with a warning.
class PersistentCache {
 public:
  explicit PersistentCache(std::filesystem::path path);

  std::optional<double> get(const PartitionKey& key) const;
  /// Appends one record and flushes.
  void put(const PartitionKey& key, double value);

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Copies every stored record into `cache`.
  void load_into(PartitionCache& cache) const;
  /// Appends every record of `cache` not yet stored. Returns how many.
  std::size_t store_from(const PartitionCache& cache);

 private:
  std::filesystem::path path_;
  std::map<PartitionKey, double> entries_;
  std::vector<std::string> warnings_;
};

struct RunConfig {
  std::string subcommand;
  std::string ifs_path;
  std::optional<double> t;
  std::optional<std::string> t_grid;
  int n_max = 8;
  int depth = 2;
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir;
  std::optional<std::uint64_t> budget;
  std::string driver = "uniform";
  std::uint64_t samples = 1000;
  std::uint64_t points = 100000;
  std::uint64_t burn_in = 200;
  int resolution = 256;
  int box_first = 2;
  int box_last = 9;
  std::string cache_path;
};

/// Runs one subcommand: dim, pressure, measure, verify, render, boxdim.
/// Reports go to `out` (and to files under out_dir when set); diagnostics
/// that vary between runs (wall time, cache statistics) go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace affdim
