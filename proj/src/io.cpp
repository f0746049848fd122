#include "affdim/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "affdim/affine.hpp"
#include "affdim/cylinder.hpp"
#include "affdim/equilibrium.hpp"

namespace affdim {

namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the (index+1)-th occurrence of "key", or 0 when absent.
int line_of_key(const std::string& text, const std::string& key, std::size_t index) {
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = 0;
  for (std::size_t seen = 0;; ++seen) {
    pos = text.find(needle, pos);
    if (pos == std::string::npos) return 0;
    if (seen == index) return line_of_offset(text, pos);
    pos += needle.size();
  }
}

[[noreturn]] void fail(const std::string& where, int line, const std::string& what) {
  std::string msg = where;
  if (line > 0) msg += ":" + std::to_string(line);
  throw ParseError(msg + ": " + what);
}

double number_at(const json& v, const std::string& where, int line, const std::string& what) {
  if (!v.is_number()) fail(where, line, what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, line, what + " must be finite");
  return x;
}

AffineIFS parse_ifs_impl(const std::string& text, const std::string& where) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(where, 1, "top level must be an object");
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
    fail(where, line_of_key(text, "dimension", 0), "\"dimension\" must be an integer");
  }
  const int d = doc["dimension"].get<int>();
  if (d < 1 || d > kMaxDim) {
    fail(where, line_of_key(text, "dimension", 0), "dimension must lie in 1.." + std::to_string(kMaxDim));
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail(where, line_of_key(text, "name", 0), "\"name\" must be a string");
    name = doc["name"].get<std::string>();
  }
  if (!doc.contains("maps") || !doc["maps"].is_array()) fail(where, line_of_key(text, "maps", 0), "\"maps\" must be an array");

  std::vector<AffineMap> maps;
  const auto& arr = doc["maps"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& m = arr[i];
    const std::string label = "map " + std::to_string(i);
    const int mline = line_of_key(text, "matrix", i);
    if (!m.is_object() || !m.contains("matrix") || !m["matrix"].is_array()) {
      fail(where, mline, label + ": \"matrix\" must be an array of rows");
    }
    const auto& rows = m["matrix"];
    if (static_cast<int>(rows.size()) != d) {
      fail(where, mline, label + ": matrix has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(d));
    }
    Matrix a(d);
    for (int r = 0; r < d; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != d) {
        fail(where, mline, label + ": matrix row " + std::to_string(r) + " has length " +
                               std::to_string(row.is_array() ? row.size() : 0) + ", expected " + std::to_string(d));
      }
      for (int c = 0; c < d; ++c) a(r, c) = number_at(row[static_cast<std::size_t>(c)], where, mline, label + " matrix entry");
    }
    const int tline = line_of_key(text, "translation", i);
    if (!m.contains("translation") || !m["translation"].is_array() || static_cast<int>(m["translation"].size()) != d) {
      fail(where, tline, label + ": \"translation\" must be an array of length " + std::to_string(d));
    }
    std::vector<double> shift;
    for (const auto& v : m["translation"]) shift.push_back(number_at(v, where, tline, label + " translation entry"));
    maps.push_back({a, std::move(shift)});
  }
  if (maps.empty()) fail(where, line_of_key(text, "maps", 0), "\"maps\" is empty");
  return AffineIFS(name, d, std::move(maps));
}

std::uint64_t checksum_fields(const std::string& fields) {
  Fnv1a h;
  h.bytes(fields.data(), fields.size());
  return h.digest();
}

std::string record_fields(const PartitionKey& key, double value) {
  return format_hex(key.cf_hash) + " " + format_hex(key.t_bits) + " " + std::to_string(key.n) + " " +
         format_hex(std::bit_cast<std::uint64_t>(value));
}

}  // namespace

AffineIFS parse_ifs(const std::string& json_text) { return parse_ifs_impl(json_text, "<string>"); }

AffineIFS parse_ifs_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  AffineIFS ifs = parse_ifs_impl(text, path.string());
  const auto report = validate_ifs(ifs);
  if (!report.ok()) {
    std::string msg = path.string() + ": invalid IFS";
    for (const auto& e : report.errors) {
      msg += "; " + e;
      // "map i: ..." -> anchor to that map's matrix line
      if (e.rfind("map ", 0) == 0) {
        const auto idx = std::stoul(e.substr(4));
        if (const int line = line_of_key(text, "matrix", idx); line > 0) msg += " (line " + std::to_string(line) + ")";
      }
    }
    throw ParseError(msg);
  }
  return ifs;
}

std::string serialize_ifs(const AffineIFS& ifs) {
  json doc;
  doc["name"] = ifs.name();
  doc["dimension"] = ifs.dim();
  doc["maps"] = json::array();
  for (const auto& m : ifs.maps()) {
    json rows = json::array();
    for (int r = 0; r < ifs.dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < ifs.dim(); ++c) row.push_back(m.linear(r, c));
      rows.push_back(row);
    }
    doc["maps"].push_back({{"matrix", rows}, {"translation", m.translation}});
  }
  return doc.dump(2) + "\n";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void KeyValueReport::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

std::string KeyValueReport::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

KeyValueReport KeyValueReport::parse(const std::string& text) {
  KeyValueReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(" = ");
    if (pos == std::string::npos) continue;
    r.add(line.substr(0, pos), line.substr(pos + 3));
  }
  return r;
}

std::optional<std::string> KeyValueReport::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::vector<double> parse_t_grid(const std::string& spec) {
  std::vector<double> grid;
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw DomainError("bad number '" + s + "' in t grid");
    }
    if (used != s.size() || !std::isfinite(v)) throw DomainError("bad number '" + s + "' in t grid");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw DomainError("t grid must be A:B:STEP");
    const double a = to_double(parts[0]);
    const double b = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0) || b < a) throw DomainError("t grid A:B:STEP needs A <= B and STEP > 0");
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long k = 0; k <= count; ++k) grid.push_back(a + static_cast<double>(k) * step);
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(to_double(item));
  }
  if (grid.empty()) throw DomainError("t grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw DomainError("t grid must be strictly ascending");
  for (double t : grid)
    if (t < 0) throw DomainError("t grid values must be non-negative");
  return grid;
}

PersistentCache::PersistentCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string hash, tbits, n, value, check, extra;
    if (!(ls >> hash >> tbits >> n >> value >> check) || (ls >> extra)) {
      warnings_.push_back(path_.string() + ":" + std::to_string(lineno) + ": malformed cache record ignored");
      continue;
    }
    try {
      const std::string fields = hash + " " + tbits + " " + n + " " + value;
      if (std::stoull(check, nullptr, 16) != checksum_fields(fields) || hash.size() != 16 || tbits.size() != 16 ||
          value.size() != 16) {
        warnings_.push_back(path_.string() + ":" + std::to_string(lineno) + ": corrupted cache record ignored");
        continue;
      }
      PartitionKey key{std::stoull(hash, nullptr, 16), std::stoull(tbits, nullptr, 16), std::stoi(n)};
      entries_[key] = std::bit_cast<double>(static_cast<std::uint64_t>(std::stoull(value, nullptr, 16)));
    } catch (const std::exception&) {
      warnings_.push_back(path_.string() + ":" + std::to_string(lineno) + ": malformed cache record ignored");
    }
  }
}

std::optional<double> PersistentCache::get(const PartitionKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PersistentCache::put(const PartitionKey& key, double value) {
  // A torn last line (no newline) would swallow the next record; start fresh.
  bool needs_newline = false;
  {
    std::ifstream in(path_, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      needs_newline = in.get() != '\n';
    }
  }
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error(path_.string() + ": cannot append to cache");
  const std::string fields = record_fields(key, value);
  if (needs_newline) out << '\n';
  out << fields << ' ' << format_hex(checksum_fields(fields)) << '\n';
  out.flush();
  entries_[key] = value;
}

void PersistentCache::load_into(PartitionCache& cache) const {
  for (const auto& [k, v] : entries_) cache.put(k, v);
}

std::size_t PersistentCache::store_from(const PartitionCache& cache) {
  std::size_t added = 0;
  for (const auto& [k, v] : cache.entries()) {
    if (entries_.count(k) != 0) continue;
    put(k, v);
    ++added;
  }
  return added;
}

}  // namespace affdim
