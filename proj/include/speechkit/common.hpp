#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace speechkit {

/// Error type for all domain failures. Messages carry context (file,
/// line/column, key path, ...) built at the throw site.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// ── Logging ─────────────────────────────────────────────────────────────────

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from SPEECHKIT_LOG={error|info|debug}, default info.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_error(std::string_view msg);
void log_info(std::string_view msg);
void log_debug(std::string_view msg);

// ── Scalar ──────────────────────────────────────────────────────────────────

/// Scalar value as it appears in config files and data manifests.
/// monostate is YAML null.
using Scalar = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

bool scalar_is_null(const Scalar& s);
bool scalar_is_number(const Scalar& s);
double scalar_as_double(const Scalar& s);  // throws on non-number
std::string scalar_type_name(const Scalar& s);

/// Canonical text form: null, true/false, decimal integers, shortest
/// round-trip floats (always containing '.' or 'e'), strings verbatim.
std::string scalar_to_string(const Scalar& s);

/// Shortest round-trip rendering of a double, guaranteed to re-parse
/// as a float (never a bare integer lexeme).
std::string format_double(double v);

// ── SmallMap ────────────────────────────────────────────────────────────────

/// Insertion-ordered string-keyed map with O(1) lookup.
template <typename V>
class SmallMap {
 public:
  using value_type = std::pair<std::string, V>;
  using const_iterator = typename std::vector<value_type>::const_iterator;
  using iterator = typename std::vector<value_type>::iterator;

  SmallMap() = default;

  bool insert(std::string key, V value) {
    if (index_.count(key)) return false;
    index_.emplace(key, entries_.size());
    entries_.emplace_back(std::move(key), std::move(value));
    return true;
  }

  /// Insert or overwrite, preserving the original position on overwrite.
  void set(std::string key, V value) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      insert(std::move(key), std::move(value));
    } else {
      entries_[it->second].second = std::move(value);
    }
  }

  const V* find(std::string_view key) const {
    auto it = index_.find(std::string(key));
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }
  V* find(std::string_view key) {
    auto it = index_.find(std::string(key));
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  const V& at(std::string_view key) const {
    const V* v = find(key);
    if (!v) throw Error("key not found: " + std::string(key));
    return *v;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const value_type& at_index(std::size_t i) const { return entries_.at(i); }
  value_type& at_index(std::size_t i) { return entries_.at(i); }

  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }
  iterator begin() { return entries_.begin(); }
  iterator end() { return entries_.end(); }

  friend bool operator==(const SmallMap& a, const SmallMap& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<value_type> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ── Rng ─────────────────────────────────────────────────────────────────────

/// Deterministic RNG with explicit sampling (no use of the standard
/// distributions, whose outputs vary between library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string serialize() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stable seed mixing for deriving per-epoch / per-bucket streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace speechkit
