#include "speechkit/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace speechkit {

namespace {

LogLevel initial_log_level() {
  const char* env = std::getenv("SPEECHKIT_LOG");
  if (!env) return LogLevel::Info;
  std::string v(env);
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

LogLevel& level_ref() {
  static LogLevel level = initial_log_level();
  return level;
}

void emit(const char* tag, std::string_view msg) {
  std::fprintf(stderr, "[%s] %.*s\n", tag, static_cast<int>(msg.size()), msg.data());
}

}  // namespace

LogLevel log_level() { return level_ref(); }
void set_log_level(LogLevel level) { level_ref() = level; }

void log_error(std::string_view msg) {
  if (log_level() >= LogLevel::Error) emit("error", msg);
}
void log_info(std::string_view msg) {
  if (log_level() >= LogLevel::Info) emit("info", msg);
}
void log_debug(std::string_view msg) {
  if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

bool scalar_is_null(const Scalar& s) {
  return std::holds_alternative<std::monostate>(s);
}

bool scalar_is_number(const Scalar& s) {
  return std::holds_alternative<std::int64_t>(s) || std::holds_alternative<double>(s);
}

double scalar_as_double(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&s)) return *d;
  throw Error("expected a numeric scalar, got " + scalar_type_name(s));
}

std::string scalar_type_name(const Scalar& s) {
  switch (s.index()) {
    case 0: return "null";
    case 1: return "boolean";
    case 2: return "integer";
    case 3: return "float";
    case 4: return "string";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, res.ptr);
  if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
      out.find("inf") == std::string::npos && out.find("nan") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::string scalar_to_string(const Scalar& s) {
  switch (s.index()) {
    case 0: return "null";
    case 1: return std::get<bool>(s) ? "true" : "false";
    case 2: return std::to_string(std::get<std::int64_t>(s));
    case 3: return format_double(std::get<double>(s));
    case 4: return std::get<std::string>(s);
  }
  return "";
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error("Rng::below(0)");
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::string Rng::serialize() const {
  std::ostringstream oss;
  oss << gen_;
  if (have_spare_) {
    oss << " 1 " << format_double(spare_);
  } else {
    oss << " 0";
  }
  return oss.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream iss(state);
  iss >> gen_;
  int flag = 0;
  iss >> flag;
  if (iss.fail()) throw Error("corrupt RNG state");
  have_spare_ = flag != 0;
  if (have_spare_) iss >> spare_;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the xor-combined inputs
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace speechkit
