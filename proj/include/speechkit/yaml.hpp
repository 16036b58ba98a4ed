#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "speechkit/common.hpp"

namespace speechkit::conf {

/// Tags recognized by the configuration language. Any other `!`-prefixed
/// tag is a parse error.
enum class TagKind { New, Name, Ref, Copy, Tuple, Include, Apply };

std::string tag_kind_name(TagKind kind);

/// Parsed configuration tree. Tagged nodes hold their argument subtree
/// behind a shared (immutable after parse) pointer so trees stay cheap
/// to copy; `!ref`/`!copy` carry the raw expression text instead.
struct ConfigNode {
  struct Sequence {
    std::vector<ConfigNode> items;
    bool operator==(const Sequence&) const = default;
  };
  struct Mapping {
    SmallMap<ConfigNode> entries;
    bool operator==(const Mapping&) const = default;
  };
  struct Tagged {
    TagKind kind;
    std::string target;  // dotted path for new/name/apply, file path for include
    std::shared_ptr<const ConfigNode> args;  // null when the tag has no args
    bool operator==(const Tagged& o) const;
  };
  struct RefExpr {
    std::string expr;
    bool copy = false;  // true for !copy
    bool operator==(const RefExpr&) const = default;
  };

  std::variant<Scalar, Sequence, Mapping, Tagged, RefExpr> value;
  int line = 0;
  int col = 0;

  bool is_scalar() const { return std::holds_alternative<Scalar>(value); }
  bool is_sequence() const { return std::holds_alternative<Sequence>(value); }
  bool is_mapping() const { return std::holds_alternative<Mapping>(value); }

  const Scalar& scalar() const { return std::get<Scalar>(value); }
  const Sequence& sequence() const { return std::get<Sequence>(value); }
  const Mapping& mapping() const { return std::get<Mapping>(value); }
  Mapping& mapping() { return std::get<Mapping>(value); }

  /// Structural equality ignoring source positions.
  friend bool operator==(const ConfigNode& a, const ConfigNode& b) {
    return a.value == b.value;
  }
};

/// Parse a config document. `base_dir` anchors `!include` resolution;
/// included files are parsed and spliced in at parse time (depth <= 32,
/// cycles detected on canonical absolute paths).
ConfigNode parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Parse the file at `path` (includes resolved relative to its directory).
ConfigNode parse_config_file(const std::filesystem::path& path);

/// Scalar typing rules shared by the file parser, overrides and manifests:
/// null/~/empty, true/false (any case), decimal integers, floats,
/// otherwise string. Quoted input always yields a string.
Scalar parse_scalar_token(const std::string& raw);

/// True when `raw` is an integer or float lexeme under the rules above.
bool looks_numeric(const std::string& raw);

/// Canonical block-style rendering; parse(dump(t)) == t for tagless trees.
std::string dump_config(const ConfigNode& node);

}  // namespace speechkit::conf
