#pragma once

#include <any>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "speechkit/yaml.hpp"

namespace speechkit::conf {

struct ResolvedValue;

/// Sequence of resolved values; `tuple` marks the immutable `!tuple` form.
struct ResolvedList {
  std::vector<ResolvedValue> items;
  bool tuple = false;
};

using ResolvedMap = SmallMap<ResolvedValue>;

/// Factory signature: positional + keyword arguments -> opaque product.
/// A factory may return a ResolvedValue wrapped in the any; `!apply`
/// unwraps it into the plain value.
class FactoryRegistry;
struct Constructed;
struct Deferred;

struct ResolvedValue {
  std::variant<Scalar, std::shared_ptr<ResolvedList>, std::shared_ptr<ResolvedMap>,
               std::shared_ptr<Constructed>, std::shared_ptr<Deferred>>
      value;

  ResolvedValue() : value(Scalar{std::monostate{}}) {}
  explicit ResolvedValue(Scalar s) : value(std::move(s)) {}

  bool is_scalar() const { return value.index() == 0; }
  const Scalar& scalar() const { return std::get<Scalar>(value); }
  bool is_list() const { return value.index() == 1; }
  const ResolvedList& list() const { return *std::get<std::shared_ptr<ResolvedList>>(value); }
  ResolvedList& list() { return *std::get<std::shared_ptr<ResolvedList>>(value); }
  bool is_map() const { return value.index() == 2; }
  const ResolvedMap& map() const { return *std::get<std::shared_ptr<ResolvedMap>>(value); }
  ResolvedMap& map() { return *std::get<std::shared_ptr<ResolvedMap>>(value); }
  bool is_constructed() const { return value.index() == 3; }
  const Constructed& constructed() const { return *std::get<std::shared_ptr<Constructed>>(value); }
  bool is_deferred() const { return value.index() == 4; }
  const Deferred& deferred() const { return *std::get<std::shared_ptr<Deferred>>(value); }

  static ResolvedValue make_list(ResolvedList l);
  static ResolvedValue make_map(ResolvedMap m);

  /// Structural deep copy sharing no mutable state with the source;
  /// Constructed products are re-created by re-invoking their factory.
  ResolvedValue deep_copy() const;

  /// Structural equality (Constructed compares factory id + args).
  friend bool operator==(const ResolvedValue& a, const ResolvedValue& b);
};

using FactoryFn =
    std::function<std::any(const ResolvedList& positional, const ResolvedMap& keyword)>;

struct Constructed {
  std::string factory_id;
  ResolvedList positional;
  ResolvedMap keyword;
  std::any product;
  FactoryFn factory;  // retained so deep copies can re-construct
};

struct Deferred {
  std::string target;
  ResolvedList positional;
  ResolvedMap keyword;
};

/// Product of a `!name` tag: the factory with its default arguments
/// bound. Extra positional arguments append, extra keyword arguments
/// override the bound ones.
struct CurriedFactory {
  std::string factory_id;
  FactoryFn factory;
  ResolvedList bound_positional;
  ResolvedMap bound_keyword;

  std::any operator()(const ResolvedList& extra_positional, const ResolvedMap& extra_keyword) const;
};

/// Write-once map from dotted target path to factory function.
class FactoryRegistry {
 public:
  void register_factory(const std::string& id, FactoryFn fn);
  const FactoryFn* find(const std::string& id) const;

 private:
  SmallMap<FactoryFn> factories_;
};

/// Ordered (dotted key path, raw value string) pairs; later entries win.
struct OverrideSet {
  std::vector<std::pair<std::string, std::string>> entries;

  /// Parses `--a.b=value` tokens; anything else throws.
  static OverrideSet from_args(const std::vector<std::string>& args);
};

/// New tree with the addressed scalars replaced. Paths traverse Mapping
/// nodes only; the target must hold a Scalar.
ConfigNode apply_overrides(const ConfigNode& root, const OverrideSet& overrides);

/// Reference-expression evaluation. Placeholders name top-level config
/// keys; a bare `<key>` returns the referenced value as-is, anything
/// composite must evaluate to a scalar.
ResolvedValue eval_ref_expr(const std::string& expr,
                            const std::function<const ResolvedValue*(const std::string&)>& env);

/// Resolve all top-level keys in dependency order (ties broken by file
/// order). See the tag semantics on TagKind.
ResolvedMap resolve(const ConfigNode& root, const FactoryRegistry& registry);

/// Canonical YAML rendering of a resolved map. Deferred nodes render as
/// `!deferred:<target> {args...}`, Constructed as `!constructed:<id> {args...}`,
/// tuples as `!tuple (...)`.
std::string dump_resolved(const ResolvedMap& resolved);

}  // namespace speechkit::conf
