#include "speechkit/hyperconf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace speechkit::conf {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t'; }

// ── Reference expressions ───────────────────────────────────────────────────

struct ExprToken {
  enum Kind { Number, String, Placeholder, Op, LParen, RParen, End } kind;
  Scalar number;       // for Number
  std::string text;    // placeholder key, string payload or operator char
};

class ExprLexer {
 public:
  explicit ExprLexer(const std::string& expr) : s_(expr) {}

  ExprToken next() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    if (pos_ >= s_.size()) return {ExprToken::End, {}, ""};
    char c = s_[pos_];
    if (c == '(') { ++pos_; return {ExprToken::LParen, {}, "("}; }
    if (c == ')') { ++pos_; return {ExprToken::RParen, {}, ")"}; }
    if (c == '+' || c == '-' || c == '*' || c == '/') {
      ++pos_;
      return {ExprToken::Op, {}, std::string(1, c)};
    }
    if (c == '<') {
      std::size_t end = s_.find('>', pos_);
      if (end == std::string::npos) throw Error("unterminated placeholder in ref expression: " + s_);
      std::string key = s_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      if (key.empty()) throw Error("empty placeholder in ref expression: " + s_);
      return {ExprToken::Placeholder, {}, key};
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      std::string out;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != quote) {
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) throw Error("unterminated string literal in ref expression: " + s_);
      ++pos_;
      return {ExprToken::String, {}, out};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
        ++pos_;
      }
      std::string lexeme = s_.substr(start, pos_ - start);
      Scalar v = parse_scalar_token(lexeme);
      if (!scalar_is_number(v)) throw Error("bad numeric literal '" + lexeme + "' in ref expression: " + s_);
      return {ExprToken::Number, v, lexeme};
    }
    throw Error("unexpected character '" + std::string(1, c) + "' in ref expression: " + s_);
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

// Arithmetic scalar: int64, double or string under the expression rules.
struct ExprValue {
  Scalar v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_number() const { return scalar_is_number(v); }
};

ExprValue apply_op(char op, const ExprValue& a, const ExprValue& b, const std::string& expr) {
  if (a.is_string() || b.is_string()) {
    if (op == '+' && a.is_string() && b.is_string()) {
      return ExprValue{Scalar{std::get<std::string>(a.v) + std::get<std::string>(b.v)}};
    }
    throw Error("cannot apply '" + std::string(1, op) + "' to " + scalar_type_name(a.v) + " and " +
                scalar_type_name(b.v) + " in ref expression: " + expr);
  }
  if (!a.is_number() || !b.is_number()) {
    throw Error("cannot apply '" + std::string(1, op) + "' to " + scalar_type_name(a.v) + " and " +
                scalar_type_name(b.v) + " in ref expression: " + expr);
  }
  if (a.is_int() && b.is_int()) {
    std::int64_t x = std::get<std::int64_t>(a.v);
    std::int64_t y = std::get<std::int64_t>(b.v);
    std::int64_t r = 0;
    switch (op) {
      case '+':
        if (!__builtin_add_overflow(x, y, &r)) return ExprValue{Scalar{r}};
        break;
      case '-':
        if (!__builtin_sub_overflow(x, y, &r)) return ExprValue{Scalar{r}};
        break;
      case '*':
        if (!__builtin_mul_overflow(x, y, &r)) return ExprValue{Scalar{r}};
        break;
      case '/': {
        if (y == 0) throw Error("division by zero in ref expression: " + expr);
        if (x % y == 0) return ExprValue{Scalar{x / y}};
        return ExprValue{Scalar{static_cast<double>(x) / static_cast<double>(y)}};
      }
    }
    // integer overflow: promote to double
    double xd = static_cast<double>(x), yd = static_cast<double>(y);
    switch (op) {
      case '+': return ExprValue{Scalar{xd + yd}};
      case '-': return ExprValue{Scalar{xd - yd}};
      default: return ExprValue{Scalar{xd * yd}};
    }
  }
  double x = scalar_as_double(a.v);
  double y = scalar_as_double(b.v);
  switch (op) {
    case '+': return ExprValue{Scalar{x + y}};
    case '-': return ExprValue{Scalar{x - y}};
    case '*': return ExprValue{Scalar{x * y}};
    case '/':
      if (y == 0.0) throw Error("division by zero in ref expression: " + expr);
      return ExprValue{Scalar{x / y}};
  }
  throw Error("bad operator in ref expression: " + expr);
}

class ExprParser {
 public:
  ExprParser(const std::string& expr,
             const std::function<const ResolvedValue*(const std::string&)>& env)
      : expr_(expr), env_(env), lexer_(expr) {
    advance();
  }

  ExprValue parse() {
    ExprValue v = parse_sum();
    if (cur_.kind != ExprToken::End) {
      throw Error("unexpected token after expression: " + expr_);
    }
    return v;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  ExprValue parse_sum() {
    ExprValue acc = parse_term();
    while (cur_.kind == ExprToken::Op && (cur_.text == "+" || cur_.text == "-")) {
      char op = cur_.text[0];
      advance();
      acc = apply_op(op, acc, parse_term(), expr_);
    }
    return acc;
  }

  ExprValue parse_term() {
    ExprValue acc = parse_factor();
    while (cur_.kind == ExprToken::Op && (cur_.text == "*" || cur_.text == "/")) {
      char op = cur_.text[0];
      advance();
      acc = apply_op(op, acc, parse_factor(), expr_);
    }
    return acc;
  }

  ExprValue parse_factor() {
    if (cur_.kind == ExprToken::Op && cur_.text == "-") {
      advance();
      ExprValue v = parse_factor();
      return apply_op('-', ExprValue{Scalar{std::int64_t{0}}}, v, expr_);
    }
    if (cur_.kind == ExprToken::Op && cur_.text == "+") {
      advance();
      return parse_factor();
    }
    if (cur_.kind == ExprToken::Number) {
      ExprValue v{cur_.number};
      advance();
      return v;
    }
    if (cur_.kind == ExprToken::String) {
      ExprValue v{Scalar{cur_.text}};
      advance();
      return v;
    }
    if (cur_.kind == ExprToken::Placeholder) {
      const ResolvedValue* rv = env_(cur_.text);
      if (!rv) throw Error("undefined placeholder <" + cur_.text + "> in ref expression: " + expr_);
      if (!rv->is_scalar()) {
        throw Error("placeholder <" + cur_.text +
                    "> refers to a non-scalar value inside a composite ref expression: " + expr_);
      }
      const Scalar& s = rv->scalar();
      if (!scalar_is_number(s) && !std::holds_alternative<std::string>(s)) {
        throw Error("placeholder <" + cur_.text + "> has type " + scalar_type_name(s) +
                    ", not usable in ref expression: " + expr_);
      }
      ExprValue v{s};
      advance();
      return v;
    }
    if (cur_.kind == ExprToken::LParen) {
      advance();
      ExprValue v = parse_sum();
      if (cur_.kind != ExprToken::RParen) throw Error("missing ')' in ref expression: " + expr_);
      advance();
      return v;
    }
    throw Error("expected a value in ref expression: " + expr_);
  }

  const std::string& expr_;
  const std::function<const ResolvedValue*(const std::string&)>& env_;
  ExprLexer lexer_;
  ExprToken cur_;
};

// Bare `<key>` expressions (optionally whitespace-padded) pass the
// referenced value through unchanged.
bool bare_placeholder(const std::string& expr, std::string& key) {
  std::size_t a = 0, b = expr.size();
  while (a < b && is_space(expr[a])) ++a;
  while (b > a && is_space(expr[b - 1])) --b;
  if (b - a < 3 || expr[a] != '<' || expr[b - 1] != '>') return false;
  key = expr.substr(a + 1, b - a - 2);
  return key.find('<') == std::string::npos && key.find('>') == std::string::npos;
}

void collect_placeholders(const std::string& expr, std::vector<std::string>& out) {
  std::size_t pos = 0;
  while ((pos = expr.find('<', pos)) != std::string::npos) {
    std::size_t end = expr.find('>', pos);
    if (end == std::string::npos) break;
    out.push_back(expr.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
}

void collect_refs(const ConfigNode& node, std::vector<std::string>& out) {
  if (const auto* ref = std::get_if<ConfigNode::RefExpr>(&node.value)) {
    collect_placeholders(ref->expr, out);
    return;
  }
  if (node.is_sequence()) {
    for (const auto& item : node.sequence().items) collect_refs(item, out);
    return;
  }
  if (node.is_mapping()) {
    for (const auto& [k, v] : node.mapping().entries) collect_refs(v, out);
    return;
  }
  if (const auto* tagged = std::get_if<ConfigNode::Tagged>(&node.value)) {
    if (tagged->args) collect_refs(*tagged->args, out);
  }
}

// ── Node resolution ─────────────────────────────────────────────────────────

struct Resolver {
  const FactoryRegistry& registry;
  ResolvedMap env;

  const ResolvedValue* lookup(const std::string& key) const { return env.find(key); }

  ResolvedValue resolve_node(const ConfigNode& node, const std::string& key_path) {
    if (node.is_scalar()) return ResolvedValue{node.scalar()};
    if (node.is_sequence()) {
      ResolvedList list;
      for (std::size_t i = 0; i < node.sequence().items.size(); ++i) {
        list.items.push_back(
            resolve_node(node.sequence().items[i], key_path + "[" + std::to_string(i) + "]"));
      }
      return ResolvedValue::make_list(std::move(list));
    }
    if (node.is_mapping()) {
      ResolvedMap map;
      for (const auto& [k, v] : node.mapping().entries) {
        map.insert(k, resolve_node(v, key_path + "." + k));
      }
      return ResolvedValue::make_map(std::move(map));
    }
    if (const auto* ref = std::get_if<ConfigNode::RefExpr>(&node.value)) {
      ResolvedValue v = eval_ref_expr(ref->expr, [this](const std::string& k) { return lookup(k); });
      return ref->copy ? v.deep_copy() : v;
    }
    const auto& tagged = std::get<ConfigNode::Tagged>(node.value);
    switch (tagged.kind) {
      case TagKind::Tuple: {
        ResolvedList list;
        list.tuple = true;
        if (tagged.args) {
          for (std::size_t i = 0; i < tagged.args->sequence().items.size(); ++i) {
            list.items.push_back(resolve_node(tagged.args->sequence().items[i],
                                              key_path + "[" + std::to_string(i) + "]"));
          }
        }
        return ResolvedValue::make_list(std::move(list));
      }
      case TagKind::New:
      case TagKind::Name:
      case TagKind::Apply: {
        ResolvedList positional;
        ResolvedMap keyword;
        if (tagged.args) {
          if (tagged.args->is_mapping()) {
            for (const auto& [k, v] : tagged.args->mapping().entries) {
              keyword.insert(k, resolve_node(v, key_path + "." + k));
            }
          } else if (tagged.args->is_sequence()) {
            for (std::size_t i = 0; i < tagged.args->sequence().items.size(); ++i) {
              positional.items.push_back(resolve_node(tagged.args->sequence().items[i],
                                                      key_path + "[" + std::to_string(i) + "]"));
            }
          } else if (!(tagged.args->is_scalar() && scalar_is_null(tagged.args->scalar()))) {
            positional.items.push_back(resolve_node(*tagged.args, key_path));
          }
        }
        const FactoryFn* factory = registry.find(tagged.target);
        if (!factory) {
          if (tagged.kind == TagKind::Apply) {
            throw Error("!apply target '" + tagged.target + "' is not registered (at " + key_path + ")");
          }
          auto d = std::make_shared<Deferred>();
          d->target = tagged.target;
          d->positional = std::move(positional);
          d->keyword = std::move(keyword);
          ResolvedValue v;
          v.value = std::move(d);
          return v;
        }
        if (tagged.kind == TagKind::Name) {
          auto c = std::make_shared<Constructed>();
          c->factory_id = tagged.target;
          c->positional = positional;
          c->keyword = keyword;
          c->factory = *factory;
          c->product = CurriedFactory{tagged.target, *factory, std::move(positional), std::move(keyword)};
          ResolvedValue v;
          v.value = std::move(c);
          return v;
        }
        std::any product;
        try {
          product = (*factory)(positional, keyword);
        } catch (const std::exception& e) {
          throw Error("factory '" + tagged.target + "' failed at " + key_path + ": " + e.what());
        }
        if (tagged.kind == TagKind::Apply) {
          if (const auto* rv = std::any_cast<ResolvedValue>(&product)) return *rv;
        }
        auto c = std::make_shared<Constructed>();
        c->factory_id = tagged.target;
        c->positional = std::move(positional);
        c->keyword = std::move(keyword);
        c->factory = *factory;
        c->product = std::move(product);
        ResolvedValue v;
        v.value = std::move(c);
        return v;
      }
      case TagKind::Include:
        throw Error("internal: unexpanded !include node at " + key_path);
      default:
        throw Error("internal: unexpected tag at " + key_path);
    }
  }
};

void dump_resolved_value(const ResolvedValue& v, std::string& out, int indent, bool at_line_start);

std::string flow_args(const ResolvedList& positional, const ResolvedMap& keyword);

std::string flow_value(const ResolvedValue& v) {
  if (v.is_scalar()) {
    const Scalar& s = v.scalar();
    if (const auto* str = std::get_if<std::string>(&s)) {
      std::string dumped = dump_config(ConfigNode{Scalar{*str}, 0, 0});
      if (!dumped.empty() && dumped.back() == '\n') dumped.pop_back();
      return dumped;
    }
    return scalar_to_string(s);
  }
  if (v.is_list()) {
    std::string out = v.list().tuple ? "!tuple (" : "[";
    bool first = true;
    for (const auto& item : v.list().items) {
      if (!first) out += ", ";
      first = false;
      out += flow_value(item);
    }
    out += v.list().tuple ? ")" : "]";
    return out;
  }
  if (v.is_map()) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, item] : v.map()) {
      if (!first) out += ", ";
      first = false;
      out += k + ": " + flow_value(item);
    }
    out += "}";
    return out;
  }
  if (v.is_deferred()) {
    const auto& d = v.deferred();
    return "!deferred:" + d.target + " " + flow_args(d.positional, d.keyword);
  }
  const auto& c = v.constructed();
  return "!constructed:" + c.factory_id + " " + flow_args(c.positional, c.keyword);
}

std::string flow_args(const ResolvedList& positional, const ResolvedMap& keyword) {
  std::string out = "{";
  bool first = true;
  if (!positional.items.empty()) {
    out += "args: [";
    bool f2 = true;
    for (const auto& item : positional.items) {
      if (!f2) out += ", ";
      f2 = false;
      out += flow_value(item);
    }
    out += "]";
    first = false;
  }
  for (const auto& [k, item] : keyword) {
    if (!first) out += ", ";
    first = false;
    out += k + ": " + flow_value(item);
  }
  out += "}";
  return out;
}

void dump_resolved_value(const ResolvedValue& v, std::string& out, int indent, bool at_line_start) {
  if (v.is_scalar()) {
    if (!at_line_start) out += ' ';
    out += flow_value(v);
    out += '\n';
    return;
  }
  if (v.is_list() && !v.list().tuple) {
    if (v.list().items.empty()) {
      out += at_line_start ? "[]\n" : " []\n";
      return;
    }
    if (!at_line_start) out += '\n';
    const std::string pad(at_line_start ? indent : indent + 2, ' ');
    for (const auto& item : v.list().items) {
      out += pad;
      out += '-';
      dump_resolved_value(item, out, at_line_start ? indent : indent + 2, false);
    }
    return;
  }
  if (v.is_map()) {
    if (v.map().empty()) {
      out += at_line_start ? "{}\n" : " {}\n";
      return;
    }
    if (!at_line_start) out += '\n';
    const std::string pad(at_line_start ? indent : indent + 2, ' ');
    for (const auto& [k, item] : v.map()) {
      out += pad;
      out += k;
      out += ':';
      dump_resolved_value(item, out, at_line_start ? indent : indent + 2, false);
    }
    return;
  }
  // tuples, deferred, constructed: flow form
  if (!at_line_start) out += ' ';
  out += flow_value(v);
  out += '\n';
}

}  // namespace

ResolvedValue ResolvedValue::make_list(ResolvedList l) {
  ResolvedValue v;
  v.value = std::make_shared<ResolvedList>(std::move(l));
  return v;
}

ResolvedValue ResolvedValue::make_map(ResolvedMap m) {
  ResolvedValue v;
  v.value = std::make_shared<ResolvedMap>(std::move(m));
  return v;
}

ResolvedValue ResolvedValue::deep_copy() const {
  if (is_scalar()) return *this;
  if (is_list()) {
    ResolvedList copy;
    copy.tuple = list().tuple;
    for (const auto& item : list().items) copy.items.push_back(item.deep_copy());
    return make_list(std::move(copy));
  }
  if (is_map()) {
    ResolvedMap copy;
    for (const auto& [k, item] : map()) copy.insert(k, item.deep_copy());
    return make_map(std::move(copy));
  }
  if (is_deferred()) {
    auto d = std::make_shared<Deferred>();
    d->target = deferred().target;
    for (const auto& item : deferred().positional.items) d->positional.items.push_back(item.deep_copy());
    for (const auto& [k, item] : deferred().keyword) d->keyword.insert(k, item.deep_copy());
    ResolvedValue v;
    v.value = std::move(d);
    return v;
  }
  const Constructed& src = constructed();
  auto c = std::make_shared<Constructed>();
  c->factory_id = src.factory_id;
  for (const auto& item : src.positional.items) c->positional.items.push_back(item.deep_copy());
  for (const auto& [k, item] : src.keyword) c->keyword.insert(k, item.deep_copy());
  c->factory = src.factory;
  if (src.product.type() == typeid(CurriedFactory)) {
    c->product = CurriedFactory{c->factory_id, c->factory, c->positional, c->keyword};
  } else if (src.factory) {
    // fresh product from the same factory and copied arguments
    c->product = src.factory(c->positional, c->keyword);
  } else {
    c->product = src.product;
  }
  ResolvedValue v;
  v.value = std::move(c);
  return v;
}

bool operator==(const ResolvedValue& a, const ResolvedValue& b) {
  if (a.value.index() != b.value.index()) return false;
  if (a.is_scalar()) return a.scalar() == b.scalar();
  if (a.is_list()) {
    return a.list().tuple == b.list().tuple && a.list().items == b.list().items;
  }
  if (a.is_map()) return a.map() == b.map();
  if (a.is_deferred()) {
    const auto& x = a.deferred();
    const auto& y = b.deferred();
    return x.target == y.target && x.positional.items == y.positional.items && x.keyword == y.keyword;
  }
  const auto& x = a.constructed();
  const auto& y = b.constructed();
  return x.factory_id == y.factory_id && x.positional.items == y.positional.items &&
         x.keyword == y.keyword;
}

std::any CurriedFactory::operator()(const ResolvedList& extra_positional,
                                    const ResolvedMap& extra_keyword) const {
  ResolvedList positional = bound_positional;
  for (const auto& item : extra_positional.items) positional.items.push_back(item);
  ResolvedMap keyword = bound_keyword;
  for (const auto& [k, v] : extra_keyword) keyword.set(k, v);
  return factory(positional, keyword);
}

void FactoryRegistry::register_factory(const std::string& id, FactoryFn fn) {
  if (!factories_.insert(id, std::move(fn))) {
    throw Error("factory already registered: " + id);
  }
}

const FactoryFn* FactoryRegistry::find(const std::string& id) const { return factories_.find(id); }

OverrideSet OverrideSet::from_args(const std::vector<std::string>& args) {
  OverrideSet set;
  for (const auto& arg : args) {
    if (arg.rfind("--", 0) != 0) {
      throw Error("bad override '" + arg + "': expected --key=value");
    }
    std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 2) {
      throw Error("bad override '" + arg + "': expected --key=value");
    }
    set.entries.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  return set;
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t dot = path.find('.', start);
    if (dot == std::string::npos) dot = path.size();
    parts.push_back(path.substr(start, dot - start));
    if (dot == path.size()) break;
    start = dot + 1;
  }
  return parts;
}

void apply_one_override(ConfigNode& root, const std::string& path, const std::string& raw) {
  std::vector<std::string> parts = split_path(path);
  ConfigNode* node = &root;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_mapping()) {
      throw Error("override path '" + path + "' traverses a non-mapping node at '" + parts[i - 1] + "'");
    }
    ConfigNode* child = node->mapping().entries.find(parts[i]);
    if (!child) throw Error("override path not found: " + path);
    node = child;
  }
  if (!node->is_scalar()) {
    throw Error("override target '" + path + "' is not a scalar node");
  }
  node->value = parse_scalar_token(raw);
}

}  // namespace

ConfigNode apply_overrides(const ConfigNode& root, const OverrideSet& overrides) {
  ConfigNode tree = root;  // deep value copy (tag args shared, immutable)
  for (const auto& [path, raw] : overrides.entries) {
    apply_one_override(tree, path, raw);
  }
  return tree;
}

ResolvedValue eval_ref_expr(const std::string& expr,
                            const std::function<const ResolvedValue*(const std::string&)>& env) {
  std::string key;
  if (bare_placeholder(expr, key)) {
    const ResolvedValue* rv = env(key);
    if (!rv) throw Error("undefined placeholder <" + key + "> in ref expression: " + expr);
    return *rv;
  }
  ExprParser parser(expr, env);
  return ResolvedValue{parser.parse().v};
}

ResolvedMap resolve(const ConfigNode& root, const FactoryRegistry& registry) {
  if (!root.is_mapping()) throw Error("resolve: root must be a mapping");
  const auto& entries = root.mapping().entries;

  // dependency edges from placeholder references, restricted to known
  // top-level keys (unknown placeholders fail later with context)
  std::size_t n = entries.size();
  std::vector<std::vector<std::size_t>> deps(n);
  std::unordered_map<std::string, std::size_t> key_index;
  for (std::size_t i = 0; i < n; ++i) key_index.emplace(entries.at_index(i).first, i);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> refs;
    collect_refs(entries.at_index(i).second, refs);
    for (const auto& r : refs) {
      auto it = key_index.find(r);
      if (it != key_index.end()) deps[i].push_back(it->second);
    }
  }

  std::vector<char> resolved(n, 0);
  Resolver resolver{registry, {}};
  std::size_t done = 0;
  while (done < n) {
    bool progressed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (resolved[i]) continue;
      bool ready = true;
      for (std::size_t d : deps[i]) {
        if (!resolved[d]) {
          ready = false;
          break;
        }
      }
      if (!ready) continue;
      const auto& [key, node] = entries.at_index(i);
      resolver.env.insert(key, resolver.resolve_node(node, key));
      resolved[i] = 1;
      ++done;
      progressed = true;
    }
    if (!progressed) {
      std::string cycle;
      for (std::size_t i = 0; i < n; ++i) {
        if (!resolved[i]) {
          if (!cycle.empty()) cycle += ", ";
          cycle += entries.at_index(i).first;
        }
      }
      throw Error("reference cycle among config keys: " + cycle);
    }
  }

  // re-order to file order
  ResolvedMap out;
  for (const auto& [key, node] : entries) {
    out.insert(key, *resolver.env.find(key));
  }
  return out;
}

std::string dump_resolved(const ResolvedMap& resolved) {
  std::string out;
  for (const auto& [key, value] : resolved) {
    out += key;
    out += ':';
    dump_resolved_value(value, out, 0, false);
  }
  if (out.empty()) out = "{}\n";
  return out;
}

}  // namespace speechkit::conf
