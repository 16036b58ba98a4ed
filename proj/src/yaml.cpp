#include "speechkit/yaml.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace speechkit::conf {

namespace {

constexpr int kMaxIncludeDepth = 32;

struct Line {
  int indent = 0;
  std::string content;  // comment-stripped, right-trimmed
  int number = 0;
};

[[noreturn]] void fail(int line, int col, const std::string& msg) {
  throw Error("config parse error at line " + std::to_string(line) + ", column " +
              std::to_string(col) + ": " + msg);
}

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string rstrip(std::string s) {
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

// Strips a trailing comment: '#' opens a comment at line start or after
// whitespace, outside quotes.
std::string strip_comment(const std::string& s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == quote) {
        if (quote == '\'' && i + 1 < s.size() && s[i + 1] == '\'') {
          ++i;  // escaped single quote
        } else {
          quote = 0;
        }
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#' && (i == 0 || is_space(s[i - 1]))) {
      return s.substr(0, i);
    }
  }
  return s;
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  int number = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string raw = text.substr(start, end - start);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t i = 0;
    while (i < raw.size() && raw[i] == ' ') ++i;
    if (i < raw.size() && raw[i] == '\t') {
      fail(number, static_cast<int>(i) + 1, "tabs are not allowed in indentation");
    }
    std::string content = rstrip(strip_comment(raw.substr(i)));
    if (!content.empty()) {
      lines.push_back(Line{static_cast<int>(i), std::move(content), number});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool full_match_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
  }
  const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
  auto res = std::from_chars(begin, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool full_match_float(const std::string& s, double& out) {
  if (s.empty()) return false;
  bool has_digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
    else if (c != '+' && c != '-' && c != '.' && c != 'e' && c != 'E') return false;
  }
  if (!has_digit) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// ── Flow / inline parsing ───────────────────────────────────────────────────

struct InlineParser {
  const std::string& text;
  std::size_t pos = 0;
  int line;
  int col_base;  // column of text[0] in the source line (1-based)

  [[noreturn]] void err(const std::string& msg) const {
    fail(line, col_base + static_cast<int>(pos), msg);
  }

  void skip_ws() {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  }
  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  std::string parse_quoted() {
    char quote = text[pos++];
    std::string out;
    while (pos < text.size()) {
      char c = text[pos];
      if (quote == '\'' && c == '\'') {
        if (pos + 1 < text.size() && text[pos + 1] == '\'') {
          out += '\'';
          pos += 2;
          continue;
        }
        ++pos;
        return out;
      }
      if (quote == '"' && c == '"') {
        ++pos;
        return out;
      }
      if (quote == '"' && c == '\\' && pos + 1 < text.size()) {
        char e = text[pos + 1];
        pos += 2;
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case '0': out += '\0'; break;
          default: out += e; break;
        }
        continue;
      }
      out += c;
      ++pos;
    }
    err("unterminated quoted string");
  }

  // Plain token; stops at top-level ',', ']', '}' when in_flow.
  std::string parse_plain(bool in_flow) {
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (in_flow && (c == ',' || c == ']' || c == '}')) break;
      ++pos;
    }
    return rstrip(text.substr(start, pos - start));
  }

  ConfigNode parse_value(bool in_flow) {
    skip_ws();
    if (eof()) return ConfigNode{Scalar{std::monostate{}}, line, col_base + static_cast<int>(pos)};
    int col = col_base + static_cast<int>(pos);
    char c = peek();
    if (c == '[') return parse_flow_seq();
    if (c == '{') return parse_flow_map();
    if (c == '\'' || c == '"') {
      std::string s = parse_quoted();
      return ConfigNode{Scalar{std::move(s)}, line, col};
    }
    if (c == '&' || c == '*') err("YAML anchors/aliases are not supported (use !ref/!copy)");
    if (c == '!') err("tags are not supported inside flow collections");
    std::string tok = parse_plain(in_flow);
    return ConfigNode{parse_scalar_token(tok), line, col};
  }

  ConfigNode parse_flow_seq() {
    int col = col_base + static_cast<int>(pos);
    ++pos;  // '['
    ConfigNode::Sequence seq;
    skip_ws();
    if (!eof() && peek() == ']') {
      ++pos;
      return ConfigNode{std::move(seq), line, col};
    }
    while (true) {
      seq.items.push_back(parse_value(true));
      skip_ws();
      if (eof()) err("unterminated flow sequence");
      if (peek() == ',') {
        ++pos;
        continue;
      }
      if (peek() == ']') {
        ++pos;
        return ConfigNode{std::move(seq), line, col};
      }
      err("expected ',' or ']' in flow sequence");
    }
  }

  ConfigNode parse_flow_map() {
    int col = col_base + static_cast<int>(pos);
    ++pos;  // '{'
    ConfigNode::Mapping map;
    skip_ws();
    if (!eof() && peek() == '}') {
      ++pos;
      return ConfigNode{std::move(map), line, col};
    }
    while (true) {
      skip_ws();
      std::string key;
      if (!eof() && (peek() == '\'' || peek() == '"')) {
        key = parse_quoted();
      } else {
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ':' && text[pos] != ',' && text[pos] != '}') ++pos;
        key = rstrip(text.substr(start, pos - start));
      }
      skip_ws();
      if (eof() || peek() != ':') err("expected ':' in flow mapping");
      ++pos;
      ConfigNode value = parse_value(true);
      if (!map.entries.insert(key, std::move(value))) err("duplicate mapping key '" + key + "'");
      skip_ws();
      if (eof()) err("unterminated flow mapping");
      if (peek() == ',') {
        ++pos;
        continue;
      }
      if (peek() == '}') {
        ++pos;
        return ConfigNode{std::move(map), line, col};
      }
      err("expected ',' or '}' in flow mapping");
    }
  }

  void expect_end() {
    skip_ws();
    if (!eof()) err("unexpected trailing content");
  }
};

// ── Block parsing ───────────────────────────────────────────────────────────

struct IncludeContext {
  std::filesystem::path base_dir;
  std::vector<std::filesystem::path> stack;  // canonical paths of open files
};

ConfigNode parse_document(const std::string& text, IncludeContext& ctx);

class BlockParser {
 public:
  BlockParser(std::vector<Line> lines, IncludeContext& ctx)
      : lines_(std::move(lines)), ctx_(ctx) {}

  ConfigNode parse_root() {
    if (lines_.empty()) return ConfigNode{ConfigNode::Mapping{}, 1, 1};
    ConfigNode node = parse_block(0);
    if (pos_ < lines_.size()) {
      const Line& l = lines_[pos_];
      fail(l.number, l.indent + 1, "unexpected content after document root");
    }
    return node;
  }

 private:
  const Line* peek() const { return pos_ < lines_.size() ? &lines_[pos_] : nullptr; }

  ConfigNode parse_block(int min_indent) {
    const Line* l = peek();
    int block_indent = l->indent;
    if (block_indent < min_indent) {
      fail(l->number, block_indent + 1, "bad indentation");
    }
    if (l->content[0] == '-' &&
        (l->content.size() == 1 || is_space(l->content[1]))) {
      return parse_sequence(block_indent);
    }
    if (l->content.rfind("---", 0) == 0 || l->content[0] == '%') {
      fail(l->number, 1, "multi-document markers are not supported");
    }
    return parse_mapping(block_indent);
  }

  ConfigNode parse_sequence(int block_indent) {
    ConfigNode::Sequence seq;
    int first_line = peek()->number;
    while (const Line* l = peek()) {
      if (l->indent != block_indent) break;
      if (!(l->content[0] == '-' && (l->content.size() == 1 || is_space(l->content[1])))) break;
      int item_line = l->number;
      std::string rest = l->content.size() > 1 ? l->content.substr(2) : "";
      std::size_t lead = 0;
      while (lead < rest.size() && is_space(rest[lead])) ++lead;
      int rest_col = block_indent + 2 + static_cast<int>(lead);
      rest = rest.substr(lead);
      ++pos_;
      if (rest.empty()) {
        const Line* child = peek();
        if (child && child->indent > block_indent) {
          seq.items.push_back(parse_block(block_indent + 1));
        } else {
          seq.items.push_back(ConfigNode{Scalar{std::monostate{}}, item_line, block_indent + 1});
        }
      } else if (find_key_split(rest) != std::string::npos && rest[0] != '!') {
        // compact mapping entry on the dash line; continuation lines are
        // indented to the key's column
        seq.items.push_back(parse_mapping_at(rest_col, rest, item_line));
      } else {
        seq.items.push_back(parse_value_line(rest, item_line, rest_col, block_indent));
      }
    }
    ConfigNode node{std::move(seq), first_line, block_indent + 1};
    return node;
  }

  ConfigNode parse_mapping(int block_indent) {
    const Line* first = peek();
    ConfigNode::Mapping map;
    while (const Line* l = peek()) {
      if (l->indent != block_indent) break;
      if (l->content[0] == '-' && (l->content.size() == 1 || is_space(l->content[1]))) break;
      consume_mapping_entry(map, l->content, l->number, block_indent, true);
    }
    return ConfigNode{std::move(map), first->number, block_indent + 1};
  }

  // A mapping whose first entry text is already in hand (compact form
  // after a sequence dash).
  ConfigNode parse_mapping_at(int key_col, const std::string& first_entry, int first_line) {
    ConfigNode::Mapping map;
    consume_mapping_entry(map, first_entry, first_line, key_col, false);
    while (const Line* l = peek()) {
      if (l->indent != key_col) break;
      if (l->content[0] == '-' && (l->content.size() == 1 || is_space(l->content[1]))) break;
      consume_mapping_entry(map, l->content, l->number, key_col, true);
    }
    return ConfigNode{std::move(map), first_line, key_col + 1};
  }

  void consume_mapping_entry(ConfigNode::Mapping& map, const std::string& content, int line,
                             int indent, bool advance) {
    std::size_t split = find_key_split(content);
    if (split == std::string::npos) {
      fail(line, indent + 1, "expected 'key: value'");
    }
    std::string key_raw = rstrip(content.substr(0, split));
    if (key_raw.empty()) fail(line, indent + 1, "empty mapping key");
    std::string key;
    if (key_raw.front() == '"' || key_raw.front() == '\'') {
      InlineParser ip{key_raw, 0, line, indent + 1};
      key = ip.parse_quoted();
      ip.expect_end();
    } else {
      key = key_raw;
    }
    std::string rest = content.substr(split + 1);
    std::size_t lead = 0;
    while (lead < rest.size() && is_space(rest[lead])) ++lead;
    int rest_col = indent + static_cast<int>(split) + 2 + static_cast<int>(lead);
    rest = rest.substr(lead);
    if (advance) ++pos_;
    ConfigNode value;
    if (rest.empty()) {
      const Line* child = peek();
      if (child && child->indent > indent) {
        value = parse_block(indent + 1);
      } else {
        value = ConfigNode{Scalar{std::monostate{}}, line, rest_col};
      }
    } else {
      value = parse_value_line(rest, line, rest_col, indent);
    }
    if (!map.entries.insert(key, std::move(value))) {
      fail(line, indent + 1, "duplicate mapping key '" + key + "'");
    }
  }

  // ':' separates a key when at top level (outside quotes/brackets) and
  // followed by a space or end of line.
  static std::size_t find_key_split(const std::string& s) {
    char quote = 0;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if (quote) {
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '\'' || c == '"') quote = c;
      else if (c == '[' || c == '{') ++depth;
      else if (c == ']' || c == '}') --depth;
      else if (c == ':' && depth == 0 && (i + 1 == s.size() || is_space(s[i + 1]))) return i;
    }
    return std::string::npos;
  }

  // A value that begins on this line: tag, flow collection or scalar.
  // Tags may carry their arguments as an indented child block.
  ConfigNode parse_value_line(const std::string& rest, int line, int col, int parent_indent) {
    if (rest[0] == '!') return parse_tagged(rest, line, col, parent_indent);
    if (rest[0] == '&' || rest[0] == '*') {
      fail(line, col, "YAML anchors/aliases are not supported (use !ref/!copy)");
    }
    if (rest[0] == '|' || rest[0] == '>') {
      fail(line, col, "block scalars are not supported");
    }
    InlineParser ip{rest, 0, line, col};
    ConfigNode node = ip.parse_value(false);
    ip.expect_end();
    return node;
  }

  ConfigNode parse_tagged(const std::string& rest, int line, int col, int parent_indent) {
    std::size_t ws = 0;
    while (ws < rest.size() && !is_space(rest[ws])) ++ws;
    std::string tag_token = rest.substr(1, ws - 1);
    std::string remainder = rest.substr(std::min(rest.size(), ws));
    std::size_t lead = 0;
    while (lead < remainder.size() && is_space(remainder[lead])) ++lead;
    int rem_col = col + static_cast<int>(ws + lead);
    remainder = remainder.substr(lead);

    std::string word = tag_token;
    std::string suffix;
    if (auto colon = tag_token.find(':'); colon != std::string::npos) {
      word = tag_token.substr(0, colon);
      suffix = tag_token.substr(colon + 1);
    }

    auto node_args = [&](TagKind kind, const std::string& target) {
      std::shared_ptr<const ConfigNode> args;
      if (!remainder.empty()) {
        InlineParser ip{remainder, 0, line, rem_col};
        args = std::make_shared<const ConfigNode>(ip.parse_value(false));
        ip.expect_end();
      } else if (const Line* child = peek(); child && child->indent > parent_indent) {
        args = std::make_shared<const ConfigNode>(parse_block(parent_indent + 1));
      }
      return ConfigNode{ConfigNode::Tagged{kind, target, std::move(args)}, line, col};
    };

    if (word == "new" || word == "name" || word == "apply") {
      if (suffix.empty()) fail(line, col, "!" + word + " requires a target, e.g. !" + word + ":pkg.Class");
      TagKind kind = word == "new" ? TagKind::New : word == "name" ? TagKind::Name : TagKind::Apply;
      return node_args(kind, suffix);
    }
    if (word == "ref" || word == "copy") {
      if (!suffix.empty()) fail(line, col, "!" + word + " takes its expression after a space");
      if (remainder.empty()) fail(line, col, "!" + word + " requires an expression");
      return ConfigNode{ConfigNode::RefExpr{remainder, word == "copy"}, line, col};
    }
    if (word == "tuple") {
      if (remainder.empty()) {
        ConfigNode node = node_args(TagKind::Tuple, "");
        const auto& t = std::get<ConfigNode::Tagged>(node.value);
        if (!t.args || !t.args->is_sequence()) {
          fail(line, col, "!tuple requires a sequence of items");
        }
        return node;
      }
      if (remainder[0] == '(') {
        // parenthesized form: rewrite to a flow sequence
        std::string as_seq = remainder;
        as_seq.front() = '[';
        if (as_seq.back() != ')') fail(line, rem_col, "unterminated !tuple literal");
        as_seq.back() = ']';
        InlineParser ip{as_seq, 0, line, rem_col};
        auto args = std::make_shared<const ConfigNode>(ip.parse_flow_seq());
        ip.expect_end();
        return ConfigNode{ConfigNode::Tagged{TagKind::Tuple, "", std::move(args)}, line, col};
      }
      if (remainder[0] == '[') {
        InlineParser ip{remainder, 0, line, rem_col};
        auto args = std::make_shared<const ConfigNode>(ip.parse_flow_seq());
        ip.expect_end();
        return ConfigNode{ConfigNode::Tagged{TagKind::Tuple, "", std::move(args)}, line, col};
      }
      fail(line, rem_col, "!tuple requires (a, b, ...) or a sequence");
    }
    if (word == "include") {
      std::string path = suffix;
      if (path.empty()) {
        if (remainder.empty()) fail(line, col, "!include requires a file path");
        InlineParser ip{remainder, 0, line, rem_col};
        ConfigNode p = ip.parse_value(false);
        ip.expect_end();
        if (const auto* s = std::get_if<std::string>(&std::get<Scalar>(p.value))) {
          path = *s;
        } else {
          path = scalar_to_string(std::get<Scalar>(p.value));
        }
      } else if (!remainder.empty()) {
        fail(line, rem_col, "unexpected content after !include path");
      }
      return resolve_include(path, line, col);
    }
    fail(line, col, "unknown tag !" + tag_token);
  }

  ConfigNode resolve_include(const std::string& path, int line, int col) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.is_relative()) target = ctx_.base_dir / target;
    std::error_code ec;
    fs::path canonical = fs::weakly_canonical(target, ec);
    if (ec) canonical = target.lexically_normal();
    if (!fs::exists(canonical)) {
      fail(line, col, "include file not found: " + target.string());
    }
    for (const auto& open : ctx_.stack) {
      if (open == canonical) {
        fail(line, col, "include cycle detected at " + canonical.string());
      }
    }
    if (ctx_.stack.size() >= kMaxIncludeDepth) {
      fail(line, col, "include depth exceeds " + std::to_string(kMaxIncludeDepth));
    }
    std::ifstream in(canonical, std::ios::binary);
    if (!in) fail(line, col, "cannot read include file: " + canonical.string());
    std::ostringstream buf;
    buf << in.rdbuf();

    IncludeContext child_ctx;
    child_ctx.base_dir = canonical.parent_path();
    child_ctx.stack = ctx_.stack;
    child_ctx.stack.push_back(canonical);
    return parse_document(buf.str(), child_ctx);
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  IncludeContext& ctx_;
};

ConfigNode parse_document(const std::string& text, IncludeContext& ctx) {
  BlockParser parser(split_lines(text), ctx);
  return parser.parse_root();
}

// ── Dumping ─────────────────────────────────────────────────────────────────

bool plain_safe(const std::string& s) {
  if (s.empty()) return false;
  if (is_space(s.front()) || is_space(s.back())) return false;
  static const std::string forbidden_first = "!&*?#@`\"'%|>{}[],:-";
  if (forbidden_first.find(s.front()) != std::string::npos) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\n' || c == '\t' || c == '{' || c == '}' || c == '[' || c == ']') return false;
    if (c == ':' && (i + 1 == s.size() || s[i + 1] == ' ')) return false;
    if (c == '#' && i > 0 && s[i - 1] == ' ') return false;
  }
  // must re-parse as this exact string
  Scalar parsed = parse_scalar_token(s);
  const auto* str = std::get_if<std::string>(&parsed);
  return str && *str == s;
}

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c; break;
    }
  }
  out += '"';
  return out;
}

std::string dump_scalar(const Scalar& s) {
  if (const auto* str = std::get_if<std::string>(&s)) {
    return plain_safe(*str) ? *str : quote_string(*str);
  }
  return scalar_to_string(s);
}

void dump_node(const ConfigNode& node, std::string& out, int indent, bool at_line_start);

void dump_children(const ConfigNode& node, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  if (node.is_mapping()) {
    for (const auto& [key, value] : node.mapping().entries) {
      out += pad;
      out += plain_safe(key) ? key : quote_string(key);
      out += ':';
      dump_node(value, out, indent, false);
    }
  } else if (node.is_sequence()) {
    for (const auto& item : node.sequence().items) {
      out += pad;
      out += '-';
      dump_node(item, out, indent, false);
    }
  }
}

bool collection_empty(const ConfigNode& node) {
  if (node.is_mapping()) return node.mapping().entries.empty();
  if (node.is_sequence()) return node.sequence().items.empty();
  return false;
}

// `at_line_start` is true when the node owns the whole line (document root).
void dump_node(const ConfigNode& node, std::string& out, int indent, bool at_line_start) {
  if (node.is_scalar()) {
    if (!at_line_start) out += ' ';
    out += dump_scalar(node.scalar());
    out += '\n';
    return;
  }
  if (node.is_mapping() || node.is_sequence()) {
    if (collection_empty(node)) {
      if (!at_line_start) out += ' ';
      out += node.is_mapping() ? "{}" : "[]";
      out += '\n';
      return;
    }
    if (!at_line_start) out += '\n';
    dump_children(node, out, at_line_start ? indent : indent + 2);
    return;
  }
  if (const auto* ref = std::get_if<ConfigNode::RefExpr>(&node.value)) {
    if (!at_line_start) out += ' ';
    out += ref->copy ? "!copy " : "!ref ";
    out += ref->expr;
    out += '\n';
    return;
  }
  const auto& tagged = std::get<ConfigNode::Tagged>(node.value);
  if (!at_line_start) out += ' ';
  switch (tagged.kind) {
    case TagKind::New: out += "!new:" + tagged.target; break;
    case TagKind::Name: out += "!name:" + tagged.target; break;
    case TagKind::Apply: out += "!apply:" + tagged.target; break;
    case TagKind::Include: out += "!include:" + tagged.target; break;
    case TagKind::Tuple: out += "!tuple"; break;
    default: out += "!?"; break;
  }
  if (tagged.kind == TagKind::Tuple && tagged.args) {
    bool all_scalar = true;
    for (const auto& item : tagged.args->sequence().items) {
      if (!item.is_scalar()) all_scalar = false;
    }
    if (all_scalar) {
      out += " (";
      bool first = true;
      for (const auto& item : tagged.args->sequence().items) {
        if (!first) out += ", ";
        first = false;
        out += dump_scalar(item.scalar());
      }
      out += ")\n";
      return;
    }
  }
  if (!tagged.args) {
    out += '\n';
    return;
  }
  if (tagged.args->is_scalar()) {
    out += ' ';
    out += dump_scalar(tagged.args->scalar());
    out += '\n';
    return;
  }
  if (collection_empty(*tagged.args)) {
    out += tagged.args->is_mapping() ? " {}" : " []";
    out += '\n';
    return;
  }
  out += '\n';
  dump_children(*tagged.args, out, indent + 2);
}

}  // namespace

bool ConfigNode::Tagged::operator==(const Tagged& o) const {
  if (kind != o.kind || target != o.target) return false;
  if (!args || !o.args) return !args && !o.args;
  return *args == *o.args;
}

std::string tag_kind_name(TagKind kind) {
  switch (kind) {
    case TagKind::New: return "new";
    case TagKind::Name: return "name";
    case TagKind::Ref: return "ref";
    case TagKind::Copy: return "copy";
    case TagKind::Tuple: return "tuple";
    case TagKind::Include: return "include";
    case TagKind::Apply: return "apply";
  }
  return "?";
}

Scalar parse_scalar_token(const std::string& raw) {
  if (raw.empty()) return Scalar{std::monostate{}};
  if (raw.front() == '"' || raw.front() == '\'') {
    InlineParser ip{raw, 0, 0, 1};
    std::string s = ip.parse_quoted();
    ip.expect_end();
    return Scalar{std::move(s)};
  }
  if (raw == "null" || raw == "Null" || raw == "NULL" || raw == "~") return Scalar{std::monostate{}};
  if (raw == "true" || raw == "True" || raw == "TRUE") return Scalar{true};
  if (raw == "false" || raw == "False" || raw == "FALSE") return Scalar{false};
  if (raw == ".inf" || raw == "+.inf") return Scalar{std::numeric_limits<double>::infinity()};
  if (raw == "-.inf") return Scalar{-std::numeric_limits<double>::infinity()};
  if (raw == ".nan") return Scalar{std::numeric_limits<double>::quiet_NaN()};
  std::int64_t i;
  if (full_match_int(raw, i)) return Scalar{i};
  double d;
  if (full_match_float(raw, d)) return Scalar{d};
  return Scalar{raw};
}

bool looks_numeric(const std::string& raw) {
  std::int64_t i;
  double d;
  return full_match_int(raw, i) || full_match_float(raw, d);
}

ConfigNode parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  IncludeContext ctx;
  ctx.base_dir = base_dir;
  ConfigNode root = parse_document(text, ctx);
  if (!root.is_mapping()) {
    throw Error("config parse error: document root must be a mapping");
  }
  return root;
}

ConfigNode parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path canonical = fs::weakly_canonical(path, ec);
  if (ec) canonical = fs::absolute(path).lexically_normal();
  IncludeContext ctx;
  ctx.base_dir = canonical.parent_path();
  ctx.stack.push_back(canonical);
  ConfigNode root = parse_document(buf.str(), ctx);
  if (!root.is_mapping()) {
    throw Error("config parse error: document root must be a mapping (" + path.string() + ")");
  }
  return root;
}

std::string dump_config(const ConfigNode& node) {
  std::string out;
  dump_node(node, out, 0, true);
  return out;
}

}  // namespace speechkit::conf
