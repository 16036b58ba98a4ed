#include "speechkit/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "speechkit/yaml.hpp"

namespace speechkit::data {

namespace {

std::string substitute_data_root(std::string s, const std::string& root) {
  static const std::string token = "{data_root}";
  std::size_t pos = 0;
  while ((pos = s.find(token, pos)) != std::string::npos) {
    s.replace(pos, token.size(), root);
    pos += root.size();
  }
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read manifest file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// SAX handler building examples directly: keeps file order, catches
// duplicate ids and rejects non-scalar item values.
struct JsonManifestHandler : nlohmann::json_sax<nlohmann::json> {
  Manifest& manifest;
  std::string root_str;

  int depth = 0;
  std::string current_key;
  std::string current_id;
  StaticItems* current_items = nullptr;

  JsonManifestHandler(Manifest& m, std::string root) : manifest(m), root_str(std::move(root)) {}

  [[noreturn]] void reject(const std::string& msg) { throw Error("manifest JSON: " + msg); }

  void put(Scalar s) {
    if (depth != 2) reject("value outside an example object");
    if (const auto* str = std::get_if<std::string>(&s)) {
      s = Scalar{substitute_data_root(*str, root_str)};
    }
    if (!current_items->insert(current_key, std::move(s))) {
      reject("duplicate item key '" + current_key + "' in example '" + current_id + "'");
    }
  }

  bool null() override { reject("null is not a scalar item value (key '" + current_key + "')"); }
  bool boolean(bool v) override { put(Scalar{v}); return true; }
  bool number_integer(number_integer_t v) override { put(Scalar{static_cast<std::int64_t>(v)}); return true; }
  bool number_unsigned(number_unsigned_t v) override { put(Scalar{static_cast<std::int64_t>(v)}); return true; }
  bool number_float(number_float_t v, const string_t&) override { put(Scalar{static_cast<double>(v)}); return true; }
  bool string(string_t& v) override { put(Scalar{std::string(v)}); return true; }
  bool binary(binary_t&) override { reject("binary values are not scalars"); }

  bool start_object(std::size_t) override {
    ++depth;
    if (depth == 1) return true;
    if (depth == 2) {
      current_id = current_key;
      if (!manifest.examples.insert(current_id, StaticItems{})) {
        reject("duplicate example id '" + current_id + "'");
      }
      current_items = manifest.examples.find(current_id);
      return true;
    }
    reject("nested objects are not scalar item values (key '" + current_key + "')");
  }
  bool end_object() override { --depth; return true; }
  bool start_array(std::size_t) override { reject("arrays are not scalar item values (key '" + current_key + "')"); }
  bool end_array() override { return true; }
  bool key(string_t& v) override { current_key = v; return true; }

  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    throw Error("manifest JSON parse error at byte " + std::to_string(position) + ": " + ex.what());
  }
};

Manifest load_json(const std::filesystem::path& path, const std::filesystem::path& data_root) {
  Manifest m;
  m.data_root = data_root;
  std::string text = read_file(path);
  JsonManifestHandler handler(m, data_root.string());
  nlohmann::json::sax_parse(text, &handler);
  return m;
}

// RFC 4180 records: quoted fields may contain commas, newlines and
// doubled quotes. Returns fields plus whether each was quoted.
struct CsvRow {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  std::size_t line_no = 0;
};

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool any_content = false;
  std::size_t line_no = 1;
  row.line_no = 1;

  auto end_field = [&]() {
    row.fields.push_back(field);
    row.quoted.push_back(quoted);
    field.clear();
    quoted = false;
  };
  auto end_row = [&]() {
    end_field();
    rows.push_back(std::move(row));
    row = CsvRow{};
    row.line_no = line_no;
    any_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        quoted = true;
        any_content = true;
        break;
      case ',':
        end_field();
        any_content = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line_no;
        if (any_content || !field.empty() || !row.fields.empty()) end_row();
        row.line_no = line_no;
        break;
      default:
        field += c;
        any_content = true;
        break;
    }
  }
  if (in_quotes) throw Error("manifest CSV: unterminated quoted field");
  if (any_content || !field.empty() || !row.fields.empty()) end_row();
  return rows;
}

Manifest load_csv(const std::filesystem::path& path, const std::filesystem::path& data_root) {
  Manifest m;
  m.data_root = data_root;
  std::string root_str = data_root.string();

  std::vector<CsvRow> rows = parse_csv(read_file(path));
  if (rows.empty()) throw Error("manifest CSV is empty: " + path.string());
  const CsvRow& header = rows.front();
  if (header.fields.empty() || header.fields[0] != "ID") {
    throw Error("manifest CSV header must start with 'ID' (" + path.string() + ")");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.fields.size() != header.fields.size()) {
      throw Error("manifest CSV row at line " + std::to_string(row.line_no) + " has " +
                  std::to_string(row.fields.size()) + " columns, header has " +
                  std::to_string(header.fields.size()));
    }
    const std::string& id = row.fields[0];
    if (id.empty()) throw Error("manifest CSV row at line " + std::to_string(row.line_no) + " has empty ID");
    StaticItems items;
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      const std::string& raw = row.fields[c];
      Scalar value;
      if (!row.quoted[c] && conf::looks_numeric(raw)) {
        value = conf::parse_scalar_token(raw);
      } else {
        value = Scalar{substitute_data_root(raw, root_str)};
      }
      items.insert(header.fields[c], std::move(value));
    }
    if (!m.examples.insert(id, std::move(items))) {
      throw Error("manifest CSV: duplicate example id '" + id + "' at line " + std::to_string(row.line_no));
    }
  }
  return m;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path, ManifestFormat format,
                       const std::filesystem::path& data_root) {
  if (format == ManifestFormat::Auto) {
    std::string ext = path.extension().string();
    if (ext == ".json") format = ManifestFormat::Json;
    else if (ext == ".csv") format = ManifestFormat::Csv;
    else throw Error("cannot infer manifest format from extension: " + path.string());
  }
  return format == ManifestFormat::Json ? load_json(path, data_root) : load_csv(path, data_root);
}

ValidationReport validate_manifest(const Manifest& m, bool audio_check) {
  ValidationReport report;
  if (m.examples.empty()) {
    report.findings.push_back({"empty_manifest", "", "", "manifest contains no examples"});
    return report;
  }
  for (const auto& [id, items] : m.examples) {
    for (const auto& [key, value] : items) {
      if (key == "length" && scalar_is_number(value) && scalar_as_double(value) <= 0.0) {
        report.findings.push_back(
            {"nonpositive_length", id, key, scalar_to_string(value)});
      }
      if (audio_check) {
        const auto* str = std::get_if<std::string>(&value);
        // path-like items: strings containing a path separator
        if (str && str->find('/') != std::string::npos && !std::filesystem::exists(*str)) {
          report.findings.push_back({"missing_file", id, key, *str});
        }
      }
    }
  }
  return report;
}

}  // namespace speechkit::data
