#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "speechkit/common.hpp"

namespace speechkit::data {

/// Static items of one example: item key -> scalar. The one required
/// column is the example id, carried as the map key in Manifest.
using StaticItems = SmallMap<Scalar>;

enum class ManifestFormat { Auto, Json, Csv };

/// A loaded data manifest: ordered examples plus the data root that was
/// substituted into `{data_root}` placeholders at load time.
struct Manifest {
  SmallMap<StaticItems> examples;  // example id -> items, file order
  std::filesystem::path data_root;

  bool operator==(const Manifest& o) const {
    return examples == o.examples && data_root == o.data_root;
  }
};

/// Load a manifest. JSON: top-level object of id -> object-of-scalars.
/// CSV: header starting with `ID`, RFC 4180 quoting; unquoted numeric
/// lexemes load as numbers, quoted fields stay strings. `Auto` picks by
/// extension.
Manifest load_manifest(const std::filesystem::path& path, ManifestFormat format,
                       const std::filesystem::path& data_root);

struct ValidationFinding {
  std::string kind;  // missing_file | nonpositive_length | empty_manifest
  std::string example_id;
  std::string item_key;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool empty() const { return findings.empty(); }
};

/// Non-mutating checks: missing files for path-like string items (when
/// audio_check), nonpositive `length` values, empty id set.
ValidationReport validate_manifest(const Manifest& m, bool audio_check);

}  // namespace speechkit::data
