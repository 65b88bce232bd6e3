#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adspeech/matrix.h"

namespace adspeech {

// Insertion-ordered (name, value) pairs produced by an extractor. Missing
// features carry NaN.
class NamedValues {
 public:
  void set(std::string name, double value) { items_.emplace_back(std::move(name), value); }
  void set(std::string name, std::optional<double> value);
  void append(const NamedValues& other);

  const std::vector<std::pair<std::string, double>>& items() const { return items_; }
  std::optional<double> get(std::string_view name) const;

 private:
  std::vector<std::pair<std::string, double>> items_;
};

// Canonical ordered feature-name list. The id is a content hash of the names.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const FeatureSchema& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string id_;
};

// One line per feature name; blank lines and '#' comments ignored.
FeatureSchema load_schema_file(const std::filesystem::path& path);
void write_schema_file(const std::filesystem::path& path, const FeatureSchema& schema);

struct FeatureVector {
  std::string schema_id;
  std::vector<std::string> names;
  std::vector<double> values;  // NaN == missing

  std::set<std::string> missing() const;
  std::optional<double> get(std::string_view name) const;
};

// Projects extractor output onto a schema. Features the schema names but the
// extractor did not produce are an InputError (schema/extractor mismatch).
FeatureVector project(const NamedValues& values, const FeatureSchema& schema);

// Sample-id keyed feature rows under one schema; the on-disk form is
// `sample_id,<feature names...>` with NA for missing cells.
struct FeatureTable {
  FeatureSchema schema;
  std::vector<std::string> sample_ids;
  Matrix values;

  std::optional<std::size_t> row_of(const std::string& sample_id) const;
};

FeatureTable read_feature_table(const std::filesystem::path& path);
std::string render_feature_table(const FeatureTable& table);

}  // namespace adspeech
