#include "adspeech/features.h"

#include <cmath>

#include "adspeech/common.h"
#include "adspeech/io.h"

namespace adspeech {

void NamedValues::set(std::string name, std::optional<double> value) {
  set(std::move(name), value ? *value : kMissing);
}

void NamedValues::append(const NamedValues& other) {
  items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

std::optional<double> NamedValues::get(std::string_view name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return is_missing(v) ? std::nullopt : std::optional<double>(v);
  }
  return std::nullopt;
}

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  std::string joined;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw InputError("duplicate feature name in schema: " + names_[i]);
    }
    joined += names_[i];
    joined += '\n';
  }
  id_ = sha256_hex(joined).substr(0, 16);
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureSchema load_schema_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    while (!line.empty() && line.front() == ' ') line.erase(line.begin());
    if (line.empty() || line.front() == '#') continue;
    names.push_back(std::move(line));
  }
  if (names.empty()) throw InputError(path.string() + ": empty schema");
  return FeatureSchema(std::move(names));
}

void write_schema_file(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::string out;
  for (const auto& n : schema.names()) out += n + "\n";
  write_file(path, out);
}

std::set<std::string> FeatureVector::missing() const {
  std::set<std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (is_missing(values[i])) out.insert(names[i]);
  }
  return out;
}

std::optional<double> FeatureVector::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      return is_missing(values[i]) ? std::nullopt : std::optional<double>(values[i]);
    }
  }
  return std::nullopt;
}

FeatureVector project(const NamedValues& values, const FeatureSchema& schema) {
  FeatureVector fv;
  fv.schema_id = schema.id();
  fv.names = schema.names();
  fv.values.assign(schema.size(), kMissing);
  std::vector<bool> seen(schema.size(), false);
  for (const auto& [name, value] : values.items()) {
    if (auto idx = schema.index_of(name)) {
      fv.values[*idx] = std::isfinite(value) ? value : kMissing;
      seen[*idx] = true;
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw InputError("schema feature '" + schema.names()[i] + "' is not produced by the extractor");
  }
  return fv;
}

std::optional<std::size_t> FeatureTable::row_of(const std::string& sample_id) const {
  for (std::size_t i = 0; i < sample_ids.size(); ++i) {
    if (sample_ids[i] == sample_id) return i;
  }
  return std::nullopt;
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.empty() || csv.header.front() != "sample_id") {
    throw InputError(path.string() + ": first column must be sample_id");
  }
  FeatureTable table;
  table.schema = FeatureSchema(std::vector<std::string>(csv.header.begin() + 1, csv.header.end()));
  table.values = Matrix(csv.rows.size(), table.schema.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    table.sample_ids.push_back(csv.rows[r][0]);
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
      try {
        table.values(r, c) = parse_double(csv.rows[r][c + 1]);
      } catch (const InputError& e) {
        throw ParseError(path.string() + ": " + e.what(), csv.line_numbers[r]);
      }
    }
  }
  return table;
}

std::string render_feature_table(const FeatureTable& table) {
  std::string out = "sample_id";
  for (const auto& n : table.schema.names()) out += "," + csv_escape(n);
  out += '\n';
  for (std::size_t r = 0; r < table.sample_ids.size(); ++r) {
    out += csv_escape(table.sample_ids[r]);
    for (double v : table.values.row(r)) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace adspeech
