// Copyright 2026 The fairpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"

namespace fairpatch {

using CsvRow = std::vector<std::string>;

/// RFC-4180 reader: quoted fields may contain commas, newlines and "" escapes.
/// Accepts LF or CRLF line endings. Blank lines are skipped.
inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (!row.empty() || field_started || !field.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;  // a trailing comma still opens an empty field
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaError("unterminated quoted CSV field");
  end_row();
  return rows;
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_escape(row[i]);
  }
  out << '\n';
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct IngestConfig {
  std::string label_column = "y";
  std::string protected_column = "z";
  std::string positive_label_value = "1";
  std::string protected_reference_value = "1";
  std::vector<std::string> categorical_columns;
  std::vector<std::string> drop_columns;

  void validate() const {
    if (label_column.empty() || protected_column.empty()) {
      throw ConfigError("label_column and protected_column must be set");
    }
    if (label_column == protected_column) {
      throw ConfigError("label_column and protected_column must differ");
    }
    for (const auto& c : drop_columns) {
      if (c == label_column || c == protected_column) {
        throw ConfigError("cannot drop the label or protected column: " + c);
      }
    }
  }
};

inline void to_json(nlohmann::json& j, const IngestConfig& c) {
  j = nlohmann::json{{"schema_version", kSchemaVersion},
                     {"label_column", c.label_column},
                     {"protected_column", c.protected_column},
                     {"positive_label_value", c.positive_label_value},
                     {"protected_reference_value", c.protected_reference_value},
                     {"categorical_columns", c.categorical_columns},
                     {"drop_columns", c.drop_columns}};
}

inline void from_json(const nlohmann::json& j, IngestConfig& c) {
  const IngestConfig d;
  c.label_column = j.value("label_column", d.label_column);
  c.protected_column = j.value("protected_column", d.protected_column);
  c.positive_label_value = j.value("positive_label_value", d.positive_label_value);
  c.protected_reference_value =
      j.value("protected_reference_value", d.protected_reference_value);
  c.categorical_columns = j.value("categorical_columns", d.categorical_columns);
  c.drop_columns = j.value("drop_columns", d.drop_columns);
}

struct LoadResult {
  Dataset data;
  std::size_t dropped_rows = 0;
  Warnings warnings;
};

/// Builds a Dataset from parsed CSV text. Label and protected columns are not
/// features. Categorical columns become one indicator per observed category,
/// named "col=value", categories sorted. Rows with an unparseable numeric cell
/// are dropped.
inline LoadResult load_csv_text(std::string_view text, const IngestConfig& config) {
  config.validate();
  auto rows = parse_csv(text);
  if (rows.empty()) throw DataError("CSV has no header row");
  const CsvRow header = rows.front();

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(trim(header[c]));
    if (!index.emplace(name, c).second) throw SchemaError("duplicate CSV column: " + name);
  }
  auto column = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError("CSV is missing column: " + name);
    return it->second;
  };
  const std::size_t label_col = column(config.label_column);
  const std::size_t protected_col = column(config.protected_column);
  const std::set<std::string> categorical(config.categorical_columns.begin(),
                                          config.categorical_columns.end());
  const std::set<std::string> dropped(config.drop_columns.begin(), config.drop_columns.end());
  for (const auto& c : categorical) column(c);
  for (const auto& c : dropped) column(c);

  struct Source {
    std::size_t csv_col;
    bool is_categorical;
  };
  std::vector<Source> sources;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(trim(header[c]));
    if (c == label_col || c == protected_col || dropped.count(name)) continue;
    sources.push_back({c, categorical.count(name) > 0});
  }

  // First pass: keep rows whose numeric cells parse.
  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> numeric_values;
  std::size_t dropped_rows = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != header.size()) {
      throw SchemaError("CSV row " + std::to_string(r + 1) + " has " +
                        std::to_string(row.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    std::vector<double> values;
    bool ok = true;
    for (const auto& s : sources) {
      if (s.is_categorical) continue;
      auto v = parse_double(row[s.csv_col]);
      if (!v) {
        ok = false;
        break;
      }
      values.push_back(*v);
    }
    if (!ok) {
      ++dropped_rows;
      continue;
    }
    kept.push_back(r);
    numeric_values.push_back(std::move(values));
  }
  if (kept.empty()) throw DataError("no usable rows after filtering");

  std::map<std::size_t, std::vector<std::string>> categories;
  for (const auto& s : sources) {
    if (!s.is_categorical) continue;
    std::set<std::string> observed;
    for (std::size_t r : kept) observed.emplace(trim(rows[r][s.csv_col]));
    categories[s.csv_col].assign(observed.begin(), observed.end());
  }

  std::vector<std::string> names;
  for (const auto& s : sources) {
    const std::string base(trim(header[s.csv_col]));
    if (s.is_categorical) {
      for (const auto& cat : categories[s.csv_col]) names.push_back(base + "=" + cat);
    } else {
      names.push_back(base);
    }
  }

  Matrix x(kept.size(), names.size());
  std::vector<int> y(kept.size());
  std::vector<int> z(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const CsvRow& row = rows[kept[i]];
    std::size_t out_col = 0;
    std::size_t numeric_col = 0;
    for (const auto& s : sources) {
      if (s.is_categorical) {
        const std::string_view cell = trim(row[s.csv_col]);
        for (const auto& cat : categories[s.csv_col]) {
          x(i, out_col++) = cell == cat ? 1.0 : 0.0;
        }
      } else {
        x(i, out_col++) = numeric_values[i][numeric_col++];
      }
    }
    y[i] = trim(row[label_col]) == config.positive_label_value ? 1 : -1;
    z[i] = trim(row[protected_col]) == config.protected_reference_value ? 1 : 0;
  }

  Warnings warnings;
  if (dropped_rows > 0) {
    warnings.push_back("dropped " + std::to_string(dropped_rows) +
                       " rows with unparseable numeric cells");
  }
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    warnings.push_back("label column has a single class");
  }
  if (std::all_of(z.begin(), z.end(), [&](int v) { return v == z.front(); })) {
    warnings.push_back("protected column has a single group");
  }
  if (kept.size() < 2) throw DataError("need at least 2 usable rows");
  return {Dataset(std::move(x), std::move(y), std::move(z), std::move(names)), dropped_rows,
          std::move(warnings)};
}

inline LoadResult load_csv(const std::filesystem::path& path, const IngestConfig& config) {
  return load_csv_text(read_file(path), config);
}

/// Serializes as feature columns followed by "y" (+1/-1) and "z" (0/1);
/// readable back with the default IngestConfig.
inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  CsvRow header = data.feature_names();
  header.push_back("y");
  header.push_back("z");
  write_csv_row(out, header);
  CsvRow row(header.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto values = data.row(i);
    for (std::size_t j = 0; j < values.size(); ++j) row[j] = format_double(values[j]);
    row[values.size()] = std::to_string(data.labels()[i]);
    row[values.size() + 1] = std::to_string(data.protected_attribute()[i]);
    write_csv_row(out, row);
  }
}

}  // namespace fairpatch
