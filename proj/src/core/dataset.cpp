/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dataset.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "error.hpp"
#include "text.hpp"

namespace qcad::data {
namespace {

std::string_view role_name(Role r) {
  return r == Role::kContextual ? "contextual" : "behavioral";
}

std::string_view kind_name(Kind k) {
  return k == Kind::kNumeric ? "numeric" : "categorical";
}

bool is_missing(std::string_view cell) {
  cell = text::trim(cell);
  if (cell.empty()) return true;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower == "na" || lower == "nan" || lower == "null" || lower == "?";
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {
  std::unordered_set<std::string> names;
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& spec = features_[f];
    if (spec.name.empty()) throw DataError("schema: empty feature name");
    if (spec.name == kLabelColumn)
      throw DataError("schema: '" + spec.name + "' is reserved for labels");
    if (!names.insert(spec.name).second)
      throw DataError("schema: duplicate feature name '" + spec.name + "'");
    if (spec.role == Role::kContextual) {
      contextual_.push_back(f);
    } else {
      if (spec.kind != Kind::kNumeric)
        throw DataError("schema: behavioral feature '" + spec.name +
                        "' must be numeric");
      behavioral_.push_back(f);
    }
  }
  if (contextual_.empty())
    throw DataError("schema: at least one contextual feature is required");
  if (behavioral_.empty())
    throw DataError("schema: at least one behavioral feature is required");
}

FeatureSchema FeatureSchema::parse(std::string_view source) {
  std::vector<FeatureSpec> features;
  std::size_t line_no = 0;
  while (!source.empty()) {
    const auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source = nl == std::string_view::npos ? std::string_view{}
                                          : source.substr(nl + 1);
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      parts.push_back(text::trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto where = "schema line " + std::to_string(line_no);
    if (parts.size() != 3)
      throw DataError(where + ": expected 'name,role,kind'");

    FeatureSpec spec;
    spec.name = std::string(parts[0]);
    if (parts[1] == "contextual") {
      spec.role = Role::kContextual;
    } else if (parts[1] == "behavioral") {
      spec.role = Role::kBehavioral;
    } else {
      throw DataError(where + ": unknown role '" + std::string(parts[1]) + "'");
    }
    if (parts[2] == "numeric") {
      spec.kind = Kind::kNumeric;
    } else if (parts[2] == "categorical") {
      spec.kind = Kind::kCategorical;
    } else {
      throw DataError(where + ": unknown kind '" + std::string(parts[2]) + "'");
    }
    features.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(features));
}

FeatureSchema FeatureSchema::load(const std::string& path) {
  return parse(text::read_file(path));
}

std::string FeatureSchema::to_text() const {
  std::string out;
  for (const auto& f : features_) {
    out += f.name;
    out += ',';
    out += role_name(f.role);
    out += ',';
    out += kind_name(f.kind);
    out += '\n';
  }
  return out;
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  for (std::size_t f = 0; f < features_.size(); ++f)
    if (features_[f].name == name) return f;
  return std::nullopt;
}

LabelEncoding label_encode(std::span<const std::string> raw) {
  LabelEncoding enc;
  enc.codes.reserve(raw.size());
  std::unordered_map<std::string, int> index;
  for (const auto& label : raw) {
    auto [it, inserted] =
        index.try_emplace(label, static_cast<int>(enc.labels.size()));
    if (inserted) enc.labels.push_back(label);
    enc.codes.push_back(it->second);
  }
  return enc;
}

std::vector<std::string> label_decode(const LabelEncoding& encoding) {
  std::vector<std::string> out;
  out.reserve(encoding.codes.size());
  for (int c : encoding.codes) out.push_back(encoding.labels.at(c));
  return out;
}

Dataset::Dataset(FeatureSchema schema, std::vector<Column> columns,
                 std::optional<std::vector<std::uint8_t>> labels)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      labels_(std::move(labels)) {
  if (columns_.size() != schema_.size())
    throw DataError("dataset: " + std::to_string(columns_.size()) +
                    " columns for a schema of " +
                    std::to_string(schema_.size()) + " features");
  rows_ = columns_.front().values.size();
  if (rows_ == 0) throw DataError("dataset: at least one row is required");
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const auto& col = columns_[f];
    const auto& name = schema_.feature(f).name;
    if (col.values.size() != rows_)
      throw DataError("dataset: column '" + name + "' has " +
                      std::to_string(col.values.size()) + " rows, expected " +
                      std::to_string(rows_));
    if (schema_.feature(f).kind == Kind::kCategorical) {
      const auto n_cat = static_cast<double>(col.categories.size());
      for (double v : col.values)
        if (v < 0 || v >= n_cat || v != static_cast<double>(static_cast<long>(v)))
          throw DataError("dataset: column '" + name +
                          "' holds an invalid category code");
    }
  }
  if (labels_ && labels_->size() != rows_)
    throw DataError("dataset: label vector length mismatch");
  row_ids_.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) row_ids_[i] = i;
  norm_.resize(columns_.size());
}

bool Dataset::normalized() const {
  return std::all_of(schema_.behavioral().begin(), schema_.behavioral().end(),
                     [&](std::size_t f) { return norm_[f].has_value(); });
}

Dataset Dataset::with_column(std::size_t f, Column column) const {
  if (column.values.size() != rows_)
    throw DataError("dataset: replacement column length mismatch");
  Dataset out = *this;
  out.columns_.at(f) = std::move(column);
  return out;
}

Dataset Dataset::with_labels(std::vector<std::uint8_t> labels) const {
  if (labels.size() != rows_)
    throw DataError("dataset: label vector length mismatch");
  Dataset out = *this;
  out.labels_ = std::move(labels);
  return out;
}

Dataset Dataset::with_warning(std::string message) const {
  Dataset out = *this;
  out.warnings_.push_back(std::move(message));
  return out;
}

Dataset Dataset::with_norm_params(std::size_t f,
                                  std::optional<NormParams> p) const {
  Dataset out = *this;
  out.norm_.at(f) = p;
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  if (rows.empty()) throw DataError("dataset: empty row selection");
  Dataset out = *this;
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    auto& dst = out.columns_[f].values;
    dst.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      dst[i] = columns_[f].values.at(rows[i]);
  }
  if (labels_) {
    out.labels_->resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      (*out.labels_)[i] = (*labels_)[rows[i]];
  }
  out.row_ids_.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row_ids_[i] = row_ids_[rows[i]];
  out.rows_ = rows.size();
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return schema_ == other.schema_ && columns_ == other.columns_ &&
         labels_ == other.labels_ && norm_ == other.norm_;
}

Dataset parse_csv(std::string_view source, const FeatureSchema& schema) {
  std::vector<std::size_t> lines;
  const auto records = text::parse_csv_records(source, &lines);
  if (records.empty()) throw DataError("csv: missing header row");

  const auto& header = records.front();
  std::vector<std::optional<std::size_t>> column_of(schema.size());
  std::optional<std::size_t> label_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(text::trim(header[c]));
    if (name == kLabelColumn) {
      label_col = c;
      continue;
    }
    auto f = schema.find(name);
    if (!f) throw DataError("csv: column '" + name + "' is not in the schema");
    if (column_of[*f]) throw DataError("csv: duplicate column '" + name + "'");
    column_of[*f] = c;
  }
  for (std::size_t f = 0; f < schema.size(); ++f)
    if (!column_of[f])
      throw DataError("csv: missing column '" + schema.feature(f).name + "'");

  std::vector<std::vector<double>> numeric(schema.size());
  std::vector<std::vector<std::string>> categorical(schema.size());
  std::vector<std::uint8_t> labels;
  std::vector<std::string> warnings;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto where = "csv line " + std::to_string(lines[r]);
    if (rec.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(rec.size()));

    std::optional<std::size_t> missing;
    for (std::size_t c = 0; c < rec.size() && !missing; ++c)
      if (is_missing(rec[c])) missing = c;
    if (missing) {
      warnings.push_back(where + ": dropped row with missing value in column '" +
                         std::string(text::trim(header[*missing])) + "'");
      continue;
    }

    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto& cell = rec[*column_of[f]];
      if (schema.feature(f).kind == Kind::kCategorical) {
        categorical[f].emplace_back(text::trim(cell));
        continue;
      }
      auto v = text::parse_double(cell);
      if (!v)
        throw DataError(where + ", column '" + schema.feature(f).name +
                        "': cannot parse '" + cell + "' as a number");
      numeric[f].push_back(*v);
    }
    if (label_col) {
      const auto cell = text::trim(rec[*label_col]);
      if (cell != "0" && cell != "1")
        throw DataError(where + ", column '" + std::string(kLabelColumn) +
                        "': expected 0 or 1, found '" + std::string(cell) + "'");
      labels.push_back(cell == "1" ? 1 : 0);
    }
  }

  std::vector<Column> columns(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema.feature(f).kind == Kind::kCategorical) {
      auto enc = label_encode(categorical[f]);
      columns[f].values.assign(enc.codes.begin(), enc.codes.end());
      columns[f].categories = std::move(enc.labels);
    } else {
      columns[f].values = std::move(numeric[f]);
    }
  }
  if (columns.front().values.empty())
    throw DataError("csv: no complete data rows");

  std::optional<std::vector<std::uint8_t>> maybe_labels;
  if (label_col) maybe_labels = std::move(labels);
  Dataset ds(schema, std::move(columns), std::move(maybe_labels));
  for (auto& w : warnings) ds = ds.with_warning(std::move(w));
  return ds;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  return parse_csv(text::read_file(path), schema);
}

std::string to_csv(const Dataset& ds) {
  const auto& schema = ds.schema();
  std::string out;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (f) out += ',';
    out += text::csv_escape(schema.feature(f).name);
  }
  if (ds.has_labels()) {
    out += ',';
    out += kLabelColumn;
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (f) out += ',';
      const auto& col = ds.column(f);
      if (schema.feature(f).kind == Kind::kCategorical) {
        out += text::csv_escape(
            col.categories[static_cast<std::size_t>(col.values[r])]);
      } else {
        out += text::format_double(col.values[r]);
      }
    }
    if (ds.has_labels()) out += ds.labels()[r] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
  text::write_file(path, to_csv(ds));
}

void save_schema(const FeatureSchema& schema, const std::string& path) {
  text::write_file(path, schema.to_text());
}

Dataset minmax_normalize(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t f : ds.schema().behavioral()) {
    Column col = ds.column(f);
    const auto [lo, hi] = std::minmax_element(col.values.begin(), col.values.end());
    const NormParams p{*lo, *hi};
    if (p.max > p.min) {
      const double range = p.max - p.min;
      for (double& v : col.values) v = (v - p.min) / range;
    } else {
      std::fill(col.values.begin(), col.values.end(), 0.0);
      out = out.with_warning("behavioral feature '" + ds.schema().feature(f).name +
                             "' is constant; normalized to zeros");
    }
    out = out.with_column(f, std::move(col)).with_norm_params(f, p);
  }
  return out;
}

Dataset denormalize(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t f : ds.schema().behavioral()) {
    const auto& p = ds.norm_params(f);
    if (!p) throw DataError("denormalize: feature '" +
                            ds.schema().feature(f).name + "' was not normalized");
    Column col = ds.column(f);
    for (double& v : col.values) v = p->min + v * (p->max - p->min);
    out = out.with_column(f, std::move(col)).with_norm_params(f, std::nullopt);
  }
  return out;
}

}  // namespace qcad::data
