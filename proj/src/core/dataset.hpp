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

#ifndef QCAD_CORE_DATASET_HPP_
#define QCAD_CORE_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcad::data {

enum class Role { kContextual, kBehavioral };
enum class Kind { kNumeric, kCategorical };

struct FeatureSpec {
  std::string name;
  Role role = Role::kContextual;
  Kind kind = Kind::kNumeric;

  bool operator==(const FeatureSpec&) const = default;
};

// Ordered declaration of every feature's role and kind. Construction
// validates that both roles are present, names are unique and that every
// behavioral feature is numeric.
class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  // Parses the plain-text form: one `name,role,kind` line per feature.
  // Blank lines and lines starting with '#' are ignored.
  static FeatureSchema parse(std::string_view text);
  static FeatureSchema load(const std::string& path);
  std::string to_text() const;

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& feature(std::size_t f) const { return features_[f]; }
  const std::vector<FeatureSpec>& features() const { return features_; }

  // Feature indices per role, in schema order.
  const std::vector<std::size_t>& contextual() const { return contextual_; }
  const std::vector<std::size_t>& behavioral() const { return behavioral_; }

  std::optional<std::size_t> find(std::string_view name) const;

  bool operator==(const FeatureSchema& other) const {
    return features_ == other.features_;
  }

 private:
  std::vector<FeatureSpec> features_;
  std::vector<std::size_t> contextual_;
  std::vector<std::size_t> behavioral_;
};

// One column of values. Categorical columns hold integer codes (stored as
// doubles so trees can split on them directly) plus the code -> label map.
struct Column {
  std::vector<double> values;
  std::vector<std::string> categories;

  bool operator==(const Column&) const = default;
};

struct NormParams {
  double min = 0.0;
  double max = 1.0;

  bool operator==(const NormParams&) const = default;
};

struct LabelEncoding {
  std::vector<int> codes;
  std::vector<std::string> labels;  // labels[code]
};

// Codes assigned by order of first appearance.
LabelEncoding label_encode(std::span<const std::string> raw);
std::vector<std::string> label_decode(const LabelEncoding& encoding);

// Immutable column-oriented table. Transformations return new datasets.
class Dataset {
 public:
  Dataset(FeatureSchema schema, std::vector<Column> columns,
          std::optional<std::vector<std::uint8_t>> labels = std::nullopt);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return rows_; }
  std::size_t contextual_count() const { return schema_.contextual().size(); }
  std::size_t behavioral_count() const { return schema_.behavioral().size(); }

  const Column& column(std::size_t f) const { return columns_[f]; }
  double value(std::size_t row, std::size_t f) const {
    return columns_[f].values[row];
  }
  // Value of the q-th behavioral feature.
  double behavioral(std::size_t row, std::size_t q) const {
    return columns_[schema_.behavioral()[q]].values[row];
  }
  // Value of the p-th contextual feature.
  double contextual(std::size_t row, std::size_t p) const {
    return columns_[schema_.contextual()[p]].values[row];
  }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<std::uint8_t>& labels() const { return *labels_; }

  // Stable identifiers that follow rows through select_rows; 0..N-1 for a
  // freshly constructed dataset.
  const std::vector<std::uint64_t>& row_ids() const { return row_ids_; }

  // Min-max parameters recorded by minmax_normalize, per feature index.
  const std::optional<NormParams>& norm_params(std::size_t f) const {
    return norm_[f];
  }
  bool normalized() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

  Dataset with_column(std::size_t f, Column column) const;
  Dataset with_labels(std::vector<std::uint8_t> labels) const;
  Dataset with_warning(std::string message) const;
  Dataset with_norm_params(std::size_t f, std::optional<NormParams> p) const;
  // Rows in the given order; row ids, labels and metadata travel along.
  Dataset select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  FeatureSchema schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
  std::optional<std::vector<std::uint8_t>> labels_;
  std::vector<std::uint64_t> row_ids_;
  std::vector<std::optional<NormParams>> norm_;
  std::vector<std::string> warnings_;
};

// Name of the optional ground-truth column in CSV files.
inline constexpr std::string_view kLabelColumn = "__anomaly__";

// RFC-4180 reader. Rows containing an empty / NA cell are dropped and
// reported through Dataset::warnings(). Throws DataError naming the row and
// column on any other malformed cell, IoError if the file cannot be read.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);
Dataset parse_csv(std::string_view text, const FeatureSchema& schema);

// Canonical form: header in schema order, categorical cells as labels,
// numbers in shortest round-trip notation, `__anomaly__` last if present.
std::string to_csv(const Dataset& ds);
void save_csv(const Dataset& ds, const std::string& path);
void save_schema(const FeatureSchema& schema, const std::string& path);

// Maps every behavioral column onto [0, 1] via (x - min) / (max - min).
// Constant columns become all zeros and add a warning.
Dataset minmax_normalize(const Dataset& ds);
// Inverse of minmax_normalize using the stored parameters.
Dataset denormalize(const Dataset& ds);

}  // namespace qcad::data

#endif  // QCAD_CORE_DATASET_HPP_
