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

#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fairpatch/common.hpp"

namespace fairpatch {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw SchemaError("matrix buffer size does not match its shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) noexcept {
    return values_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  const std::vector<double>& values() const noexcept { return values_; }

  /// Sub-matrix of the given rows and columns, in the given order.
  Matrix select(std::span<const std::size_t> row_idx,
                std::span<const std::size_t> col_idx) const {
    Matrix out(row_idx.size(), col_idx.size());
    for (std::size_t i = 0; i < row_idx.size(); ++i) {
      const auto src = row(row_idx[i]);
      auto dst = out.row(i);
      for (std::size_t j = 0; j < col_idx.size(); ++j) dst[j] = src[col_idx[j]];
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Immutable table of features, +/-1 labels and a binary protected attribute.
class Dataset {
 public:
  Dataset(Matrix features, std::vector<int> labels, std::vector<int> protected_attr,
          std::vector<std::string> feature_names)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        protected_(std::move(protected_attr)),
        feature_names_(std::move(feature_names)) {
    validate();
  }

  std::size_t rows() const noexcept { return features_.rows(); }
  std::size_t cols() const noexcept { return features_.cols(); }

  const Matrix& features() const noexcept { return features_; }
  std::span<const double> row(std::size_t i) const noexcept { return features_.row(i); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<int>& protected_attribute() const noexcept { return protected_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  Dataset subset(std::span<const std::size_t> row_idx) const {
    std::vector<std::size_t> all_cols(cols());
    for (std::size_t j = 0; j < all_cols.size(); ++j) all_cols[j] = j;
    std::vector<int> y;
    std::vector<int> z;
    y.reserve(row_idx.size());
    z.reserve(row_idx.size());
    for (std::size_t i : row_idx) {
      y.push_back(labels_.at(i));
      z.push_back(protected_.at(i));
    }
    return Dataset(features_.select(row_idx, all_cols), std::move(y), std::move(z),
                   feature_names_);
  }

  /// Same rows with the protected column replaced.
  Dataset with_protected(std::vector<int> protected_attr) const {
    return Dataset(features_, labels_, std::move(protected_attr), feature_names_);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() const {
    if (features_.rows() < 2) throw DataError("dataset needs at least 2 rows");
    if (features_.cols() < 1) throw DataError("dataset needs at least 1 feature");
    if (labels_.size() != features_.rows() || protected_.size() != features_.rows()) {
      throw SchemaError("labels, protected attribute and features differ in row count");
    }
    if (feature_names_.size() != features_.cols()) {
      throw SchemaError("feature_names length does not match feature count");
    }
    for (int y : labels_) {
      if (y != -1 && y != 1) throw DataError("labels must be -1 or +1");
    }
    for (int z : protected_) {
      if (z != 0 && z != 1) throw DataError("protected attribute must be 0 or 1");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names_) {
      if (!seen.insert(name).second) throw SchemaError("duplicate feature name: " + name);
    }
  }

  Matrix features_;
  std::vector<int> labels_;
  std::vector<int> protected_;
  std::vector<std::string> feature_names_;
};

}  // namespace fairpatch
