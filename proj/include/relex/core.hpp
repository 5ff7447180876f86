// Copyright 2026 The Relex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Numeric primitives and embedding storage shared by both scorers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relex {

// Base class of all recoverable library errors other than argument checks,
// which use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string &source, std::size_t line, const std::string &what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

// Raised when training diverges (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> v) { return dot(v, v); }

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Scales v back onto the unit sphere when it lies outside the unit ball.
inline void project_in_place(std::span<double> v) {
  if (!all_finite(v)) throw std::invalid_argument("project_to_unit_ball: non-finite input");
  const double n2 = squared_norm(v);
  if (n2 <= 1.0) return;
  const double scale = 1.0 / std::sqrt(n2);
  for (double &x : v) x *= scale;
}

inline Vector project_to_unit_ball(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  project_in_place(out);
  return out;
}

// Uniform index in [0, n).
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Dense row-major matrix holding one k-dimensional embedding per symbol id.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {
    if (dim == 0) throw std::invalid_argument("EmbeddingMatrix: dim must be >= 1");
  }

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) {
    check(i);
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> row(std::size_t i) const {
    check(i);
    return {data_.data() + i * dim_, dim_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  void project_row(std::size_t i) { project_in_place(row(i)); }
  void project_all() {
    for (std::size_t i = 0; i < rows_; ++i) project_row(i);
  }

  double max_row_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) m = std::max(m, std::sqrt(squared_norm(row(i))));
    return m;
  }

  bool operator==(const EmbeddingMatrix &) const = default;

 private:
  void check(std::size_t i) const {
    if (i >= rows_) throw std::invalid_argument("EmbeddingMatrix: row " + std::to_string(i) + " out of range");
  }

  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  Vector data_;
};

// Uniform in [-6/sqrt(k), 6/sqrt(k)] per entry, then each row projected.
inline void init_uniform(EmbeddingMatrix &m, Rng &rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(m.dim()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double &x : m.data()) x = dist(rng);
  m.project_all();
}

// Binary feature indicator: the sorted, distinct ids of the active features.
class SparseVector {
 public:
  SparseVector() = default;

  // Sorts and deduplicates.
  explicit SparseVector(std::vector<std::uint32_t> ids) : indices_(std::move(ids)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }

  std::span<const std::uint32_t> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  bool operator==(const SparseVector &) const = default;

 private:
  std::vector<std::uint32_t> indices_;
};

// f(m): sum of the rows of `w` selected by `phi`.
inline Vector sparse_project(const SparseVector &phi, const EmbeddingMatrix &w) {
  Vector out(w.dim(), 0.0);
  for (std::uint32_t id : phi.indices()) {
    if (id >= w.rows())
      throw std::invalid_argument("sparse_project: feature id " + std::to_string(id) + " out of range");
    auto r = w.row(id);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += r[d];
  }
  return out;
}

struct ModelConfig {
  std::size_t dim = 50;
  double margin = 1.0;
  double learning_rate = 0.001;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::size_t calibration_threshold = 10;

  void validate() const {
    if (dim < 1) throw std::invalid_argument("ModelConfig: dim must be >= 1");
    if (!(margin > 0.0)) throw std::invalid_argument("ModelConfig: margin must be > 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("ModelConfig: learning_rate must be > 0");
    if (calibration_threshold < 1) throw std::invalid_argument("ModelConfig: calibration_threshold must be >= 1");
  }
};

// Parameter table addressed by a gradient entry.
enum class Table : std::uint8_t { kFeatures, kRelations, kEntities };

struct RowGradient {
  Table table;
  std::uint32_t row;
  Vector grad;
};

// Hinge loss of one ranking constraint and its gradient, accumulated per
// parameter row. `grads` is empty when the loss is zero.
struct HingeGradient {
  double loss = 0.0;
  std::vector<RowGradient> grads;
};

// Per-epoch training summary.
struct EpochStats {
  std::size_t epoch = 0;
  double mean_hinge = 0.0;
  std::size_t violations = 0;
};

}  // namespace relex
