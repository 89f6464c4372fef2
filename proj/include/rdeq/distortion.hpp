// Copyright 2026 The rdeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RDEQ_DISTORTION_HPP_
#define RDEQ_DISTORTION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "rdeq/model.hpp"
#include "rdeq/prob.hpp"

namespace rdeq {

// Nonnegative per-symbol distortion values: rows are source symbols (or
// f-images), columns are reconstruction symbols.
class DistortionMatrix {
 public:
  DistortionMatrix(std::size_t rows, std::size_t cols,
                   std::vector<double> values);

  static DistortionMatrix hamming(std::size_t n) { return hamming(n, n); }
  // Rectangular Hamming: 0 on the diagonal, 1 elsewhere.
  static DistortionMatrix hamming(std::size_t rows, std::size_t cols);
  // (a - b)^2 over numeric symbol labels.
  static DistortionMatrix squared_difference(const Alphabet& row_alphabet,
                                             const Alphabet& col_alphabet);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  double max_value() const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> values_;
};

// Compiles utility constraint l of the spec into a matrix over
// (public-attribute tuple, reconstruction tuple) pairs: entries are
// g(f(x_r), f(x̂_r)). Tuple cells are flattened row-major in role order.
DistortionMatrix effective_distortion(const SourceSpec& spec, std::size_t l);

}  // namespace rdeq

#endif  // RDEQ_DISTORTION_HPP_
