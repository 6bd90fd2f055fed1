// Copyright 2025 The toneprobe Authors
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

#ifndef TONEPROBE_COMMON_MATRIX_H_
#define TONEPROBE_COMMON_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace toneprobe {

// Dense row-major float matrix. Deliberately minimal: activation buffers and
// feature tables move through the cache and the probes as flat float32, and
// the linear algebra lives behind the ridge solver.
struct MatrixF {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<float> data;

  MatrixF() = default;
  MatrixF(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  void resize(size_t r, size_t c) {
    rows = r;
    cols = c;
    data.assign(r * c, 0.0f);
  }

  float* row(size_t r) { return data.data() + r * cols; }
  const float* row(size_t r) const { return data.data() + r * cols; }

  std::span<const float> row_span(size_t r) const { return {row(r), cols}; }

  float& at(size_t r, size_t c) { return data[r * cols + c]; }
  float at(size_t r, size_t c) const { return data[r * cols + c]; }

  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace toneprobe

#endif  // TONEPROBE_COMMON_MATRIX_H_
