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

#include "toneprobe/features/pooling.h"

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::features {

std::vector<float> pool_span(const MatrixF& frames, FrameRange range) {
  if (range.empty() || range.begin < 0 || range.end > static_cast<int>(frames.rows)) {
    throw Error(strings::strf("pool_span: range [%d,%d) outside matrix with %zu rows",
                              range.begin, range.end, frames.rows));
  }
  // Accumulate in double: syllable spans are short, but layer activations
  // can be large in magnitude and the probe consumes tiny differences.
  std::vector<double> acc(frames.cols, 0.0);
  for (int r = range.begin; r < range.end; ++r) {
    const float* row = frames.row(static_cast<size_t>(r));
    for (size_t c = 0; c < frames.cols; ++c) acc[c] += row[c];
  }
  const double inv = 1.0 / range.size();
  std::vector<float> out(frames.cols);
  for (size_t c = 0; c < frames.cols; ++c) out[c] = static_cast<float>(acc[c] * inv);
  return out;
}

std::vector<std::vector<float>> pool_syllable(const LayerActivations& acts,
                                              const corpus::AlignedSyllable& syllable) {
  acts.validate();
  FrameRange range =
      time_to_frames(syllable.start_s, syllable.end_s, acts.num_frames(), acts.frame_stride_s);
  std::vector<std::vector<float>> out;
  out.reserve(acts.layers.size());
  for (const MatrixF& layer : acts.layers) {
    out.push_back(pool_span(layer, range));
  }
  return out;
}

}  // namespace toneprobe::features
