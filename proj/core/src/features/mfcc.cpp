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

#include "toneprobe/features/mfcc.h"

#include <cmath>

namespace toneprobe::features {

MatrixF compute_mfcc_frames(const Waveform& audio) {
  StftParams params;  // 25 ms / 10 ms / 512-point FFT / 40 mels
  const MatrixF log_mel = log_mel_spectrogram(audio, params);
  static const std::vector<std::vector<double>> dct = dct2_matrix(kMfccCoeffs, params.n_mels);

  MatrixF mfcc(log_mel.rows, kMfccCoeffs);
  for (size_t t = 0; t < log_mel.rows; ++t) {
    const float* mel_row = log_mel.row(t);
    float* out_row = mfcc.row(t);
    for (int k = 0; k < kMfccCoeffs; ++k) {
      double acc = 0.0;
      const std::vector<double>& basis = dct[static_cast<size_t>(k)];
      for (size_t m = 0; m < log_mel.cols; ++m) acc += basis[m] * mel_row[m];
      out_row[k] = static_cast<float>(acc);
    }
  }
  return mfcc;
}

std::vector<float> extract_mfcc_window(const MatrixF& mfcc_frames,
                                       const corpus::AlignedSyllable& syllable, double hop_s) {
  const int center = static_cast<int>(std::llround(syllable.mid_s() / hop_s));
  const int total = static_cast<int>(mfcc_frames.rows);
  const int half = kMfccWindowFrames / 2;
  std::vector<float> out(kMfccWindowDim, 0.0f);
  for (int k = 0; k < kMfccWindowFrames; ++k) {
    const int idx = center - half + k;
    if (idx < 0 || idx >= total) continue;  // zero block outside the utterance
    const float* row = mfcc_frames.row(static_cast<size_t>(idx));
    std::copy(row, row + kMfccCoeffs, out.begin() + static_cast<long>(k) * kMfccCoeffs);
  }
  return out;
}

std::vector<float> extract_mfcc_window(const Waveform& audio,
                                       const corpus::AlignedSyllable& syllable) {
  return extract_mfcc_window(compute_mfcc_frames(audio), syllable);
}

}  // namespace toneprobe::features
