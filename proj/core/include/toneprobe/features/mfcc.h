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

#ifndef TONEPROBE_FEATURES_MFCC_H_
#define TONEPROBE_FEATURES_MFCC_H_

#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/common/wav.h"
#include "toneprobe/corpus/types.h"
#include "toneprobe/features/dsp.h"

namespace toneprobe::features {

inline constexpr int kMfccCoeffs = 40;
inline constexpr int kMfccWindowFrames = 21;  // 10-1-10 around the center frame
inline constexpr int kMfccWindowDim = kMfccCoeffs * kMfccWindowFrames;  // 840

// Per-frame MFCCs (frames x 40): 25 ms window / 10 ms hop on the absolute
// frame grid, 40 mel filters, orthonormal DCT-II of the log-mel energies.
MatrixF compute_mfcc_frames(const Waveform& audio);

// 840-dim MFCC window: 21 consecutive 40-dim frames centered on the track
// frame nearest the syllable midpoint, zero blocks where the window leaves
// the utterance, concatenated in time order.
std::vector<float> extract_mfcc_window(const MatrixF& mfcc_frames,
                                       const corpus::AlignedSyllable& syllable,
                                       double hop_s = 0.01);

// Convenience overload computing the frames internally.
std::vector<float> extract_mfcc_window(const Waveform& audio,
                                       const corpus::AlignedSyllable& syllable);

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_MFCC_H_
