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

#ifndef TONEPROBE_FEATURES_FRAMES_H_
#define TONEPROBE_FEATURES_FRAMES_H_

#include <cstdint>

namespace toneprobe::features {

// Frame clock of the base speech-encoder architecture: the convolutional
// front end steps 20 ms per output frame and sees 25 ms of signal.
inline constexpr double kFrameStrideS = 0.02;
inline constexpr double kFrameReceptiveS = 0.025;

// Output frame count of the base architecture's convolutional stack for a
// 16 kHz waveform, computed layer by layer (kernels 10,3,3,3,3,2,2 with
// strides 5,2,2,2,2,2,2). Equals floor((n - 400)/320) + 1 up to conv
// rounding. Returns 0 when the audio is shorter than one receptive field.
int encoder_num_frames(int64_t num_samples);

struct FrameRange {
  int begin = 0;
  int end = 0;  // exclusive

  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

// Maps a time span to encoder frame indices: [floor(start/stride),
// ceil(end/stride)) clipped to [0, total_frames). An empty intersection
// falls back to the single nearest valid frame, so every positive-length
// span inside or near the utterance yields at least one frame.
FrameRange time_to_frames(double start_s, double end_s, int total_frames,
                          double stride_s = kFrameStrideS);

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_FRAMES_H_
