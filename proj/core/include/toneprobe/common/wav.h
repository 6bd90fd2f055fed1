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

#ifndef TONEPROBE_COMMON_WAV_H_
#define TONEPROBE_COMMON_WAV_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace toneprobe {

struct Waveform {
  int sample_rate = 0;
  std::vector<float> samples;  // mono, [-1, 1]

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file. Mono only; PCM16 and IEEE float32 encodings.
// Anything else (stereo, other bit depths) is rejected: resampling and
// downmixing are pre-steps, not this toolkit's job.
Waveform read_wav(const std::filesystem::path& path);

// Writes mono PCM16.
void write_wav_pcm16(const std::filesystem::path& path, int sample_rate,
                     const std::vector<float>& samples);

}  // namespace toneprobe

#endif  // TONEPROBE_COMMON_WAV_H_
