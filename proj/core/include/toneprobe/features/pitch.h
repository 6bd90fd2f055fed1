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

#ifndef TONEPROBE_FEATURES_PITCH_H_
#define TONEPROBE_FEATURES_PITCH_H_

#include <vector>

#include "toneprobe/common/wav.h"
#include "toneprobe/corpus/types.h"

namespace toneprobe::features {

// Autocorrelation pitch tracker defaults: 75-600 Hz search range (ceiling
// widened for high-pitched level/rising tones), 10 ms hop, 40 ms analysis
// window, normalized-correlation voicing threshold.
struct PitchParams {
  double fmin_hz = 75.0;
  double fmax_hz = 600.0;
  double hop_s = 0.01;
  double window_s = 0.04;
  double voicing_threshold = 0.45;
  // Frames quieter than this RMS are unvoiced outright (breath/noise floor).
  double energy_floor = 1e-4;
  // Penalty per octave of lag, biasing against subharmonic (half-pitch)
  // picks that plain autocorrelation is prone to.
  double octave_cost = 0.05;
};

// Per-frame F0 in Hz on the absolute 10 ms grid (frame t starts at t*hop);
// unvoiced frames are 0. Frame count = num_stft_frames(n, hop_samples).
std::vector<float> track_f0(const Waveform& audio, const PitchParams& params = {});

// The number of analysis frames track_f0 yields for n samples.
int num_pitch_frames(int64_t num_samples, const PitchParams& params = {});

inline constexpr int kF0WindowFrames = 21;  // 10-1-10 around the center frame

// 21-dim F0 window: the track frame nearest the syllable midpoint plus 10
// frames each side, zero-padded where the window leaves the utterance.
std::vector<float> extract_f0_window(const std::vector<float>& f0_track,
                                     const corpus::AlignedSyllable& syllable,
                                     double hop_s = 0.01);

// Convenience overload tracking F0 internally.
std::vector<float> extract_f0_window(const Waveform& audio,
                                     const corpus::AlignedSyllable& syllable,
                                     const PitchParams& params = {});

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_PITCH_H_
