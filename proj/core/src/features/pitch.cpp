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

#include "toneprobe/features/pitch.h"

#include <algorithm>
#include <cmath>

#include "toneprobe/common/error.h"
#include "toneprobe/features/dsp.h"

namespace toneprobe::features {

int num_pitch_frames(int64_t num_samples, const PitchParams& params) {
  // Shares the absolute frame grid with the STFT features (frame t starts
  // at t*hop), so F0 and MFCC windows line up frame for frame.
  return num_stft_frames(num_samples, static_cast<int>(std::lround(params.hop_s * 16000)));
}

std::vector<float> track_f0(const Waveform& audio, const PitchParams& params) {
  if (audio.sample_rate <= 0) throw Error("track_f0: waveform has no sample rate");
  const int sr = audio.sample_rate;
  const int hop = static_cast<int>(std::lround(params.hop_s * sr));
  const int win = static_cast<int>(std::lround(params.window_s * sr));
  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / params.fmax_hz)));
  const int lag_max = static_cast<int>(std::ceil(sr / params.fmin_hz));
  if (lag_max + 2 >= win) {
    throw Error("track_f0: analysis window too short for the pitch floor");
  }
  // Fixed correlation span so every lag sums the same number of terms.
  const int span = win - lag_max - 1;

  const int64_t n = static_cast<int64_t>(audio.samples.size());
  const int n_frames = num_stft_frames(n, hop);
  std::vector<float> f0(static_cast<size_t>(n_frames), 0.0f);

  std::vector<double> frame(static_cast<size_t>(win));
  std::vector<double> nccf(static_cast<size_t>(lag_max) + 2, 0.0);
  for (int t = 0; t < n_frames; ++t) {
    const int64_t offset = static_cast<int64_t>(t) * hop;
    double mean = 0.0;
    for (int i = 0; i < win; ++i) {
      const int64_t s = offset + i;
      frame[static_cast<size_t>(i)] = s < n ? audio.samples[static_cast<size_t>(s)] : 0.0;
      mean += frame[static_cast<size_t>(i)];
    }
    mean /= win;
    double energy = 0.0;
    for (int i = 0; i < win; ++i) {
      frame[static_cast<size_t>(i)] -= mean;
      energy += frame[static_cast<size_t>(i)] * frame[static_cast<size_t>(i)];
    }
    if (std::sqrt(energy / win) < params.energy_floor) continue;  // unvoiced

    double e0 = 0.0;
    for (int i = 0; i < span; ++i) e0 += frame[static_cast<size_t>(i)] * frame[static_cast<size_t>(i)];

    int best_lag = 0;
    double best_score = -1e30;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      double cross = 0.0;
      double e1 = 0.0;
      for (int i = 0; i < span; ++i) {
        const double a = frame[static_cast<size_t>(i)];
        const double b = frame[static_cast<size_t>(i + lag)];
        cross += a * b;
        e1 += b * b;
      }
      const double denom = std::sqrt(e0 * e1);
      const double corr = denom > 0.0 ? cross / denom : 0.0;
      nccf[static_cast<size_t>(lag)] = corr;
      // Penalize long lags so the fundamental beats its subharmonics, which
      // correlate almost as well.
      const double score = corr - params.octave_cost * std::log2(static_cast<double>(lag) / lag_min);
      if (score > best_score) {
        best_score = score;
        best_lag = lag;
      }
    }
    if (best_lag == 0 || nccf[static_cast<size_t>(best_lag)] < params.voicing_threshold) {
      continue;  // unvoiced
    }

    // Parabolic interpolation over the raw correlation for sub-sample lag.
    double refined = best_lag;
    if (best_lag > lag_min && best_lag < lag_max) {
      const double y0 = nccf[static_cast<size_t>(best_lag) - 1];
      const double y1 = nccf[static_cast<size_t>(best_lag)];
      const double y2 = nccf[static_cast<size_t>(best_lag) + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::abs(denom) > 1e-12) {
        const double delta = 0.5 * (y0 - y2) / denom;
        if (std::abs(delta) <= 1.0) refined += delta;
      }
    }
    f0[static_cast<size_t>(t)] = static_cast<float>(sr / refined);
  }
  return f0;
}

std::vector<float> extract_f0_window(const std::vector<float>& f0_track,
                                     const corpus::AlignedSyllable& syllable, double hop_s) {
  const int center = static_cast<int>(std::llround(syllable.mid_s() / hop_s));
  const int total = static_cast<int>(f0_track.size());
  std::vector<float> out(kF0WindowFrames, 0.0f);
  const int half = kF0WindowFrames / 2;
  for (int k = 0; k < kF0WindowFrames; ++k) {
    const int idx = center - half + k;
    if (idx >= 0 && idx < total) out[static_cast<size_t>(k)] = f0_track[static_cast<size_t>(idx)];
  }
  return out;
}

std::vector<float> extract_f0_window(const Waveform& audio,
                                     const corpus::AlignedSyllable& syllable,
                                     const PitchParams& params) {
  return extract_f0_window(track_f0(audio, params), syllable, params.hop_s);
}

}  // namespace toneprobe::features
