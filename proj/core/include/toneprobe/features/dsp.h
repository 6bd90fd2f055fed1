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

#ifndef TONEPROBE_FEATURES_DSP_H_
#define TONEPROBE_FEATURES_DSP_H_

#include <complex>
#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/common/wav.h"

namespace toneprobe::features {

// In-place radix-2 FFT; the buffer length must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& buf);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// One-sided power spectrum (n_fft/2 + 1 bins) of a windowed frame,
// zero-padded to n_fft.
std::vector<double> power_spectrum(const std::vector<double>& windowed_frame, int n_fft);

// Triangular mel filter bank (Slaney-style: mel = 2595 log10(1 + f/700),
// filters normalized to unit peak), shape n_mels x (n_fft/2 + 1).
std::vector<std::vector<double>> mel_filterbank(int n_mels, int n_fft, int sample_rate,
                                                double fmin_hz, double fmax_hz);

// Orthonormal DCT-II matrix, shape n_out x n_in.
std::vector<std::vector<double>> dct2_matrix(int n_out, int n_in);

struct StftParams {
  int window_samples = 400;  // 25 ms at 16 kHz
  int hop_samples = 160;     // 10 ms at 16 kHz
  int n_fft = 512;
  int n_mels = 40;
  double fmin_hz = 20.0;
  double fmax_hz = 8000.0;
};

// Number of analysis frames for a waveform of n samples: frame t covers
// [t*hop, t*hop + window), zero-padded past the signal end, so every sample
// is covered and the frame clock is an absolute grid.
int num_stft_frames(int64_t num_samples, int hop_samples);

// Log-mel spectrogram (frames x n_mels), natural log with a fixed floor so
// silence maps to a deterministic constant.
MatrixF log_mel_spectrogram(const Waveform& audio, const StftParams& params);

inline constexpr double kLogFloor = 1e-10;

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_DSP_H_
