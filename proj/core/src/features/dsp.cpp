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

#include "toneprobe/features/dsp.h"

#include <algorithm>
#include <cmath>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::features {
namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& buf) {
  const size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(strings::strf("fft_radix2: length %zu is not a power of two", n));
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  // Iterative Cooley-Tukey butterflies.
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = buf[i + k];
        std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  }
  return w;
}

std::vector<double> power_spectrum(const std::vector<double>& windowed_frame, int n_fft) {
  if (static_cast<int>(windowed_frame.size()) > n_fft) {
    throw Error(strings::strf("power_spectrum: frame of %zu samples exceeds n_fft %d",
                              windowed_frame.size(), n_fft));
  }
  std::vector<std::complex<double>> buf(static_cast<size_t>(n_fft), {0.0, 0.0});
  for (size_t i = 0; i < windowed_frame.size(); ++i) buf[i] = windowed_frame[i];
  fft_radix2(buf);
  std::vector<double> power(static_cast<size_t>(n_fft / 2 + 1));
  for (size_t i = 0; i < power.size(); ++i) power[i] = std::norm(buf[i]);
  return power;
}

std::vector<std::vector<double>> mel_filterbank(int n_mels, int n_fft, int sample_rate,
                                                double fmin_hz, double fmax_hz) {
  const int n_bins = n_fft / 2 + 1;
  const double mel_min = hz_to_mel(fmin_hz);
  const double mel_max = hz_to_mel(fmax_hz);
  // n_mels triangles need n_mels + 2 edge points.
  std::vector<double> edges_hz(static_cast<size_t>(n_mels) + 2);
  for (size_t i = 0; i < edges_hz.size(); ++i) {
    double mel = mel_min + (mel_max - mel_min) * static_cast<double>(i) / (n_mels + 1);
    edges_hz[i] = mel_to_hz(mel);
  }

  std::vector<std::vector<double>> bank(static_cast<size_t>(n_mels),
                                        std::vector<double>(static_cast<size_t>(n_bins), 0.0));
  const double bin_hz = static_cast<double>(sample_rate) / n_fft;
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges_hz[static_cast<size_t>(m)];
    const double center = edges_hz[static_cast<size_t>(m) + 1];
    const double right = edges_hz[static_cast<size_t>(m) + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = b * bin_hz;
      double weight = 0.0;
      if (f > left && f < center) {
        weight = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        weight = (right - f) / (right - center);
      }
      bank[static_cast<size_t>(m)][static_cast<size_t>(b)] = weight;
    }
  }
  return bank;
}

std::vector<std::vector<double>> dct2_matrix(int n_out, int n_in) {
  std::vector<std::vector<double>> dct(static_cast<size_t>(n_out),
                                       std::vector<double>(static_cast<size_t>(n_in)));
  const double norm0 = std::sqrt(1.0 / n_in);
  const double norm = std::sqrt(2.0 / n_in);
  for (int k = 0; k < n_out; ++k) {
    for (int i = 0; i < n_in; ++i) {
      dct[static_cast<size_t>(k)][static_cast<size_t>(i)] =
          (k == 0 ? norm0 : norm) * std::cos(kPi * (i + 0.5) * k / n_in);
    }
  }
  return dct;
}

int num_stft_frames(int64_t num_samples, int hop_samples) {
  if (num_samples <= 0) return 0;
  return static_cast<int>((num_samples + hop_samples - 1) / hop_samples);
}

MatrixF log_mel_spectrogram(const Waveform& audio, const StftParams& params) {
  const int n_frames = num_stft_frames(static_cast<int64_t>(audio.samples.size()),
                                       params.hop_samples);
  const std::vector<double> window = hann_window(params.window_samples);
  const std::vector<std::vector<double>> bank = mel_filterbank(
      params.n_mels, params.n_fft, audio.sample_rate, params.fmin_hz, params.fmax_hz);

  MatrixF out(static_cast<size_t>(n_frames), static_cast<size_t>(params.n_mels));
  std::vector<double> frame(static_cast<size_t>(params.window_samples));
  for (int t = 0; t < n_frames; ++t) {
    const int64_t offset = static_cast<int64_t>(t) * params.hop_samples;
    for (int i = 0; i < params.window_samples; ++i) {
      const int64_t s = offset + i;
      const double x =
          s < static_cast<int64_t>(audio.samples.size()) ? audio.samples[static_cast<size_t>(s)]
                                                         : 0.0;
      frame[static_cast<size_t>(i)] = x * window[static_cast<size_t>(i)];
    }
    const std::vector<double> power = power_spectrum(frame, params.n_fft);
    for (int m = 0; m < params.n_mels; ++m) {
      double energy = 0.0;
      const std::vector<double>& filter = bank[static_cast<size_t>(m)];
      for (size_t b = 0; b < power.size(); ++b) energy += filter[b] * power[b];
      out.at(static_cast<size_t>(t), static_cast<size_t>(m)) =
          static_cast<float>(std::log(std::max(energy, kLogFloor)));
    }
  }
  return out;
}

}  // namespace toneprobe::features
