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

#include "toneprobe/features/adapter.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <utility>

#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/features/dsp.h"
#include "toneprobe/features/frames.h"

namespace toneprobe::features {

namespace fs = std::filesystem;
using strings::strf;

namespace {

// Locator query strings: "key1=v1&key2=v2".
std::pair<std::string, std::string> split_query(const std::string& locator_body) {
  size_t q = locator_body.find('?');
  if (q == std::string::npos) return {locator_body, std::string()};
  return {locator_body.substr(0, q), locator_body.substr(q + 1)};
}

std::string query_param(const std::string& query, const std::string& key) {
  for (const std::string& pair : strings::split(query, '&')) {
    size_t eq = pair.find('=');
    if (eq == std::string::npos) continue;
    if (pair.substr(0, eq) == key) return pair.substr(eq + 1);
  }
  return std::string();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

// Unit-variance gaussian vector reproducibly derived from a string seed.
void fill_gaussian(std::vector<float>* out, uint64_t seed, float scale) {
  Rng rng(seed);
  for (float& v : *out) v = static_cast<float>(rng.gaussian()) * scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// StubEncoder

StubEncoder::StubEncoder(std::string model_id, int64_t total_steps)
    : model_id_(std::move(model_id)), total_steps_(total_steps) {
  if (total_steps_ <= 0) throw Error("StubEncoder: total_steps must be positive");
}

EncoderInfo StubEncoder::info() const {
  EncoderInfo info;
  info.model_id = model_id_;
  return info;
}

LayerActivations StubEncoder::extract(const Waveform& audio, int64_t checkpoint_step,
                                      const std::string& utterance_id) {
  const int T = encoder_num_frames(static_cast<int64_t>(audio.samples.size()));
  if (T <= 0) {
    throw Error(strf("audio for %s is shorter than one receptive field (%zu samples)",
                     utterance_id.c_str(), audio.samples.size()));
  }
  const EncoderInfo spec = info();

  // Acoustic front end on the encoder's own frame clock (25 ms window,
  // 20 ms hop), zero-padded at the tail so the frame count matches the
  // convolutional stack exactly.
  StftParams stft;
  stft.window_samples = 400;
  stft.hop_samples = 320;
  MatrixF mel = log_mel_spectrogram(audio, stft);
  if (static_cast<int>(mel.rows) < T) {
    throw Error(strf("stub front end produced %zu frames, conv stack implies %d", mel.rows, T));
  }

  LayerActivations acts;
  acts.model_id = model_id_;
  acts.checkpoint_step = checkpoint_step;
  acts.utterance_id = utterance_id;
  acts.frame_stride_s = spec.frame_stride_s;
  acts.frame_receptive_s = spec.frame_receptive_s;
  acts.layers.assign(static_cast<size_t>(spec.n_layers),
                     MatrixF(static_cast<size_t>(T), static_cast<size_t>(spec.dim)));

  // Layer 0: seeded random projection of the log-mel frames to model width.
  const int n_mels = stft.n_mels;
  std::vector<float> projection(static_cast<size_t>(spec.dim) * n_mels);
  fill_gaussian(&projection, fnv1a64(model_id_ + "/projection0"),
                1.0f / std::sqrt(static_cast<float>(n_mels)));
  MatrixF& layer0 = acts.layers[0];
  for (int t = 0; t < T; ++t) {
    const float* mel_row = mel.row(static_cast<size_t>(t));
    float* out_row = layer0.row(static_cast<size_t>(t));
    for (int d = 0; d < spec.dim; ++d) {
      const float* w = projection.data() + static_cast<size_t>(d) * n_mels;
      double acc = 0.0;
      for (int m = 0; m < n_mels; ++m) acc += w[m] * mel_row[m];
      out_row[d] = static_cast<float>(acc);
    }
  }

  // Layers 1..n: temporal smoothing followed by a cheap seeded channel
  // shuffle-and-mix squashed through tanh. Structured mixing keeps the
  // whole forward pass O(T * dim) per layer while still spreading
  // information across channels layer by layer.
  std::vector<size_t> perm_a(static_cast<size_t>(spec.dim));
  std::vector<size_t> perm_b(static_cast<size_t>(spec.dim));
  MatrixF smoothed(static_cast<size_t>(T), static_cast<size_t>(spec.dim));
  for (int l = 1; l < spec.n_layers; ++l) {
    const MatrixF& prev = acts.layers[static_cast<size_t>(l) - 1];
    MatrixF& cur = acts.layers[static_cast<size_t>(l)];

    for (int t = 0; t < T; ++t) {
      const float* mid = prev.row(static_cast<size_t>(t));
      const float* left = prev.row(static_cast<size_t>(std::max(t - 1, 0)));
      const float* right = prev.row(static_cast<size_t>(std::min(t + 1, T - 1)));
      float* out = smoothed.row(static_cast<size_t>(t));
      for (int d = 0; d < spec.dim; ++d) {
        out[d] = 0.5f * mid[d] + 0.25f * left[d] + 0.25f * right[d];
      }
    }

    std::iota(perm_a.begin(), perm_a.end(), size_t{0});
    std::iota(perm_b.begin(), perm_b.end(), size_t{0});
    Rng perm_rng(hash_mix(fnv1a64(model_id_ + "/permutations"), static_cast<uint64_t>(l)));
    perm_rng.shuffle(perm_a);
    perm_rng.shuffle(perm_b);

    for (int t = 0; t < T; ++t) {
      const float* s = smoothed.row(static_cast<size_t>(t));
      float* out = cur.row(static_cast<size_t>(t));
      for (int d = 0; d < spec.dim; ++d) {
        const float mix = 1.1f * s[d] + 0.45f * s[perm_a[static_cast<size_t>(d)]] -
                          0.35f * s[perm_b[static_cast<size_t>(d)]];
        out[d] = std::tanh(mix);
      }
    }
  }

  // Checkpoint trajectory: early checkpoints are mostly seeded noise, late
  // ones mostly the final representation; the final checkpoint is exact.
  if (checkpoint_step != kFinalCheckpoint &&
      checkpoint_step < total_steps_) {
    const double lambda =
        std::clamp(static_cast<double>(checkpoint_step) / static_cast<double>(total_steps_),
                   0.0, 1.0);
    for (int l = 0; l < spec.n_layers; ++l) {
      MatrixF& layer = acts.layers[static_cast<size_t>(l)];
      double sum_sq = 0.0;
      for (float v : layer.data) sum_sq += static_cast<double>(v) * v;
      const float sigma =
          static_cast<float>(std::sqrt(sum_sq / static_cast<double>(layer.data.size())));
      // The noise field depends on (model, utterance, layer) but not on the
      // step, so accuracy moves smoothly along the trajectory.
      Rng noise(hash_mix(fnv1a64(model_id_ + "/noise/" + utterance_id),
                         static_cast<uint64_t>(l)));
      const float keep = static_cast<float>(lambda);
      const float add = static_cast<float>(1.0 - lambda) * sigma;
      for (float& v : layer.data) {
        v = keep * v + add * static_cast<float>(noise.gaussian());
      }
    }
  }

  acts.validate();
  return acts;
}

// ---------------------------------------------------------------------------
// CommandEncoder

CommandEncoder::CommandEncoder(std::string model_id, std::string command, std::string model_ref,
                               fs::path work_dir)
    : model_id_(std::move(model_id)),
      command_(std::move(command)),
      model_ref_(std::move(model_ref)),
      work_dir_(std::move(work_dir)) {
  fs::create_directories(work_dir_);
}

EncoderInfo CommandEncoder::info() const {
  EncoderInfo info;
  info.model_id = model_id_;
  return info;
}

LayerActivations CommandEncoder::extract(const Waveform& audio, int64_t checkpoint_step,
                                         const std::string& utterance_id) {
  const fs::path wav_path =
      work_dir_ / strf("extract_%lld_%s.wav", static_cast<long long>(::getpid()),
                       checkpoint_name(checkpoint_step).c_str());
  const fs::path out_path = wav_path.string() + ".tprb";
  write_wav_pcm16(wav_path, audio.sample_rate, audio.samples);

  const std::string cmdline =
      command_ + " --wav " + shell_quote(wav_path.string()) + " --out " +
      shell_quote(out_path.string()) + " --model " + shell_quote(model_ref_) +
      " --checkpoint " + shell_quote(checkpoint_name(checkpoint_step));
  const int rc = std::system(cmdline.c_str());
  fs::remove(wav_path);
  if (rc != 0) {
    fs::remove(out_path);
    throw Error(strf("extraction helper failed (exit %d) for %s: %s", rc,
                     utterance_id.c_str(), cmdline.c_str()));
  }

  LayerActivations acts;
  if (!read_activation_file(out_path, &acts)) {
    fs::remove(out_path);
    throw Error("extraction helper wrote no readable activation container: " +
                out_path.string());
  }
  fs::remove(out_path);
  acts.model_id = model_id_;
  acts.checkpoint_step = checkpoint_step;
  acts.utterance_id = utterance_id;
  acts.validate();
  return acts;
}

// ---------------------------------------------------------------------------
// CacheOnlyEncoder

CacheOnlyEncoder::CacheOnlyEncoder(std::string model_id, const ActivationCache* cache)
    : model_id_(std::move(model_id)), cache_(cache) {
  if (cache_ == nullptr) throw Error("cache-only encoder needs an activation cache");
}

EncoderInfo CacheOnlyEncoder::info() const {
  EncoderInfo info;
  info.model_id = model_id_;
  return info;
}

LayerActivations CacheOnlyEncoder::extract(const Waveform&, int64_t checkpoint_step,
                                           const std::string& utterance_id) {
  LayerActivations acts;
  if (!cache_->get(model_id_, checkpoint_step, utterance_id, &acts)) {
    throw Error(strf(
        "activations for (%s, %s, %s) are not in the cache; this model is cache-only — run "
        "the extraction helper offline first",
        model_id_.c_str(), checkpoint_name(checkpoint_step).c_str(), utterance_id.c_str()));
  }
  return acts;
}

// ---------------------------------------------------------------------------
// StubTextEncoder

StubTextEncoder::StubTextEncoder(std::string model_id, int dim)
    : model_id_(std::move(model_id)), dim_(dim) {}

std::vector<float> StubTextEncoder::embed(const std::vector<std::string>& characters,
                                          size_t position) {
  if (position >= characters.size()) {
    throw Error(strf("text embed position %zu outside sequence of %zu characters", position,
                     characters.size()));
  }
  auto char_vector = [&](size_t idx, float scale) {
    std::vector<float> v(static_cast<size_t>(dim_));
    fill_gaussian(&v, fnv1a64(model_id_ + "/char/" + characters[idx]), scale);
    return v;
  };
  // The dominant term is the character itself; neighbors contribute a light
  // contextual mix the way a contextual encoder's states would.
  std::vector<float> out = char_vector(position, 1.0f);
  if (position > 0) {
    std::vector<float> left = char_vector(position - 1, 0.15f);
    for (int d = 0; d < dim_; ++d) out[static_cast<size_t>(d)] += left[static_cast<size_t>(d)];
  }
  if (position + 1 < characters.size()) {
    std::vector<float> right = char_vector(position + 1, 0.15f);
    for (int d = 0; d < dim_; ++d) out[static_cast<size_t>(d)] += right[static_cast<size_t>(d)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factories

std::unique_ptr<EncoderAdapter> make_encoder(const std::string& locator,
                                             const ActivationCache* cache,
                                             const fs::path& work_dir) {
  size_t colon = locator.find(':');
  if (colon == std::string::npos) {
    throw Error("encoder locator needs a scheme prefix (stub:, cmd:, cache:): " + locator);
  }
  const std::string scheme = locator.substr(0, colon);
  const auto [body, query] = split_query(locator.substr(colon + 1));

  if (scheme == "stub") {
    if (body.empty()) throw Error("stub encoder locator needs a model id: " + locator);
    int64_t steps = 85000;
    if (std::string s = query_param(query, "steps"); !s.empty()) steps = std::stoll(s);
    return std::make_unique<StubEncoder>(body, steps);
  }
  if (scheme == "cmd") {
    if (body.empty()) throw Error("cmd encoder locator needs a helper path: " + locator);
    std::string model_ref = query_param(query, "model");
    if (model_ref.empty()) {
      throw Error("cmd encoder locator needs ?model=<ref>: " + locator);
    }
    std::string id = query_param(query, "id");
    if (id.empty()) id = model_ref;
    return std::make_unique<CommandEncoder>(id, body, model_ref, work_dir);
  }
  if (scheme == "cache") {
    if (body.empty()) throw Error("cache encoder locator needs a model id: " + locator);
    return std::make_unique<CacheOnlyEncoder>(body, cache);
  }
  throw Error("unknown encoder scheme '" + scheme + "' in locator: " + locator);
}

std::unique_ptr<TextEncoder> make_text_encoder(const std::string& locator) {
  size_t colon = locator.find(':');
  if (colon == std::string::npos) {
    throw Error("text encoder locator needs a scheme prefix (stub:): " + locator);
  }
  const std::string scheme = locator.substr(0, colon);
  const auto [body, query] = split_query(locator.substr(colon + 1));
  if (scheme == "stub") {
    if (body.empty()) throw Error("stub text encoder locator needs a model id: " + locator);
    return std::make_unique<StubTextEncoder>(body);
  }
  throw Error("unknown text encoder scheme '" + scheme + "' in locator: " + locator);
}

}  // namespace toneprobe::features
