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

#ifndef TONEPROBE_FEATURES_ADAPTER_H_
#define TONEPROBE_FEATURES_ADAPTER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "toneprobe/common/wav.h"
#include "toneprobe/features/activations.h"
#include "toneprobe/features/cache.h"

namespace toneprobe::features {

struct EncoderInfo {
  std::string model_id;
  int n_layers = 13;  // feature-encoder output + 12 transformer blocks
  int dim = 768;
  double frame_stride_s = kFrameStrideS;
  double frame_receptive_s = kFrameReceptiveS;
};

// A speech encoder that exposes all hidden states for a forward pass.
// Implementations must be deterministic: the same (audio, checkpoint) pair
// yields bit-identical activations.
class EncoderAdapter {
 public:
  virtual ~EncoderAdapter() = default;

  virtual EncoderInfo info() const = 0;

  virtual LayerActivations extract(const Waveform& audio, int64_t checkpoint_step,
                                   const std::string& utterance_id) = 0;

  // Whether extract() may be called from several threads at once.
  virtual bool reentrant() const { return false; }
};

// Deterministic reference encoder: a seeded random projection of log-mel
// frames to 768 dims (layer 0), then per-layer mixing with temporal
// smoothing and tanh. It runs the whole pipeline without any pretrained
// checkpoint, keeps pitch information linearly recoverable in every layer,
// and matches the base architecture's frame clock exactly. Checkpoint steps
// blend the representation with seeded noise (step 0 = pure noise), so
// training-trajectory experiments have a monotone signal to find.
class StubEncoder : public EncoderAdapter {
 public:
  // total_steps: the step count at which the blend reaches the final
  // representation; mirrors the training-run length under study.
  explicit StubEncoder(std::string model_id, int64_t total_steps = 85000);

  EncoderInfo info() const override;
  LayerActivations extract(const Waveform& audio, int64_t checkpoint_step,
                           const std::string& utterance_id) override;
  bool reentrant() const override { return true; }

 private:
  std::string model_id_;
  int64_t total_steps_;
};

// Bridges to an external extraction helper (typically a Python script
// wrapping a pretrained checkpoint). For each utterance the helper is run
// as:  <command> --wav <in.wav> --out <out.tprb> --model <ref> --checkpoint
// <name>  and must write the activation container this library reads.
class CommandEncoder : public EncoderAdapter {
 public:
  CommandEncoder(std::string model_id, std::string command, std::string model_ref,
                 std::filesystem::path work_dir);

  EncoderInfo info() const override;
  LayerActivations extract(const Waveform& audio, int64_t checkpoint_step,
                           const std::string& utterance_id) override;

 private:
  std::string model_id_;
  std::string command_;
  std::string model_ref_;
  std::filesystem::path work_dir_;
};

// Serves activations exclusively from a pre-filled cache; extraction is an
// error. For machines where the checkpoints cannot run but caches can be
// copied in.
class CacheOnlyEncoder : public EncoderAdapter {
 public:
  CacheOnlyEncoder(std::string model_id, const ActivationCache* cache);

  EncoderInfo info() const override;
  LayerActivations extract(const Waveform& audio, int64_t checkpoint_step,
                           const std::string& utterance_id) override;
  bool reentrant() const override { return true; }

 private:
  std::string model_id_;
  const ActivationCache* cache_;
};

// Character-sequence encoder for the text baseline.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual int dim() const = 0;
  // Final-layer vector at one character position of the sequence.
  virtual std::vector<float> embed(const std::vector<std::string>& characters,
                                   size_t position) = 0;
};

// Deterministic hash-seeded character embeddings with light neighbor mixing;
// a stand-in for a pretrained text encoder with the same interface and
// dimensionality.
class StubTextEncoder : public TextEncoder {
 public:
  explicit StubTextEncoder(std::string model_id, int dim = 768);
  int dim() const override { return dim_; }
  std::vector<float> embed(const std::vector<std::string>& characters,
                           size_t position) override;

 private:
  std::string model_id_;
  int dim_;
};

// Locator grammar:
//   "stub:<model_id>"                    deterministic reference encoder
//   "cmd:<helper>?model=<ref>"           external extraction helper
//   "cache:<model_id>"                   pre-filled cache only
// The cache pointer is only required by "cache:" locators.
std::unique_ptr<EncoderAdapter> make_encoder(const std::string& locator,
                                             const ActivationCache* cache,
                                             const std::filesystem::path& work_dir);

std::unique_ptr<TextEncoder> make_text_encoder(const std::string& locator);

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_ADAPTER_H_
