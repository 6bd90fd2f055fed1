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

#ifndef TONEPROBE_FEATURES_CACHE_H_
#define TONEPROBE_FEATURES_CACHE_H_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>

#include "toneprobe/features/activations.h"

namespace toneprobe::features {

inline constexpr uint32_t kCacheFormatVersion = 1;

// Persistent per-utterance activation store. One binary file per
// (model_id, checkpoint, utterance), little-endian header
// {magic "TPRB", version u32, n_layers u32, n_frames u32, dim u32}
// followed by layer-major float32 data. Writers go through a temp file and
// an atomic rename, so concurrent readers never observe a torn entry; any
// header mismatch (version bump, size lie) reads as a miss, never as data.
class ActivationCache {
 public:
  explicit ActivationCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path entry_path(const std::string& model_id, int64_t checkpoint_step,
                                   const std::string& utterance_id) const;

  // False on absent key, unreadable file, or version/shape mismatch.
  bool get(const std::string& model_id, int64_t checkpoint_step,
           const std::string& utterance_id, LayerActivations* out) const;

  bool contains(const std::string& model_id, int64_t checkpoint_step,
                const std::string& utterance_id) const;

  void put(const LayerActivations& acts);

  // Scans one (model, checkpoint) shard and writes manifest.json next to the
  // entries: utterance ids, frame totals, and the byte size the header data
  // predicts. Returns the number of entries listed.
  int write_manifest(const std::string& model_id, int64_t checkpoint_step) const;

 private:
  std::filesystem::path shard_dir(const std::string& model_id, int64_t checkpoint_step) const;

  std::filesystem::path root_;
  std::mutex write_mutex_;
};

// Serialization used by the cache and by external extraction helpers.
void write_activation_file(const std::filesystem::path& path, const LayerActivations& acts);
// Returns false (leaving *out untouched) on missing file, bad magic, or
// version mismatch; throws Error on a structurally corrupt file.
bool read_activation_file(const std::filesystem::path& path, LayerActivations* out);

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_CACHE_H_
