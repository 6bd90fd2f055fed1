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

#include "toneprobe/features/cache.h"

#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::features {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'T', 'P', 'R', 'B'};

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

// Filesystem-safe utterance ids; anything exotic is percent-escaped.
std::string sanitize(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (ok) {
      out.push_back(c);
    } else {
      out += strings::strf("%%%02X", static_cast<unsigned char>(c));
    }
  }
  return out;
}

struct Header {
  uint32_t version = 0;
  uint32_t n_layers = 0;
  uint32_t n_frames = 0;
  uint32_t dim = 0;
};

constexpr size_t kHeaderBytes = 4 + 4 * sizeof(uint32_t);

}  // namespace

void write_activation_file(const fs::path& path, const LayerActivations& acts) {
  acts.validate();
  std::string buf;
  const size_t payload =
      acts.layers.size() * acts.layers[0].data.size() * sizeof(float);
  buf.reserve(kHeaderBytes + payload);
  buf.append(kMagic, 4);
  put_u32le(buf, kCacheFormatVersion);
  put_u32le(buf, static_cast<uint32_t>(acts.num_layers()));
  put_u32le(buf, static_cast<uint32_t>(acts.num_frames()));
  put_u32le(buf, static_cast<uint32_t>(acts.dim()));
  static_assert(sizeof(float) == 4, "float32 storage assumed");
  for (const MatrixF& layer : acts.layers) {
    const char* bytes = reinterpret_cast<const char*>(layer.data.data());
    buf.append(bytes, layer.data.size() * sizeof(float));
  }

  fs::create_directories(path.parent_path());
  // Temp-then-rename keeps concurrent readers off half-written entries.
  fs::path tmp = path;
  tmp += strings::strf(".tmp.%lld", static_cast<long long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write activation file: " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("short write to activation file: " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool read_activation_file(const fs::path& path, LayerActivations* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;  // absent key
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    return false;  // foreign or empty file
  }
  Header h;
  h.version = read_u32le(bytes.data() + 4);
  h.n_layers = read_u32le(bytes.data() + 8);
  h.n_frames = read_u32le(bytes.data() + 12);
  h.dim = read_u32le(bytes.data() + 16);
  if (h.version != kCacheFormatVersion) return false;  // stale format: recompute

  const size_t expect =
      kHeaderBytes + static_cast<size_t>(h.n_layers) * h.n_frames * h.dim * sizeof(float);
  if (bytes.size() != expect || h.n_layers == 0 || h.dim == 0) {
    throw Error(strings::strf("corrupt activation file %s: %zu bytes, header implies %zu",
                              path.string().c_str(), bytes.size(), expect));
  }

  out->layers.assign(h.n_layers, MatrixF(h.n_frames, h.dim));
  const unsigned char* src = bytes.data() + kHeaderBytes;
  for (uint32_t l = 0; l < h.n_layers; ++l) {
    MatrixF& layer = out->layers[l];
    std::memcpy(layer.data.data(), src, layer.data.size() * sizeof(float));
    src += layer.data.size() * sizeof(float);
  }
  return true;
}

ActivationCache::ActivationCache(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path ActivationCache::shard_dir(const std::string& model_id,
                                    int64_t checkpoint_step) const {
  return root_ / sanitize(model_id) / checkpoint_name(checkpoint_step);
}

fs::path ActivationCache::entry_path(const std::string& model_id, int64_t checkpoint_step,
                                     const std::string& utterance_id) const {
  return shard_dir(model_id, checkpoint_step) / (sanitize(utterance_id) + ".tprb");
}

bool ActivationCache::get(const std::string& model_id, int64_t checkpoint_step,
                          const std::string& utterance_id, LayerActivations* out) const {
  if (!read_activation_file(entry_path(model_id, checkpoint_step, utterance_id), out)) {
    return false;
  }
  out->model_id = model_id;
  out->checkpoint_step = checkpoint_step;
  out->utterance_id = utterance_id;
  return true;
}

bool ActivationCache::contains(const std::string& model_id, int64_t checkpoint_step,
                               const std::string& utterance_id) const {
  return fs::exists(entry_path(model_id, checkpoint_step, utterance_id));
}

void ActivationCache::put(const LayerActivations& acts) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  write_activation_file(entry_path(acts.model_id, acts.checkpoint_step, acts.utterance_id),
                        acts);
}

int ActivationCache::write_manifest(const std::string& model_id,
                                    int64_t checkpoint_step) const {
  const fs::path dir = shard_dir(model_id, checkpoint_step);
  if (!fs::exists(dir)) return 0;

  std::vector<std::string> utterances;
  int64_t total_frames = 0;
  int64_t total_bytes = 0;
  int n_layers = 0, dim = 0;
  for (const fs::directory_entry& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".tprb") continue;
    LayerActivations acts;
    if (!read_activation_file(de.path(), &acts)) continue;
    utterances.push_back(de.path().stem().string());
    total_frames += acts.num_frames();
    total_bytes += static_cast<int64_t>(fs::file_size(de.path()));
    n_layers = acts.num_layers();
    dim = acts.dim();
  }
  std::sort(utterances.begin(), utterances.end());

  nlohmann::json manifest;
  manifest["model_id"] = model_id;
  manifest["checkpoint"] = checkpoint_name(checkpoint_step);
  manifest["format_version"] = kCacheFormatVersion;
  manifest["n_layers"] = n_layers;
  manifest["dim"] = dim;
  manifest["utterances"] = utterances;
  manifest["total_frames"] = total_frames;
  manifest["total_bytes"] = total_bytes;

  fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache manifest: " + tmp.string());
    out << manifest.dump(2) << "\n";
  }
  fs::rename(tmp, dir / "manifest.json");
  return static_cast<int>(utterances.size());
}

}  // namespace toneprobe::features
