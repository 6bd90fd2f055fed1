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

#include "toneprobe/common/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe {
namespace {

uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open wav file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file: " + path.string());
  }

  uint16_t format = 0;
  uint16_t channels = 0;
  uint16_t bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    uint32_t chunk_size = read_u32le(chunk + 4);
    size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && body + 16 <= bytes.size()) {
      format = read_u16le(bytes.data() + body);
      channels = read_u16le(bytes.data() + body + 2);
      rate = read_u32le(bytes.data() + body + 4);
      bits = read_u16le(bytes.data() + body + 14);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + chunk_size > bytes.size()) {
        throw Error("wav file truncated mid data chunk: " + path.string());
      }
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1u);  // chunks are word-aligned
  }

  if (data == nullptr) throw Error("wav file has no data chunk: " + path.string());
  if (channels != 1) {
    throw Error(strings::strf("wav file %s has %u channels, expected mono",
                              path.string().c_str(), channels));
  }

  Waveform wf;
  wf.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    size_t n = data_size / 2;
    wf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t s = static_cast<int16_t>(read_u16le(data + 2 * i));
      // Mirror of write_wav_pcm16's scale so a write/read round trip is
      // exact to within half a quantization step.
      wf.samples[i] = std::max(static_cast<float>(s) / 32767.0f, -1.0f);
    }
  } else if (format == 3 && bits == 32) {
    size_t n = data_size / 4;
    wf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = read_u32le(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      wf.samples[i] = f;
    }
  } else {
    throw Error(strings::strf("wav file %s: unsupported encoding (format %u, %u bits)",
                              path.string().c_str(), format, bits));
  }
  return wf;
}

void write_wav_pcm16(const std::filesystem::path& path, int sample_rate,
                     const std::vector<float>& samples) {
  std::string out;
  uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32le(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, static_cast<uint32_t>(sample_rate));
  put_u32le(out, static_cast<uint32_t>(sample_rate * 2));
  put_u16le(out, 2);
  put_u16le(out, 16);
  out.append("data");
  put_u32le(out, data_size);
  for (float s : samples) {
    float clipped = std::clamp(s, -1.0f, 1.0f);
    int16_t q = static_cast<int16_t>(std::lrintf(clipped * 32767.0f));
    put_u16le(out, static_cast<uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write wav file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("short write to wav file: " + path.string());
}

}  // namespace toneprobe
