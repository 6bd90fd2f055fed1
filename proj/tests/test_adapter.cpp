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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "toneprobe/common/error.h"
#include "toneprobe/features/frames.h"

namespace fs = std::filesystem;
using namespace toneprobe::features;  // NOLINT
using toneprobe::Waveform;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform tone(double freq_hz, double seconds) {
  Waveform wf;
  wf.sample_rate = 16000;
  wf.samples.resize(static_cast<size_t>(seconds * 16000));
  for (size_t i = 0; i < wf.samples.size(); ++i) {
    wf.samples[i] = static_cast<float>(
        0.4 * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / 16000.0));
  }
  return wf;
}

bool identical(const LayerActivations& a, const LayerActivations& b) {
  if (a.num_layers() != b.num_layers()) return false;
  for (int l = 0; l < a.num_layers(); ++l) {
    const auto& da = a.layers[static_cast<size_t>(l)].data;
    const auto& db = b.layers[static_cast<size_t>(l)].data;
    if (da.size() != db.size()) return false;
    if (std::memcmp(da.data(), db.data(), da.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("stub encoder declares the base architecture geometry") {
  StubEncoder enc("unit-stub");
  EncoderInfo info = enc.info();
  CHECK(info.n_layers == 13);
  CHECK(info.dim == 768);
  CHECK(info.frame_stride_s == doctest::Approx(0.02));
  CHECK(info.frame_receptive_s == doctest::Approx(0.025));
}

TEST_CASE("stub activations match the conv stack frame count") {
  StubEncoder enc("unit-stub");
  for (double seconds : {0.5, 1.0, 1.73}) {
    Waveform wf = tone(220.0, seconds);
    LayerActivations acts = enc.extract(wf, kFinalCheckpoint, "u");
    CHECK(acts.num_frames() ==
          encoder_num_frames(static_cast<int64_t>(wf.samples.size())));
    CHECK(acts.num_layers() == 13);
    CHECK(acts.dim() == 768);
  }
}

TEST_CASE("identical audio twice gives bit-identical activations") {
  StubEncoder enc("unit-stub");
  Waveform wf = tone(180.0, 0.7);
  LayerActivations a = enc.extract(wf, kFinalCheckpoint, "u");
  LayerActivations b = enc.extract(wf, kFinalCheckpoint, "u");
  CHECK(identical(a, b));
}

TEST_CASE("different model ids give different representations") {
  StubEncoder enc_a("model-a");
  StubEncoder enc_b("model-b");
  Waveform wf = tone(180.0, 0.5);
  CHECK_FALSE(identical(enc_a.extract(wf, kFinalCheckpoint, "u"),
                        enc_b.extract(wf, kFinalCheckpoint, "u")));
}

TEST_CASE("audio shorter than one receptive field is an error") {
  StubEncoder enc("unit-stub");
  Waveform wf;
  wf.sample_rate = 16000;
  wf.samples.assign(100, 0.0f);
  CHECK_THROWS_AS(enc.extract(wf, kFinalCheckpoint, "tiny"), toneprobe::Error);
}

TEST_CASE("the final checkpoint equals the fully-blended representation") {
  StubEncoder enc("unit-stub", 85000);
  Waveform wf = tone(240.0, 0.5);
  LayerActivations final_acts = enc.extract(wf, kFinalCheckpoint, "u");
  LayerActivations at_total = enc.extract(wf, 85000, "u");
  CHECK(identical(final_acts, at_total));
}

TEST_CASE("checkpoint step 0 is pure noise, decorrelated from the final state") {
  StubEncoder enc("unit-stub", 85000);
  Waveform wf = tone(240.0, 0.5);
  LayerActivations final_acts = enc.extract(wf, kFinalCheckpoint, "u");
  LayerActivations step0 = enc.extract(wf, 0, "u");

  // Correlation between step-0 and final activations of the top layer.
  const auto& a = step0.layers[12].data;
  const auto& b = final_acts.layers[12].data;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  CHECK(std::abs(dot / std::sqrt(na * nb)) < 0.05);
}

TEST_CASE("intermediate checkpoints interpolate monotonically") {
  StubEncoder enc("unit-stub", 80000);
  Waveform wf = tone(240.0, 0.5);
  LayerActivations final_acts = enc.extract(wf, kFinalCheckpoint, "u");

  double prev_distance = 1e30;
  for (int64_t step : {0, 20000, 40000, 60000, 80000}) {
    LayerActivations acts = enc.extract(wf, step, "u");
    double dist = 0.0;
    const auto& a = acts.layers[6].data;
    const auto& b = final_acts.layers[6].data;
    for (size_t i = 0; i < a.size(); ++i) {
      dist += (static_cast<double>(a[i]) - b[i]) * (static_cast<double>(a[i]) - b[i]);
    }
    CHECK(dist < prev_distance + 1e-12);
    prev_distance = dist;
  }
  CHECK(prev_distance == doctest::Approx(0.0));
}

TEST_CASE("cache-only encoder serves hits and refuses misses") {
  fs::path root = fs::temp_directory_path() / "toneprobe_cacheonly_test";
  fs::remove_all(root);
  ActivationCache cache(root);

  StubEncoder stub("frozen");
  Waveform wf = tone(200.0, 0.5);
  cache.put(stub.extract(wf, kFinalCheckpoint, "cached_utt"));

  CacheOnlyEncoder enc("frozen", &cache);
  LayerActivations got = enc.extract(wf, kFinalCheckpoint, "cached_utt");
  CHECK(got.num_layers() == 13);
  CHECK_THROWS_AS(enc.extract(wf, kFinalCheckpoint, "never_extracted"), toneprobe::Error);
}

TEST_CASE("command encoder round-trips through an external helper") {
  // The helper is a shell script copying a pre-staged activation container
  // to --out, standing in for a real extraction process.
  fs::path dir = fs::temp_directory_path() / "toneprobe_cmd_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  StubEncoder stub("staged");
  Waveform wf = tone(150.0, 0.5);
  LayerActivations staged = stub.extract(wf, kFinalCheckpoint, "u");
  fs::path staged_path = dir / "staged.tprb";
  write_activation_file(staged_path, staged);

  fs::path helper = dir / "helper.sh";
  {
    std::ofstream h(helper);
    h << "#!/bin/sh\n"
      << "out=\"\"\n"
      << "while [ $# -gt 0 ]; do\n"
      << "  if [ \"$1\" = \"--out\" ]; then out=\"$2\"; shift; fi\n"
      << "  shift\n"
      << "done\n"
      << "cp '" << staged_path.string() << "' \"$out\"\n";
  }
  fs::permissions(helper, fs::perms::owner_all);

  CommandEncoder enc("external", helper.string(), "some/checkpoint", dir / "work");
  LayerActivations got = enc.extract(wf, kFinalCheckpoint, "u");
  CHECK(got.model_id == "external");
  CHECK(identical(got, staged));

  // A helper that fails must surface as an error, not empty activations.
  fs::path bad_helper = dir / "bad.sh";
  {
    std::ofstream h(bad_helper);
    h << "#!/bin/sh\nexit 3\n";
  }
  fs::permissions(bad_helper, fs::perms::owner_all);
  CommandEncoder bad("external", bad_helper.string(), "some/checkpoint", dir / "work");
  CHECK_THROWS_AS(bad.extract(wf, kFinalCheckpoint, "u"), toneprobe::Error);
}

TEST_CASE("text stub embeddings are deterministic and positional") {
  StubTextEncoder text("unit-text");
  std::vector<std::string> sentence = {"今", "天", "天", "气"};

  std::vector<float> a = text.embed(sentence, 1);
  std::vector<float> b = text.embed(sentence, 1);
  REQUIRE(a.size() == 768);
  CHECK(a == b);

  // Same character, different context (positions 1 and 2 are both "tian"
  // but with different neighbors).
  std::vector<float> c = text.embed(sentence, 2);
  CHECK(a != c);

  CHECK_THROWS_AS(text.embed(sentence, 4), toneprobe::Error);
}

TEST_CASE("encoder locator factory dispatches by scheme") {
  fs::path work = fs::temp_directory_path() / "toneprobe_factory_test";
  ActivationCache cache(work / "cache");

  auto stub = make_encoder("stub:small-mandarin", nullptr, work);
  CHECK(stub->info().model_id == "small-mandarin");

  auto from_cache = make_encoder("cache:frozen-model", &cache, work);
  CHECK(from_cache->info().model_id == "frozen-model");

  auto cmd = make_encoder("cmd:/usr/bin/true?model=ref/path&id=nice-name", nullptr, work);
  CHECK(cmd->info().model_id == "nice-name");

  CHECK_THROWS_AS(make_encoder("nonsense", nullptr, work), toneprobe::Error);
  CHECK_THROWS_AS(make_encoder("warp:x", nullptr, work), toneprobe::Error);
  CHECK_THROWS_AS(make_encoder("cmd:/usr/bin/true", nullptr, work), toneprobe::Error);

  auto text = make_text_encoder("stub:bert-stub");
  CHECK(text->dim() == 768);
  CHECK_THROWS_AS(make_text_encoder("other:x"), toneprobe::Error);
}
