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

#include "toneprobe/corpus/pinyin.h"

#include <string>

#include "doctest.h"
#include "toneprobe/common/error.h"

using toneprobe::corpus::mandarin_initials;
using toneprobe::corpus::parse_pinyin;
using toneprobe::corpus::PinyinSyllable;

namespace {

struct OracleEntry {
  const char* token;
  const char* base;
  int tone;
  const char* onset;
  const char* rime;
};

// Hand-built oracle: every Mandarin initial at least once, every tone digit,
// zero-onset syllables, digraph/single-letter ambiguity (zh vs z, ...), the
// v-for-umlaut convention, and fused erhua syllables.
constexpr OracleEntry kOracle[] = {
    {"ba1", "ba", 1, "b", "a"},
    {"po2", "po", 2, "p", "o"},
    {"mo4", "mo", 4, "m", "o"},
    {"fo2", "fo", 2, "f", "o"},
    {"de5", "de", 5, "d", "e"},
    {"ti2", "ti", 2, "t", "i"},
    {"nv3", "nv", 3, "n", "v"},
    {"lv4", "lv", 4, "l", "v"},
    {"ge1", "ge", 1, "g", "e"},
    {"ke4", "ke", 4, "k", "e"},
    {"he2", "he", 2, "h", "e"},
    {"ji1", "ji", 1, "j", "i"},
    {"qi2", "qi", 2, "q", "i"},
    {"xi3", "xi", 3, "x", "i"},
    {"zhi1", "zhi", 1, "zh", "i"},
    {"chi2", "chi", 2, "ch", "i"},
    {"shi4", "shi", 4, "sh", "i"},
    {"ri4", "ri", 4, "r", "i"},
    {"zi3", "zi", 3, "z", "i"},
    {"ci4", "ci", 4, "c", "i"},
    {"si1", "si", 1, "s", "i"},
    {"a1", "a", 1, "", "a"},
    {"e4", "e", 4, "", "e"},
    {"ai4", "ai", 4, "", "ai"},
    {"ei2", "ei", 2, "", "ei"},
    {"ao4", "ao", 4, "", "ao"},
    {"ou1", "ou", 1, "", "ou"},
    {"an4", "an", 4, "", "an"},
    {"en1", "en", 1, "", "en"},
    {"ang2", "ang", 2, "", "ang"},
    {"er2", "er", 2, "", "er"},
    {"yi1", "yi", 1, "", "yi"},
    {"wu3", "wu", 3, "", "wu"},
    {"yu2", "yu", 2, "", "yu"},
    {"zhong1", "zhong", 1, "zh", "ong"},
    {"chuang2", "chuang", 2, "ch", "uang"},
    {"shuang1", "shuang", 1, "sh", "uang"},
    {"zhuan3", "zhuan", 3, "zh", "uan"},
    {"chen2", "chen", 2, "ch", "en"},
    {"sheng1", "sheng", 1, "sh", "eng"},
    {"zang4", "zang", 4, "z", "ang"},
    {"cang2", "cang", 2, "c", "ang"},
    {"sang1", "sang", 1, "s", "ang"},
    {"jiang3", "jiang", 3, "j", "iang"},
    {"qiong2", "qiong", 2, "q", "iong"},
    {"xuan4", "xuan", 4, "x", "uan"},
    {"guo2", "guo", 2, "g", "uo"},
    {"kuai4", "kuai", 4, "k", "uai"},
    {"huang2", "huang", 2, "h", "uang"},
    {"niu2", "niu", 2, "n", "iu"},
    {"lian2", "lian", 2, "l", "ian"},
    {"hao3", "hao", 3, "h", "ao"},
    {"jin1", "jin", 1, "j", "in"},
    {"tian1", "tian", 1, "t", "ian"},
    {"dianr3", "dianr", 3, "d", "ianr"},
    {"huar1", "huar", 1, "h", "uar"},
};

}  // namespace

TEST_CASE("parse_pinyin matches the hand-built oracle table") {
  int checked = 0;
  for (const OracleEntry& e : kOracle) {
    CAPTURE(e.token);
    PinyinSyllable p = parse_pinyin(e.token);
    CHECK(p.phoneme_string == e.base);
    CHECK(p.tone_digit == e.tone);
    CHECK(p.onset == e.onset);
    CHECK(p.rime == e.rime);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("parse_pinyin is a left inverse of concatenation") {
  for (const OracleEntry& e : kOracle) {
    CAPTURE(e.token);
    PinyinSyllable p = parse_pinyin(e.token);
    CHECK(p.onset + p.rime == p.phoneme_string);
    CHECK(p.phoneme_string + std::to_string(p.tone_digit) == e.token);
    CHECK(!p.rime.empty());
  }
}

TEST_CASE("every listed initial is a maximal match") {
  for (std::string_view initial : mandarin_initials()) {
    std::string token = std::string(initial) + "ang1";
    PinyinSyllable p = parse_pinyin(token);
    CHECK(p.onset == initial);
    CHECK(p.rime == "ang");
  }
}

TEST_CASE("consonant-only interjections fall back to zero onset") {
  PinyinSyllable p = parse_pinyin("m2");
  CHECK(p.onset == "");
  CHECK(p.rime == "m");
}

TEST_CASE("malformed syllables are rejected with the token named") {
  for (const char* bad : {"hao", "hao6", "hao0", "HAO3", "h@o3", "3", "", "ni3hao3x"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_pinyin(bad), toneprobe::Error);
  }
  try {
    parse_pinyin("hao6");
    FAIL("expected an error");
  } catch (const toneprobe::Error& e) {
    CHECK(std::string(e.what()).find("hao6") != std::string::npos);
  }
}

TEST_CASE("tone digit is the base form, never sandhi-adjusted") {
  // A T3-T3 sequence like "hen3 hao3" keeps both base tones: surface sandhi
  // (T3 T3 -> T2 T3) must not leak into the labels.
  PinyinSyllable first = parse_pinyin("hen3");
  PinyinSyllable second = parse_pinyin("hao3");
  CHECK(first.tone_digit == 3);
  CHECK(second.tone_digit == 3);
}
