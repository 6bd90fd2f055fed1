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

#include "toneprobe/corpus/alignment.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::corpus {
namespace {

using strings::lower;
using strings::trim;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open alignment file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  // UTF-8 BOM
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF) {
    text.erase(0, 3);
  }
  return text;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Praat quotes strings with doubled "" as the escape.
std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && i + 1 < s.size() && s[i + 1] == '"') {
      out.push_back('"');
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

struct TextGridTier {
  std::string name;
  std::vector<AlignedInterval> intervals;
};

// Key/value lines look like `xmin = 0.37` or `text = "ni3"`. Everything else
// (item [..] headers, counts) is structural and handled by the caller.
std::optional<std::pair<std::string, std::string>> parse_kv(std::string_view line) {
  size_t eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  std::string key = lower(trim(line.substr(0, eq)));
  std::string value(trim(line.substr(eq + 1)));
  if (key.empty()) return std::nullopt;
  return std::make_pair(key, value);
}

std::vector<TextGridTier> parse_textgrid(const std::string& text,
                                         const std::filesystem::path& path) {
  std::vector<TextGridTier> tiers;
  std::istringstream in(text);
  std::string line;

  bool in_interval_tier = false;
  // Tiers and the file itself carry their own xmin/xmax headers; only the
  // lines inside an `intervals [..]:` block describe an actual interval.
  bool in_interval_block = false;
  AlignedInterval current;
  bool have_xmin = false, have_xmax = false;
  auto flush_interval = [&]() {
    if (in_interval_tier && in_interval_block && have_xmin && have_xmax) {
      tiers.back().intervals.push_back(current);
    }
    current = AlignedInterval{};
    have_xmin = have_xmax = false;
  };

  bool seen_header = false;
  while (std::getline(in, line)) {
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (!seen_header) {
      // The first non-empty line of a long TextGrid declares the file type.
      if (sv.find("ooTextFile") == std::string_view::npos &&
          sv.find("TextGrid") == std::string_view::npos) {
        throw Error("not a TextGrid file: " + path.string());
      }
      seen_header = true;
    }
    if (sv.starts_with("item") && sv.find('[') != std::string_view::npos) {
      flush_interval();
      in_interval_tier = false;  // decided by the class line below
      in_interval_block = false;
      continue;
    }
    if (sv.starts_with("intervals") && sv.find('[') != std::string_view::npos) {
      flush_interval();
      in_interval_block = true;
      continue;
    }
    auto kv = parse_kv(sv);
    if (!kv) continue;
    const auto& [key, raw] = *kv;
    if (key == "class") {
      if (unquote(raw) == "IntervalTier") {
        tiers.emplace_back();
        in_interval_tier = true;
      } else {
        in_interval_tier = false;
      }
    } else if (key == "name") {
      if (in_interval_tier && !tiers.empty()) tiers.back().name = unquote(raw);
    } else if (key == "xmin") {
      if (auto v = parse_number(raw)) {
        current.start_s = *v;
        have_xmin = true;
      }
    } else if (key == "xmax") {
      if (auto v = parse_number(raw)) {
        current.end_s = *v;
        have_xmax = true;
      }
    } else if (key == "text") {
      if (in_interval_tier) current.label = unquote(raw);
    }
  }
  flush_interval();
  if (!seen_header) throw Error("empty TextGrid file: " + path.string());
  return tiers;
}

}  // namespace

bool is_silence_label(std::string_view label) {
  std::string low = lower(trim(label));
  if (low.size() >= 2 && low.front() == '[' && low.back() == ']') {
    low = low.substr(1, low.size() - 2);
  }
  return low.empty() || low == "sil" || low == "sp" || low == "<eps>";
}

std::vector<AlignedInterval> read_textgrid_intervals(const std::filesystem::path& path) {
  std::vector<TextGridTier> tiers = parse_textgrid(read_text_file(path), path);
  if (tiers.empty()) throw Error("TextGrid has no interval tier: " + path.string());
  for (const TextGridTier& tier : tiers) {
    std::string name = lower(tier.name);
    if (name.find("char") != std::string::npos || name.find("word") != std::string::npos ||
        name.find("syll") != std::string::npos) {
      return tier.intervals;
    }
  }
  return tiers.front().intervals;
}

std::vector<AlignedInterval> read_tsv_intervals(const std::filesystem::path& path,
                                                std::string_view utterance_id) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<AlignedInterval> out;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::vector<std::string> cols = strings::split(line, '\t');
    size_t first = 0;
    if (cols.size() == 4) {
      if (cols[0] != utterance_id) continue;
      first = 1;
    } else if (cols.size() != 3) {
      throw Error(strings::strf("%s:%d: expected 3 or 4 tab-separated columns, got %zu",
                                path.string().c_str(), lineno, cols.size()));
    }
    auto start = parse_number(cols[first]);
    auto end = parse_number(cols[first + 1]);
    if (!start || !end) {
      throw Error(strings::strf("%s:%d: non-numeric interval bounds", path.string().c_str(),
                                lineno));
    }
    out.push_back({*start, *end, std::string(trim(cols[first + 2]))});
  }
  return out;
}

std::vector<AlignedInterval> read_alignment(const std::filesystem::path& path,
                                            std::string_view utterance_id) {
  std::string ext = lower(path.extension().string());
  if (ext == ".textgrid") return read_textgrid_intervals(path);
  return read_tsv_intervals(path, utterance_id);
}

}  // namespace toneprobe::corpus
