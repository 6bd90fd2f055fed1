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

#include "toneprobe/experiments/report.h"

#include <charconv>
#include <fstream>
#include <limits>
#include <system_error>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::experiments {

using strings::strf;

namespace {

constexpr std::string_view kHeader =
    "experiment,corpus,model_id,language,tonality,training_stage,"
    "checkpoint_step,layer_index,task,subtask,selected_alpha,train_n,test_n,"
    "accuracy,realized_test_fraction,seed,config_hash";
constexpr int kColumns = 17;

// CSV fields are written bare (no quoting), so the characters that would
// need quoting are rejected outright.
void check_field(std::string_view column, std::string_view value) {
  if (value.find_first_of(",\"\r\n") != std::string_view::npos) {
    throw Error(strf("%.*s value '%.*s' contains a comma, quote or newline",
                     static_cast<int>(column.size()), column.data(),
                     static_cast<int>(value.size()), value.data()));
  }
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  if (result.ec != std::errc()) throw Error("numeric field does not fit its buffer");
  out.append(buf, result.ptr);
}

template <typename T>
T parse_number(std::string_view field, std::string_view column, size_t line) {
  T value{};
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    throw Error(strf("line %zu: cannot parse %.*s from '%.*s'", line,
                     static_cast<int>(column.size()), column.data(),
                     static_cast<int>(field.size()), field.data()));
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

CellKey cell_key(const ReportRow& row) {
  return CellKey(row.experiment, row.corpus, row.model_id, row.training_stage,
                 row.checkpoint_step, row.task, row.subtask, row.layer_index);
}

void ExperimentReport::upsert(ReportRow row) {
  CellKey key = cell_key(row);
  cells_.insert_or_assign(std::move(key), std::move(row));
}

void ExperimentReport::merge(const ExperimentReport& other) {
  for (const auto& [key, row] : other.cells_) cells_.insert_or_assign(key, row);
}

std::vector<ReportRow> ExperimentReport::rows() const {
  std::vector<ReportRow> out;
  out.reserve(cells_.size());
  for (const auto& [key, row] : cells_) out.push_back(row);
  return out;
}

const ReportRow* ExperimentReport::find(const CellKey& key) const {
  const auto it = cells_.find(key);
  return it == cells_.end() ? nullptr : &it->second;
}

ReportRow row_from_result(std::string_view experiment, std::string_view corpus,
                          const ModelSpec& model, const probe::ProbeResult& result,
                          uint64_t seed, std::string_view config_hash) {
  ReportRow row;
  row.experiment = std::string(experiment);
  row.corpus = std::string(corpus);
  row.model_id = model.model_id;
  row.language = std::string(language_name(model.language));
  row.tonality = std::string(tonality_name(model.tonality));
  row.training_stage = std::string(training_stage_name(model.training_stage));
  row.checkpoint_step = result.checkpoint_step;
  row.layer_index = result.layer_index;
  row.task = std::string(result.task.task_name());
  row.subtask = std::string(result.task.subtask_name());
  row.selected_alpha = result.selected_alpha;
  row.train_n = static_cast<int64_t>(result.train_n);
  row.test_n = static_cast<int64_t>(result.test_n);
  row.accuracy = result.accuracy;
  row.realized_test_fraction = result.realized_test_fraction;
  row.seed = seed;
  row.config_hash = std::string(config_hash);
  return row;
}

ReportRow baseline_row(std::string_view experiment, std::string_view corpus,
                       int pseudo_layer, const probe::ProbeResult& result,
                       uint64_t seed, std::string_view config_hash) {
  if (pseudo_layer != kF0Layer && pseudo_layer != kMfccLayer &&
      pseudo_layer != kTextLayer) {
    throw Error(strf("%d is not a reserved baseline pseudo-layer", pseudo_layer));
  }
  ReportRow row;
  row.experiment = std::string(experiment);
  row.corpus = std::string(corpus);
  row.model_id = std::string(kBaselineModelId);
  row.checkpoint_step = -1;
  row.layer_index = pseudo_layer;
  row.task = std::string(result.task.task_name());
  row.subtask = std::string(result.task.subtask_name());
  row.selected_alpha = result.selected_alpha;
  row.train_n = static_cast<int64_t>(result.train_n);
  row.test_n = static_cast<int64_t>(result.test_n);
  row.accuracy = result.accuracy;
  row.realized_test_fraction = result.realized_test_fraction;
  row.seed = seed;
  row.config_hash = std::string(config_hash);
  return row;
}

std::string_view report_csv_header() { return kHeader; }

std::string to_csv(const ExperimentReport& report) {
  if (report.empty()) throw Error("cannot emit an empty report");
  std::string out(kHeader);
  out.push_back('\n');
  for (const ReportRow& row : report.rows()) {
    check_field("experiment", row.experiment);
    check_field("corpus", row.corpus);
    check_field("model_id", row.model_id);
    check_field("language", row.language);
    check_field("tonality", row.tonality);
    check_field("training_stage", row.training_stage);
    check_field("task", row.task);
    check_field("subtask", row.subtask);
    check_field("config_hash", row.config_hash);

    out += row.experiment;
    out.push_back(',');
    out += row.corpus;
    out.push_back(',');
    out += row.model_id;
    out.push_back(',');
    out += row.language;
    out.push_back(',');
    out += row.tonality;
    out.push_back(',');
    out += row.training_stage;
    out.push_back(',');
    append_number(out, row.checkpoint_step);
    out.push_back(',');
    append_number(out, row.layer_index);
    out.push_back(',');
    out += row.task;
    out.push_back(',');
    out += row.subtask;
    out.push_back(',');
    if (!row.absent) {
      append_number(out, row.selected_alpha);
      out.push_back(',');
      append_number(out, row.train_n);
      out.push_back(',');
      append_number(out, row.test_n);
      out.push_back(',');
      append_number(out, row.accuracy);
      out.push_back(',');
      append_number(out, row.realized_test_fraction);
    } else {
      out += ",,,,";
    }
    out.push_back(',');
    append_number(out, row.seed);
    out.push_back(',');
    out += row.config_hash;
    out.push_back('\n');
  }
  return out;
}

ExperimentReport parse_csv(std::string_view text) {
  ExperimentReport report;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line_no == 1) {
      if (line != kHeader) {
        throw Error(strf("line 1: header does not match the report schema: '%.*s'",
                         static_cast<int>(line.size()), line.data()));
      }
      continue;
    }

    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != kColumns) {
      throw Error(strf("line %zu: expected %d fields, found %zu", line_no, kColumns,
                       fields.size()));
    }

    ReportRow row;
    row.experiment = std::string(fields[0]);
    row.corpus = std::string(fields[1]);
    row.model_id = std::string(fields[2]);
    row.language = std::string(fields[3]);
    row.tonality = std::string(fields[4]);
    row.training_stage = std::string(fields[5]);
    row.checkpoint_step = parse_number<int64_t>(fields[6], "checkpoint_step", line_no);
    row.layer_index = parse_number<int>(fields[7], "layer_index", line_no);
    row.task = std::string(fields[8]);
    row.subtask = std::string(fields[9]);

    const bool any_empty = fields[10].empty() || fields[11].empty() ||
                           fields[12].empty() || fields[13].empty() ||
                           fields[14].empty();
    const bool all_empty = fields[10].empty() && fields[11].empty() &&
                           fields[12].empty() && fields[13].empty() &&
                           fields[14].empty();
    if (any_empty && !all_empty) {
      throw Error(strf("line %zu: a cell is either absent (all five result fields "
                       "empty) or complete, not a mixture",
                       line_no));
    }
    row.absent = all_empty;
    if (!row.absent) {
      row.selected_alpha = parse_number<double>(fields[10], "selected_alpha", line_no);
      row.train_n = parse_number<int64_t>(fields[11], "train_n", line_no);
      row.test_n = parse_number<int64_t>(fields[12], "test_n", line_no);
      row.accuracy = parse_number<double>(fields[13], "accuracy", line_no);
      row.realized_test_fraction =
          parse_number<double>(fields[14], "realized_test_fraction", line_no);
    }
    row.seed = parse_number<uint64_t>(fields[15], "seed", line_no);
    row.config_hash = std::string(fields[16]);

    if (report.find(cell_key(row)) != nullptr) {
      throw Error(strf("line %zu: duplicate experiment cell", line_no));
    }
    report.upsert(std::move(row));
  }
  if (line_no == 0) throw Error("report text is empty");
  return report;
}

void write_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  const std::string text = to_csv(report);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(strf("cannot open '%s' for writing", path.string().c_str()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(strf("failed writing report to '%s'", path.string().c_str()));
}

ExperimentReport read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(strf("cannot open report '%s'", path.string().c_str()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text);
}

}  // namespace toneprobe::experiments
