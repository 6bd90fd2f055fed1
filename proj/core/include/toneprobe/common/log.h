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

#ifndef TONEPROBE_COMMON_LOG_H_
#define TONEPROBE_COMMON_LOG_H_

namespace toneprobe {

// 0 = warnings only, 1 = progress (default), 2 = per-item detail.
int log_verbosity();
void set_log_verbosity(int level);

void log_info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_warn(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace toneprobe

#endif  // TONEPROBE_COMMON_LOG_H_
