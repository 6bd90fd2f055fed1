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

#include "toneprobe/common/log.h"

#include <atomic>
#include <cstdarg>
#include <cstdio>
#include <mutex>

namespace toneprobe {
namespace {

std::atomic<int> g_verbosity{1};
std::mutex g_log_mutex;

void vlog(const char* prefix, const char* fmt, va_list args) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::fputs(prefix, stderr);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

}  // namespace

int log_verbosity() { return g_verbosity.load(); }

void set_log_verbosity(int level) { g_verbosity.store(level); }

void log_info(const char* fmt, ...) {
  if (g_verbosity.load() < 1) return;
  va_list args;
  va_start(args, fmt);
  vlog("[toneprobe] ", fmt, args);
  va_end(args);
}

void log_detail(const char* fmt, ...) {
  if (g_verbosity.load() < 2) return;
  va_list args;
  va_start(args, fmt);
  vlog("[toneprobe] ", fmt, args);
  va_end(args);
}

void log_warn(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  vlog("[toneprobe] warning: ", fmt, args);
  va_end(args);
}

}  // namespace toneprobe
