// Copyright 2026 The ModelForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>

#include "modelforge/common/time.h"

namespace modelforge {

// Periodic task table driven by an explicit `run_due(now)`; the caller owns
// the notion of time so schedules work the same under a virtual clock.
class Scheduler {
 public:
  using Task = std::function<void(Timestamp due)>;
  using Handle = std::uint64_t;

  // First firing at start + interval.
  Handle every(Timestamp start, Duration interval, Task task);
  void cancel(Handle handle);
  // Fires every occurrence due at or before `now`, oldest first. Returns the
  // number of firings.
  std::size_t run_due(Timestamp now);
  std::size_t size() const;

 private:
  struct Entry {
    Timestamp next;
    Duration interval;
    Task task;
  };
  mutable std::mutex mu_;
  std::map<Handle, Entry> entries_;
  Handle next_handle_ = 1;
};

}  // namespace modelforge
