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

#include "modelforge/common/scheduler.h"

#include "modelforge/common/error.h"

namespace modelforge {

Scheduler::Handle Scheduler::every(Timestamp start, Duration interval, Task task) {
  if (interval <= 0) fail(ErrorCode::kValidation, "schedule", "schedule interval must be positive");
  std::lock_guard lock(mu_);
  const Handle h = next_handle_++;
  entries_[h] = Entry{start + interval, interval, std::move(task)};
  return h;
}

void Scheduler::cancel(Handle handle) {
  std::lock_guard lock(mu_);
  entries_.erase(handle);
}

std::size_t Scheduler::run_due(Timestamp now) {
  std::size_t fired = 0;
  while (true) {
    Task task;
    Timestamp due = 0;
    {
      std::lock_guard lock(mu_);
      auto best = entries_.end();
      for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->second.next <= now && (best == entries_.end() || it->second.next < best->second.next)) best = it;
      }
      if (best == entries_.end()) break;
      due = best->second.next;
      best->second.next += best->second.interval;
      task = best->second.task;
    }
    task(due);
    ++fired;
  }
  return fired;
}

std::size_t Scheduler::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace modelforge
