// Copyright 2026 The PCO Authors
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pco/exploration.hpp"

namespace pco {

/// One completed training step. Skipped steps never produce a record.
struct StepRecord {
  std::uint64_t step = 0;  // global index over attempted steps
  std::size_t epoch = 0;
  std::size_t example_id = 0;
  RoutingDecision route;
  std::string prompt;
  std::string response;
  double reward = 0.0;
  std::optional<double> severity;  // absent when critique was disabled
  std::vector<std::string> updated;  // variable ids rewritten by this step

  bool operator==(const StepRecord&) const = default;
};

/// Single-line JSON encoding with a fixed key order (no trailing newline).
std::string to_json_line(const StepRecord& record);
StepRecord parse_step_record(std::string_view line);

std::vector<StepRecord> read_run_log(const std::filesystem::path& path);

}  // namespace pco
