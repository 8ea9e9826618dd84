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

#include <filesystem>
#include <string>
#include <string_view>

#include "pco/trainer.hpp"

namespace pco {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  RunState state;

  bool operator==(const Checkpoint&) const = default;
};

/// Versioned JSON document with a SHA-256 checksum over its payload.
std::string serialize_checkpoint(const Checkpoint& checkpoint);

/// Throws `version_mismatch` for other format versions and `integrity` for
/// truncated, corrupt or tampered input.
Checkpoint parse_checkpoint(std::string_view data);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pco
