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

#include "pco/error.hpp"

namespace pco {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_index: return "invalid-index";
    case ErrorCode::invalid_reward: return "invalid-reward";
    case ErrorCode::invalid_request: return "invalid-request";
    case ErrorCode::invalid_fixture: return "invalid-fixture";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_dataset: return "invalid-dataset";
    case ErrorCode::fixture_miss: return "fixture-miss";
    case ErrorCode::backend_unavailable: return "backend-unavailable";
    case ErrorCode::parse_failure: return "parse-failure";
    case ErrorCode::generation_failure: return "generation-failure";
    case ErrorCode::critic_failure: return "critic-failure";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::io: return "io";
    case ErrorCode::training_aborted: return "training-aborted";
  }
  return "unknown";
}

}  // namespace pco
