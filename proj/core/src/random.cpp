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

#include "pco/random.hpp"

#include <limits>
#include <sstream>

#include "pco/error.hpp"

namespace pco {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::invalid_config, "Rng::below called with n = 0");
  }
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

Rng Rng::from_state(std::string_view state) {
  Rng rng;
  std::istringstream in{std::string(state)};
  in >> rng.engine_;
  if (in.fail()) {
    throw Error(ErrorCode::integrity, "malformed RNG state");
  }
  in >> std::ws;
  if (!in.eof()) {
    throw Error(ErrorCode::integrity, "trailing data after RNG state");
  }
  return rng;
}

}  // namespace pco
