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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pco::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::vector<std::string_view> split_words(std::string_view s);
std::size_t count_words(std::string_view s);

// Replaces every `{name}` whose name is a key of `values`; other braces are
// left untouched.
std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values);

// Joins lines so a multi-line text fits on one listing line.
std::string single_line(std::string_view s);

}  // namespace pco::text
