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

#include "pco/dataset.hpp"

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "pco/error.hpp"
#include "pco/text.hpp"

namespace pco {

namespace {

Example parse_example(std::string_view line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  if (!j.is_object()) throw Error(ErrorCode::invalid_dataset, "record is not an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "input" && key != "reference" && key != "constraints" && key != "id") {
      throw Error(ErrorCode::invalid_dataset, "unknown field '" + key + "'");
    }
  }
  Example ex;
  ex.input = j.at("input").get<std::string>();
  if (text::trim(ex.input).empty()) throw Error(ErrorCode::invalid_dataset, "empty input");
  ex.reference = j.value("reference", std::string());
  if (const auto it = j.find("constraints"); it != j.end()) {
    for (const auto& c : *it) ex.constraints.push_back(Constraint::parse(c.get<std::string>()));
  }
  if (ex.reference.empty() && ex.constraints.empty()) {
    throw Error(ErrorCode::invalid_dataset, "record needs a reference or constraints");
  }
  return ex;
}

}  // namespace

std::vector<Example> parse_dataset(std::string_view jsonl) {
  std::vector<Example> examples;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      examples.push_back(parse_example(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::invalid_dataset,
                  "dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::invalid_dataset,
                  "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (examples.empty()) throw Error(ErrorCode::invalid_dataset, "dataset is empty");
  return examples;
}

std::vector<Example> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read dataset " + path.string());
  const std::string data{std::istreambuf_iterator<char>(in), {}};
  try {
    return parse_dataset(data);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace pco
