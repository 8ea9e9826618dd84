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

#include "pco/run_log.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "pco/error.hpp"
#include "pco/text.hpp"

namespace pco {

using nlohmann::ordered_json;

std::string to_json_line(const StepRecord& record) {
  ordered_json j;
  j["step"] = record.step;
  j["epoch"] = record.epoch;
  j["example"] = record.example_id;
  j["route"] = record.route.indices;
  j["source"] = to_string(record.route.source);
  j["encoder_attempts"] = record.route.encoder_attempts;
  j["reward"] = record.reward;
  j["severity"] = record.severity ? ordered_json(*record.severity) : ordered_json(nullptr);
  j["updated"] = record.updated;
  j["prompt"] = record.prompt;
  j["response"] = record.response;
  return j.dump();
}

StepRecord parse_step_record(std::string_view line) {
  try {
    const ordered_json j = ordered_json::parse(line);
    StepRecord r;
    r.step = j.at("step").get<std::uint64_t>();
    r.epoch = j.at("epoch").get<std::size_t>();
    r.example_id = j.at("example").get<std::size_t>();
    r.route.indices = j.at("route").get<std::vector<std::size_t>>();
    r.route.source = parse_route_source(j.at("source").get<std::string>());
    r.route.encoder_attempts = j.value("encoder_attempts", 0);
    r.reward = j.at("reward").get<double>();
    if (!j.at("severity").is_null()) r.severity = j.at("severity").get<double>();
    r.updated = j.at("updated").get<std::vector<std::string>>();
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::integrity, std::string("malformed run-log record: ") + e.what());
  }
}

std::vector<StepRecord> read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read run log " + path.string());
  std::vector<StepRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      records.push_back(parse_step_record(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::integrity,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace pco
