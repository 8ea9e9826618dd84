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

#include "pco/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "pco/config.hpp"
#include "pco/digest.hpp"
#include "pco/error.hpp"

namespace pco {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kFormat = "pco-checkpoint";

ordered_json counts_json(const std::array<std::uint64_t, kAllRoles.size()>& counts) {
  ordered_json j = ordered_json::object();
  for (Role role : kAllRoles) j[std::string(to_string(role))] = counts[static_cast<std::size_t>(role)];
  return j;
}

void read_counts(const ordered_json& j, std::array<std::uint64_t, kAllRoles.size()>& counts) {
  for (Role role : kAllRoles) {
    counts[static_cast<std::size_t>(role)] = j.at(std::string(to_string(role))).get<std::uint64_t>();
  }
}

ordered_json state_json(const RunState& s) {
  ordered_json j;
  j["epoch"] = s.epoch;
  j["cursor"] = s.cursor;
  j["order"] = s.order;
  j["skipped_in_epoch"] = s.skipped_in_epoch;
  j["steps_attempted"] = s.steps_attempted;
  j["steps_completed"] = s.steps_completed;
  j["schedule"] = {{"epsilon0", s.schedule.epsilon0()},
                   {"gamma", s.schedule.gamma()},
                   {"epsilon_min", s.schedule.epsilon_min()},
                   {"current", s.schedule.current()}};
  auto& book = j["codebook"] = ordered_json::array();
  for (const Instinct& e : s.codebook.entries()) {
    book.push_back({{"index", e.index},
                    {"text", e.text},
                    {"ema_success", e.ema_success},
                    {"usage_count", e.usage_count},
                    {"revision", e.revision}});
  }
  j["selection_counts"] = std::vector<std::uint64_t>(s.codebook.selection_counts().begin(),
                                                     s.codebook.selection_counts().end());
  j["trainables"] = {{"theta", s.trainables.theta},
                     {"phi", s.trainables.phi},
                     {"theta_revision", s.trainables.theta_revision},
                     {"phi_revision", s.trainables.phi_revision}};
  j["critic_prompt"] = s.critic_prompt;
  j["rng"] = s.rng.state();
  j["telemetry"] = {{"calls", counts_json(s.telemetry.calls)},
                    {"tokens_in", counts_json(s.telemetry.tokens_in)},
                    {"tokens_out", counts_json(s.telemetry.tokens_out)},
                    {"encoder_fallbacks", s.telemetry.encoder_fallbacks},
                    {"degraded_verdicts", s.telemetry.degraded_verdicts},
                    {"skipped_steps", s.telemetry.skipped_steps}};
  return j;
}

RunState parse_state(const ordered_json& j) {
  RunState s;
  s.epoch = j.at("epoch").get<std::size_t>();
  s.cursor = j.at("cursor").get<std::size_t>();
  s.order = j.at("order").get<std::vector<std::size_t>>();
  s.skipped_in_epoch = j.at("skipped_in_epoch").get<std::size_t>();
  s.steps_attempted = j.at("steps_attempted").get<std::uint64_t>();
  s.steps_completed = j.at("steps_completed").get<std::uint64_t>();
  const auto& sch = j.at("schedule");
  s.schedule = EpsilonSchedule::restore(sch.at("epsilon0").get<double>(),
                                        sch.at("gamma").get<double>(),
                                        sch.at("epsilon_min").get<double>(),
                                        sch.at("current").get<double>());
  std::vector<Instinct> entries;
  for (const auto& e : j.at("codebook")) {
    entries.push_back(Instinct{e.at("index").get<std::size_t>(), e.at("text").get<std::string>(),
                               e.at("ema_success").get<double>(),
                               e.at("usage_count").get<std::uint64_t>(),
                               e.at("revision").get<std::uint64_t>()});
  }
  s.codebook = Codebook::from_parts(std::move(entries),
                                    j.at("selection_counts").get<std::vector<std::uint64_t>>());
  const auto& t = j.at("trainables");
  s.trainables.theta = t.at("theta").get<std::string>();
  s.trainables.phi = t.at("phi").get<std::string>();
  s.trainables.theta_revision = t.at("theta_revision").get<std::uint64_t>();
  s.trainables.phi_revision = t.at("phi_revision").get<std::uint64_t>();
  s.critic_prompt = j.at("critic_prompt").get<std::string>();
  s.rng = Rng::from_state(j.at("rng").get<std::string>());
  const auto& tel = j.at("telemetry");
  read_counts(tel.at("calls"), s.telemetry.calls);
  read_counts(tel.at("tokens_in"), s.telemetry.tokens_in);
  read_counts(tel.at("tokens_out"), s.telemetry.tokens_out);
  s.telemetry.encoder_fallbacks = tel.at("encoder_fallbacks").get<std::uint64_t>();
  s.telemetry.degraded_verdicts = tel.at("degraded_verdicts").get<std::uint64_t>();
  s.telemetry.skipped_steps = tel.at("skipped_steps").get<std::uint64_t>();

  if (s.cursor > s.order.size() || (s.cursor > 0 && s.order.empty())) {
    throw Error(ErrorCode::integrity, "checkpoint cursor is outside the saved epoch order");
  }
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  ordered_json payload;
  payload["config"] = ordered_json::parse(train_config_json(checkpoint.config));
  payload["state"] = state_json(checkpoint.state);
  const std::string body = payload.dump();

  ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kCheckpointVersion;
  doc["sha256"] = sha256_hex(body);
  doc["payload"] = std::move(payload);
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view data) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(data);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::integrity, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kFormat) {
    throw Error(ErrorCode::integrity, "not a pco checkpoint");
  }
  const auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw Error(ErrorCode::integrity, "checkpoint has no version");
  }
  if (version->get<int>() != kCheckpointVersion) {
    throw Error(ErrorCode::version_mismatch,
                "checkpoint version " + std::to_string(version->get<int>()) +
                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  try {
    const ordered_json& payload = doc.at("payload");
    if (sha256_hex(payload.dump()) != doc.at("sha256").get<std::string>()) {
      throw Error(ErrorCode::integrity, "checkpoint checksum mismatch");
    }
    Checkpoint checkpoint;
    checkpoint.config = parse_train_config_json(payload.at("config").dump());
    checkpoint.state = parse_state(payload.at("state"));
    if (checkpoint.state.codebook.size() != checkpoint.config.k) {
      throw Error(ErrorCode::integrity, "checkpoint codebook size disagrees with k");
    }
    return checkpoint;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::integrity, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::integrity) throw;
    throw Error(ErrorCode::integrity, std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << serialize_checkpoint(checkpoint);
    out.flush();
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read checkpoint " + path.string());
  const std::string data{std::istreambuf_iterator<char>(in), {}};
  return parse_checkpoint(data);
}

}  // namespace pco
