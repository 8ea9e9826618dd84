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

#include "pco/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "pco/error.hpp"

namespace pco {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t as_count(const json& v) {
  if (!v.is_number_unsigned()) throw std::invalid_argument("expected a nonnegative integer");
  return v.get<std::size_t>();
}

double as_real(const json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  return v.get<double>();
}

bool as_bool(const json& v) {
  if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v) {
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

int as_int(const json& v) {
  if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
  const auto n = v.get<long long>();
  if (n < 0 || n > std::numeric_limits<int>::max()) throw std::invalid_argument("out of range");
  return static_cast<int>(n);
}

// Returns false for keys that are not TrainConfig fields.
bool apply_train_key(TrainConfig& c, const std::string& key, const json& v) {
  if (key == "k") c.k = as_count(v);
  else if (key == "s") c.s = as_count(v);
  else if (key == "alpha") c.alpha = as_real(v);
  else if (key == "tau") c.tau = as_real(v);
  else if (key == "epsilon0") c.epsilon0 = as_real(v);
  else if (key == "gamma") c.gamma = as_real(v);
  else if (key == "epsilon_min") c.epsilon_min = as_real(v);
  else if (key == "epochs") c.epochs = as_count(v);
  else if (key == "batch_size") c.batch_size = as_count(v);
  else if (key == "seed") {
    if (!v.is_number_unsigned()) throw std::invalid_argument("expected a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  } else if (key == "update_policy") c.update_policy = parse_update_policy(as_string(v));
  else if (key == "init") c.init = parse_init_strategy(as_string(v));
  else if (key == "seed_texts") {
    if (!v.is_array()) throw std::invalid_argument("expected an array of strings");
    c.seed_texts.clear();
    for (const json& t : v) c.seed_texts.push_back(as_string(t));
  } else if (key == "no_encoder") c.ablations.no_encoder = as_bool(v);
  else if (key == "no_textgrad") c.ablations.no_textgrad = as_bool(v);
  else if (key == "no_epsilon_greedy") c.ablations.no_epsilon_greedy = as_bool(v);
  else if (key == "uniform_sampling") c.ablations.uniform_sampling = as_bool(v);
  else if (key == "reward") c.reward.kind = parse_reward_kind(as_string(v));
  else if (key == "case_fold") c.reward.options.case_fold = as_bool(v);
  else if (key == "collapse_whitespace") c.reward.options.collapse_whitespace = as_bool(v);
  else if (key == "skip_threshold") c.skip_threshold = as_real(v);
  else return false;
  return true;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

void throw_collected(const std::vector<std::string>& problems, const std::string& where) {
  if (problems.empty()) return;
  std::string msg = where + " has " + std::to_string(problems.size()) + " problem(s):";
  for (const std::string& p : problems) msg += "\n  " + p;
  throw Error(ErrorCode::invalid_config, msg);
}

json parse_object(std::string_view text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, where + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, where + " must be a JSON object");
  return j;
}

// Runs validate() and turns its message into a key-level diagnostic.
void validate_into(const TrainConfig& c, std::vector<std::string>& problems) {
  try {
    c.validate();
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::remote ? "remote" : "scripted";
}

EngineConfig parse_engine_config(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = parse_object(text, "config");
  EngineConfig c;
  c.endpoint.endpoint = env_or_empty("PCO_ENDPOINT");
  c.endpoint.model = env_or_empty("PCO_MODEL");
  c.endpoint.api_key = env_or_empty("PCO_API_KEY");

  std::vector<std::string> problems;
  for (const auto& [key, value] : j.items()) {
    try {
      if (apply_train_key(c.train, key, value)) continue;
      if (key == "backend") {
        const std::string b = as_string(value);
        if (b == "remote") c.backend = BackendKind::remote;
        else if (b == "scripted") c.backend = BackendKind::scripted;
        else throw std::invalid_argument("expected \"remote\" or \"scripted\"");
      } else if (key == "fixture") {
        c.fixture = resolve(base_dir, as_string(value));
      } else if (key == "endpoint") {
        c.endpoint.endpoint = as_string(value);
      } else if (key == "model") {
        c.endpoint.model = as_string(value);
      } else if (key == "max_attempts") {
        c.max_attempts = as_int(value);
        if (c.max_attempts < 1) throw std::invalid_argument("must be at least 1");
      } else if (key == "backoff_ms") {
        c.backoff_ms = as_int(value);
      } else if (key == "timeout_s") {
        c.timeout_s = as_int(value);
        if (c.timeout_s < 1) throw std::invalid_argument("must be at least 1");
      } else if (key == "dataset") {
        c.dataset = resolve(base_dir, as_string(value));
      } else if (key == "out") {
        c.out = resolve(base_dir, as_string(value));
      } else if (key == "token_mode") {
        c.token_mode = parse_token_count_mode(as_string(value));
      } else if (key.starts_with("template_")) {
        const std::string name = key.substr(9);
        static const char* kNames[] = {
            "encoder_policy", "encoder_task",       "generator_policy", "generator_task",
            "critic_policy",  "critic_task",        "attribution_policy", "attribution_task",
            "updater_policy", "updater_task"};
        if (std::find(std::begin(kNames), std::end(kNames), name) == std::end(kNames)) {
          throw std::invalid_argument("no template named '" + name + "'");
        }
        c.templates[name] = resolve(base_dir, as_string(value));
      } else if (key.ends_with("_endpoint") || key.ends_with("_model")) {
        const bool is_endpoint = key.ends_with("_endpoint");
        const std::string role_name = key.substr(0, key.rfind('_'));
        const auto role = parse_role(role_name);
        if (!role) throw std::invalid_argument("unknown role '" + role_name + "'");
        (is_endpoint ? c.role_endpoints[*role].endpoint : c.role_endpoints[*role].model) =
            as_string(value);
      } else {
        problems.push_back(key + ": unknown key");
      }
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  validate_into(c.train, problems);
  if (c.backend == BackendKind::scripted && c.fixture.empty() && problems.empty()) {
    problems.push_back("fixture: required when backend is \"scripted\"");
  }
  throw_collected(problems, "config");
  return c;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  try {
    return parse_engine_config(text, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void apply_overrides(EngineConfig& c, const ConfigOverrides& o) {
  TrainConfig& t = c.train;
  if (o.k) t.k = *o.k;
  if (o.s) t.s = *o.s;
  if (o.epochs) t.epochs = *o.epochs;
  if (o.batch_size) t.batch_size = *o.batch_size;
  if (o.alpha) t.alpha = *o.alpha;
  if (o.tau) t.tau = *o.tau;
  if (o.epsilon0) t.epsilon0 = *o.epsilon0;
  if (o.gamma) t.gamma = *o.gamma;
  if (o.epsilon_min) t.epsilon_min = *o.epsilon_min;
  if (o.seed) t.seed = *o.seed;
  if (o.update_policy) t.update_policy = parse_update_policy(*o.update_policy);
  if (o.init) t.init = parse_init_strategy(*o.init);
  if (o.no_encoder) t.ablations.no_encoder = *o.no_encoder;
  if (o.no_textgrad) t.ablations.no_textgrad = *o.no_textgrad;
  if (o.no_epsilon_greedy) t.ablations.no_epsilon_greedy = *o.no_epsilon_greedy;
  if (o.uniform_sampling) t.ablations.uniform_sampling = *o.uniform_sampling;
  if (o.dataset) c.dataset = *o.dataset;
  if (o.out) c.out = *o.out;
  if (o.fixture) {
    c.fixture = *o.fixture;
    c.backend = BackendKind::scripted;
  }
  std::vector<std::string> problems;
  validate_into(t, problems);
  throw_collected(problems, "effective config");
}

namespace {

ordered_json train_json(const TrainConfig& c) {
  ordered_json j;
  j["k"] = c.k;
  j["s"] = c.s;
  j["alpha"] = c.alpha;
  j["tau"] = c.tau;
  j["epsilon0"] = c.epsilon0;
  j["gamma"] = c.gamma;
  j["epsilon_min"] = c.epsilon_min;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["update_policy"] = to_string(c.update_policy);
  j["init"] = to_string(c.init);
  j["seed_texts"] = c.seed_texts;
  j["no_encoder"] = c.ablations.no_encoder;
  j["no_textgrad"] = c.ablations.no_textgrad;
  j["no_epsilon_greedy"] = c.ablations.no_epsilon_greedy;
  j["uniform_sampling"] = c.ablations.uniform_sampling;
  j["reward"] = to_string(c.reward.kind);
  j["case_fold"] = c.reward.options.case_fold;
  j["collapse_whitespace"] = c.reward.options.collapse_whitespace;
  j["skip_threshold"] = c.skip_threshold;
  return j;
}

}  // namespace

std::string engine_config_json(const EngineConfig& c) {
  ordered_json j = train_json(c.train);
  j["backend"] = to_string(c.backend);
  if (c.backend == BackendKind::scripted) {
    j["fixture"] = c.fixture.string();
  } else {
    j["endpoint"] = c.endpoint.endpoint;
    j["model"] = c.endpoint.model;
    for (const auto& [role, ep] : c.role_endpoints) {
      if (!ep.endpoint.empty()) j[std::string(to_string(role)) + "_endpoint"] = ep.endpoint;
      if (!ep.model.empty()) j[std::string(to_string(role)) + "_model"] = ep.model;
    }
    j["max_attempts"] = c.max_attempts;
    j["backoff_ms"] = c.backoff_ms;
    j["timeout_s"] = c.timeout_s;
  }
  j["dataset"] = c.dataset.string();
  j["out"] = c.out.string();
  j["token_mode"] = to_string(c.token_mode);
  for (const auto& [name, path] : c.templates) j["template_" + name] = path.string();
  return j.dump(2);
}

std::string train_config_json(const TrainConfig& c) { return train_json(c).dump(); }

TrainConfig parse_train_config_json(std::string_view text) {
  const json j = parse_object(text, "train config");
  TrainConfig c;
  std::vector<std::string> problems;
  for (const auto& [key, value] : j.items()) {
    try {
      if (!apply_train_key(c, key, value)) problems.push_back(key + ": unknown key");
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  validate_into(c, problems);
  throw_collected(problems, "train config");
  return c;
}

}  // namespace pco
