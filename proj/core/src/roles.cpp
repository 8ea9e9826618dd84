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

#include "pco/roles.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include <spdlog/spdlog.h>

#include "pco/error.hpp"
#include "pco/text.hpp"

namespace pco {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim_description(std::string_view s) {
  s = text::trim(s);
  // Findings written on one line are often separated by " / ".
  while (!s.empty() && (s.back() == '/' || s.back() == '|')) {
    s.remove_suffix(1);
    s = text::trim(s);
  }
  return s;
}

// Parses the number after "SEVERITY:" starting at `pos` in `s`.
std::optional<double> parse_severity_value(std::string_view s) {
  s = text::trim(s);
  std::size_t end = 0;
  while (end < s.size() && (is_digit(s[end]) || s[end] == '.' || s[end] == '-' ||
                            s[end] == '+' || s[end] == 'e' || s[end] == 'E')) {
    ++end;
  }
  if (end == 0) return std::nullopt;
  const std::string token(s.substr(0, end));
  char* stop = nullptr;
  const double v = std::strtod(token.c_str(), &stop);
  if (stop == token.c_str() || !std::isfinite(v)) return std::nullopt;
  return v;
}

Finding make_finding(std::string_view target, std::string_view description,
                     std::size_t k) {
  Finding f;
  f.description = std::string(trim_description(description));
  const std::string t = upper(text::trim(target));
  if (t == "GENERATOR") {
    f.target = TargetKind::generator;
  } else if (t == "ROUTING") {
    f.target = TargetKind::routing;
  } else if (t.rfind("INSTINCT", 0) == 0) {
    std::string_view rest = text::trim(std::string_view(t).substr(8));
    if (!rest.empty() && rest.front() == ':') rest = text::trim(rest.substr(1));
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), index);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && !rest.empty() && index < k) {
      f.target = TargetKind::instinct;
      f.instinct = index;
    }
  }
  return f;
}

std::string join_lines(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += '\n';
    out += p;
  }
  return out;
}

GenerationParams params_for(Role role, Phase phase) {
  return phase == Phase::inference ? GenerationParams::greedy(role)
                                   : GenerationParams::training(role);
}

}  // namespace

Trainables Trainables::from_templates(const Templates& templates) {
  return Trainables{templates.theta_default, templates.phi_default, 0, 0};
}

std::string VariableId::to_string() const {
  switch (kind) {
    case Kind::phi: return "phi";
    case Kind::theta: return "theta";
    case Kind::instinct: return "instinct:" + std::to_string(instinct);
  }
  return "unknown";
}

VariableId VariableId::parse(std::string_view s) {
  if (s == "phi") return phi_var();
  if (s == "theta") return theta_var();
  if (s.rfind("instinct:", 0) == 0) {
    const std::string_view digits = s.substr(9);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      return instinct_var(k);
    }
  }
  throw Error(ErrorCode::integrity, "unknown variable id '" + std::string(s) + "'");
}

std::string describe_variable(const VariableId& variable) {
  switch (variable.kind) {
    case VariableId::Kind::phi: return "composition policy";
    case VariableId::Kind::theta: return "routing policy";
    case VariableId::Kind::instinct: return "instinct " + std::to_string(variable.instinct);
  }
  return "unknown";
}

bool Finding::matches(const VariableId& variable) const {
  switch (target) {
    case TargetKind::generator: return variable.kind == VariableId::Kind::phi;
    case TargetKind::routing: return variable.kind == VariableId::Kind::theta;
    case TargetKind::instinct:
      return variable.kind == VariableId::Kind::instinct && variable.instinct == instinct;
    case TargetKind::unattributed: return false;
  }
  return false;
}

double scalarize(const Verdict& verdict) { return verdict.severity; }

std::optional<std::vector<long long>> parse_encoder_output(std::string_view completion) {
  std::vector<long long> out;
  std::size_t i = 0;
  while (i < completion.size()) {
    if (!is_digit(completion[i])) {
      ++i;
      continue;
    }
    const bool negative = i > 0 && completion[i - 1] == '-';
    const std::size_t start = i;
    while (i < completion.size() && is_digit(completion[i])) ++i;
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(completion.data() + start, completion.data() + i, value);
    if (ec == std::errc::result_out_of_range) value = std::numeric_limits<long long>::max();
    out.push_back(negative ? -value : value);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

Verdict parse_verdict(std::string_view text, std::size_t k) {
  Verdict v;
  v.raw = std::string(text);
  const std::string up = upper(text);

  // Findings: every "FINDING[" marker up to the next one.
  std::vector<std::size_t> marks;
  for (std::size_t pos = up.find("FINDING["); pos != std::string::npos;
       pos = up.find("FINDING[", pos + 8)) {
    marks.push_back(pos);
  }
  for (std::size_t m = 0; m < marks.size(); ++m) {
    const std::size_t open = marks[m] + 8;
    const std::size_t limit = m + 1 < marks.size() ? marks[m + 1] : up.size();
    const std::size_t close = up.find(']', open);
    if (close == std::string::npos || close >= limit) {
      v.findings.push_back(make_finding("GENERAL", text.substr(open, limit - open), k));
      continue;
    }
    std::size_t body = close + 1;
    while (body < limit && (up[body] == ' ' || up[body] == '\t')) ++body;
    if (body < limit && up[body] == ':') ++body;
    v.findings.push_back(
        make_finding(text.substr(open, close - open), text.substr(body, limit - body), k));
  }

  const std::size_t sev = up.find("SEVERITY");
  std::optional<double> severity;
  std::size_t preamble_start = 0;
  if (sev != std::string::npos && (marks.empty() || sev < marks.front())) {
    std::size_t p = sev + 8;
    while (p < up.size() && (up[p] == ' ' || up[p] == '\t')) ++p;
    if (p < up.size() && (up[p] == ':' || up[p] == '=')) {
      ++p;
      const std::size_t line_end = std::min(up.find('\n', p), marks.empty() ? up.size() : marks.front());
      severity = parse_severity_value(text.substr(p, line_end - p));
      // Skip the numeric token; whatever follows on later lines is preamble.
      std::size_t q = p;
      while (q < up.size() && (up[q] == ' ' || up[q] == '\t')) ++q;
      while (q < up.size() && (is_digit(up[q]) || up[q] == '.' || up[q] == '-' || up[q] == '+' ||
                               up[q] == 'E')) {
        ++q;
      }
      preamble_start = q;
    }
  }

  if (!severity) {
    v.degraded = true;
    v.severity = 0.5;
    if (v.findings.empty()) {
      const std::string_view body = text::trim(text);
      v.findings.push_back(Finding{TargetKind::unattributed, 0,
                                   body.empty() ? "(empty critic response)" : std::string(body)});
    }
    return v;
  }

  v.severity = std::clamp(*severity, 0.0, 1.0);
  if (v.findings.empty() && v.severity > 0.0) {
    const std::string_view rest =
        trim_description(text.substr(std::min(preamble_start, text.size())));
    char buf[96];
    std::snprintf(buf, sizeof buf, "Critic reported severity %.3g without findings.", v.severity);
    v.findings.push_back(Finding{TargetKind::unattributed, 0,
                                 rest.empty() ? std::string(buf) : std::string(rest)});
  }
  if (v.findings.empty()) v.severity = 0.0;
  return v;
}

std::string render_codebook_entries(const Codebook& codebook) {
  std::string out;
  for (const Instinct& e : codebook.entries()) {
    char sr[32];
    std::snprintf(sr, sizeof sr, " (sr=%.3f)", e.ema_success);
    if (!out.empty()) out += '\n';
    out += std::to_string(e.index) + ": " + text::single_line(e.text) + sr;
  }
  return out;
}

std::optional<std::vector<long long>> Roles::encode(std::string_view input,
                                                    const Codebook& codebook,
                                                    std::string_view theta,
                                                    std::size_t s, Phase phase) {
  ChatRequest request;
  request.role = Role::encoder;
  request.system_prompt = std::string(theta);
  request.user_content = text::render(templates_.encoder_task,
                                      {{"task", std::string(input)},
                                       {"codebook_entries", render_codebook_entries(codebook)},
                                       {"S", std::to_string(s)}});
  request.params = params_for(Role::encoder, phase);
  return parse_encoder_output(backend_.complete(request).text);
}

std::string Roles::generate_prompt(std::string_view input,
                                   std::span<const std::string> instinct_texts,
                                   std::string_view phi, Phase phase) {
  std::string listing;
  for (const std::string& t : instinct_texts) {
    if (!listing.empty()) listing += '\n';
    listing += "- " + text::single_line(t);
  }
  ChatRequest request;
  request.role = Role::generator;
  request.system_prompt = std::string(phi);
  request.user_content = text::render(
      templates_.generator_task,
      {{"task", std::string(input)}, {"active_instinct_texts", listing}});
  request.params = params_for(Role::generator, phase);
  std::string prompt = backend_.complete(request).text;
  if (text::trim(prompt).empty()) {
    throw Error(ErrorCode::generation_failure, "generator returned an empty prompt");
  }
  return prompt;
}

std::string Roles::execute_target(std::string_view prompt, std::string_view input,
                                  Phase phase) {
  ChatRequest request;
  request.role = Role::target;
  request.system_prompt = std::string(prompt);
  request.user_content = std::string(input);
  request.params = params_for(Role::target, phase);
  return backend_.complete(request).text;
}

Verdict Roles::critique(std::string_view response, std::string_view input,
                        std::string_view prompt, std::string_view reference,
                        std::span<const std::size_t> active, const Codebook& codebook) {
  std::string listing;
  for (std::size_t k : active) {
    if (!listing.empty()) listing += '\n';
    listing += std::to_string(k) + ": " + text::single_line(codebook.at(k).text);
  }
  ChatRequest request;
  request.role = Role::critic;
  request.system_prompt = templates_.critic_policy;
  request.user_content = text::render(templates_.critic_task,
                                      {{"task", std::string(input)},
                                       {"active_instincts", listing},
                                       {"prompt", std::string(prompt)},
                                       {"model_response", std::string(response)},
                                       {"reference", std::string(reference)}});
  request.params = GenerationParams::training(Role::critic);
  const std::string raw = backend_.complete(request).text;
  if (text::trim(raw).empty()) {
    throw Error(ErrorCode::critic_failure, "critic returned an empty verdict");
  }
  Verdict verdict = parse_verdict(raw, codebook.size());
  if (verdict.degraded) {
    backend_.telemetry().record_degraded_verdict();
    spdlog::warn("critic output did not follow the SEVERITY/FINDING protocol");
  }
  return verdict;
}

TextGradient Roles::attribute(const Verdict& verdict, const VariableId& variable,
                              std::string_view current_text) {
  TextGradient gradient{variable, {}, false};
  std::vector<std::string> targeted;
  bool has_unattributed = false;
  for (const Finding& f : verdict.findings) {
    if (f.matches(variable)) targeted.push_back(f.description);
    if (f.target == TargetKind::unattributed) has_unattributed = true;
  }
  if (!targeted.empty()) {
    gradient.critique = join_lines(targeted);
    return gradient;
  }
  if (!has_unattributed) return gradient;

  ChatRequest request;
  request.role = Role::attribution;
  request.system_prompt = templates_.attribution_policy;
  request.user_content = text::render(templates_.attribution_task,
                                      {{"variable", describe_variable(variable)},
                                       {"current_text", std::string(current_text)},
                                       {"verdict", verdict.raw}});
  request.params = GenerationParams::training(Role::attribution);
  gradient.from_attribution_call = true;
  try {
    const std::string scoped(text::trim(backend_.complete(request).text));
    std::string marker = upper(scoped);
    while (!marker.empty() && marker.back() == '.') marker.pop_back();
    if (marker != "NONE") gradient.critique = scoped;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::backend_unavailable) throw;
    spdlog::warn("attribution for {} failed: {}", variable.to_string(), e.what());
  }
  return gradient;
}

std::string Roles::apply_textgrad(const VariableId& variable, std::string_view current_text,
                                  const TextGradient& gradient) {
  ChatRequest request;
  request.role = Role::updater;
  request.system_prompt = templates_.updater_policy;
  request.user_content = text::render(templates_.updater_task,
                                      {{"variable", describe_variable(variable)},
                                       {"current_text", std::string(current_text)},
                                       {"critique", gradient.critique}});
  request.params = GenerationParams::training(Role::updater);
  try {
    const Completion completion = backend_.complete(request);
    const std::string_view revised = text::trim(completion.text);
    if (revised.empty()) {
      spdlog::warn("updater returned nothing for {}; keeping current text", variable.to_string());
      return std::string(current_text);
    }
    return std::string(revised);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::backend_unavailable) throw;
    spdlog::warn("update of {} failed: {}", variable.to_string(), e.what());
    return std::string(current_text);
  }
}

}  // namespace pco
