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

#include "pco/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "pco/checkpoint.hpp"
#include "pco/config.hpp"
#include "pco/dataset.hpp"
#include "pco/digest.hpp"
#include "pco/error.hpp"
#include "pco/remote_backend.hpp"
#include "pco/scripted_backend.hpp"
#include "pco/text.hpp"

namespace pco::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Routes spdlog to the caller's error stream for the lifetime of a command.
class LogScope {
 public:
  LogScope(std::ostream& err, spdlog::level::level_enum level)
      : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    sink->set_pattern("[%l] %v");
    auto logger = std::make_shared<spdlog::logger>("pco", sink);
    logger->set_level(level);
    spdlog::set_default_logger(logger);
  }
  ~LogScope() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

struct CommonOptions {
  std::string config;
  ConfigOverrides overrides;
  std::string resume;
  std::optional<std::size_t> stop_after_epoch;
};

void add_overrides(CLI::App* cmd, CommonOptions& o) {
  ConfigOverrides& v = o.overrides;
  cmd->add_option("--seed", v.seed, "RNG seed");
  cmd->add_option("--out", v.out, "Output directory");
  cmd->add_option("--dataset", v.dataset, "Dataset JSONL");
  cmd->add_option("--k", v.k, "Codebook size");
  cmd->add_option("--s", v.s, "Instincts per route");
  cmd->add_option("--epochs", v.epochs);
  cmd->add_option("--batch-size", v.batch_size, "Steps between checkpoints");
  cmd->add_option("--alpha", v.alpha, "EMA rate");
  cmd->add_option("--tau", v.tau, "Exploration temperature");
  cmd->add_option("--epsilon0", v.epsilon0);
  cmd->add_option("--gamma", v.gamma, "Exploration decay");
  cmd->add_option("--epsilon-min", v.epsilon_min);
  cmd->add_option("--update-policy", v.update_policy, "gated | always");
  cmd->add_option("--init", v.init, "random | expert");
  cmd->add_option("--no-encoder", v.no_encoder)->expected(0, 1)->default_str("true");
  cmd->add_option("--no-textgrad", v.no_textgrad)->expected(0, 1)->default_str("true");
  cmd->add_option("--no-epsilon-greedy", v.no_epsilon_greedy)->expected(0, 1)->default_str("true");
  cmd->add_option("--uniform-sampling", v.uniform_sampling)->expected(0, 1)->default_str("true");
  cmd->add_option("--resume", o.resume, "Checkpoint to resume from");
  cmd->add_option("--stop-after-epoch", o.stop_after_epoch,
                  "Stop once this many epochs are complete");
}

std::unique_ptr<Backend> make_backend(const EngineConfig& c) {
  if (c.backend == BackendKind::scripted) {
    return std::make_unique<ScriptedBackend>(ScriptedBackend::load(c.fixture).rules());
  }
  RemoteSettings settings;
  settings.defaults = c.endpoint;
  settings.role_overrides = c.role_endpoints;
  settings.max_attempts = c.max_attempts;
  settings.backoff_base = std::chrono::milliseconds(c.backoff_ms);
  settings.timeout = std::chrono::seconds(c.timeout_s);
  return std::make_unique<RemoteBackend>(std::move(settings));
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

std::string epoch_file(std::size_t epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "epoch-%03zu.json", epoch);
  return name;
}

// Keeps only records the checkpoint already accounts for, so a resumed run
// appends to a log identical to the one an uninterrupted run would have.
void trim_run_log(const fs::path& path, std::uint64_t steps_attempted) {
  if (!fs::exists(path)) return;
  std::string kept;
  for (const StepRecord& r : read_run_log(path)) {
    if (r.step < steps_attempted) kept += to_json_line(r) + "\n";
  }
  write_file(path, kept);
}

std::string report_for(const fs::path& out_dir, const Codebook& codebook, TokenCountMode mode,
                       Backend* backend) {
  const std::vector<StepRecord> log = read_run_log(out_dir / "run_log.jsonl");
  if (log.empty()) throw Error(ErrorCode::invalid_request, "run log is empty; nothing to report");
  const RunSummary summary = summarize(log, codebook, mode, backend);
  write_file(out_dir / "report.json", summary_json(summary) + "\n");
  const std::string table = summary_table(summary);
  write_file(out_dir / "report.txt", table);
  return table;
}

// Shared by `train` and `simulate`; returns the run-log path.
fs::path run_training(const EngineConfig& config, const CommonOptions& options,
                      std::ostream& out) {
  out << "effective config:\n" << engine_config_json(config) << "\n";
  const std::vector<Example> dataset = load_dataset(config.dataset);
  const auto backend = make_backend(config);
  Trainer trainer(config.train, *backend, Templates::with_overrides(config.templates));

  const fs::path out_dir = config.out;
  const fs::path log_path = out_dir / "run_log.jsonl";
  fs::create_directories(out_dir / "checkpoints");
  write_file(out_dir / "config.json", engine_config_json(config) + "\n");

  RunState state;
  if (!options.resume.empty()) {
    Checkpoint checkpoint = load_checkpoint(options.resume);
    if (checkpoint.config.k != config.train.k || checkpoint.config.s != config.train.s ||
        checkpoint.config.seed != config.train.seed) {
      throw Error(ErrorCode::invalid_config,
                  "checkpoint was written with a different k, s or seed");
    }
    state = std::move(checkpoint.state);
    trim_run_log(log_path, state.steps_attempted);
    spdlog::info("resuming at epoch {} step {}", state.epoch + 1, state.cursor);
  } else {
    state = trainer.initial_state();
    write_file(log_path, "");
    save_checkpoint({config.train, state}, out_dir / "checkpoints" / epoch_file(0));
  }

  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  Trainer::Hooks hooks;
  hooks.on_step = [&](const StepRecord& record, const RunState&) {
    log << to_json_line(record) << '\n';
    log.flush();
  };
  hooks.on_checkpoint = [&](const RunState& s) {
    const Checkpoint checkpoint{config.train, s};
    save_checkpoint(checkpoint, out_dir / "checkpoint.json");
    if (s.cursor == 0) save_checkpoint(checkpoint, out_dir / "checkpoints" / epoch_file(s.epoch));
  };
  trainer.train(state, dataset, hooks, options.stop_after_epoch);
  log.close();

  const TelemetryCounts& t = state.telemetry;
  out << "steps " << state.steps_completed << "/" << state.steps_attempted << " completed, "
      << t.total_calls() << " model calls (target " << t.calls_for(Role::target) << ", critic "
      << t.calls_for(Role::critic) << ", updater " << t.calls_for(Role::updater) << ")\n";
  if (state.epoch >= config.train.epochs) {
    out << report_for(out_dir, state.codebook, config.token_mode, backend.get());
  }
  return log_path;
}

EngineConfig effective_config(const CommonOptions& o) {
  EngineConfig config = load_engine_config(o.config);
  apply_overrides(config, o.overrides);
  if (config.dataset.empty()) {
    throw Error(ErrorCode::invalid_config, "dataset: no dataset given in the config or --dataset");
  }
  return config;
}

ordered_json inference_json(std::string_view input, const InferenceResult& r) {
  ordered_json j;
  j["input"] = input;
  j["route"] = r.route.indices;
  j["prompt"] = r.prompt;
  j["response"] = r.response;
  return j;
}

std::vector<Instinct> sorted_rows(const Codebook& codebook, const std::string& key) {
  std::vector<Instinct> rows(codebook.entries().begin(), codebook.entries().end());
  if (key == "sr") {
    std::stable_sort(rows.begin(), rows.end(), [](const Instinct& a, const Instinct& b) {
      return a.ema_success > b.ema_success;
    });
  } else if (key == "usage") {
    std::stable_sort(rows.begin(), rows.end(), [](const Instinct& a, const Instinct& b) {
      return a.usage_count > b.usage_count;
    });
  }
  return rows;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt codebook optimization", "pco"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "Train a codebook and policies");
  train->add_option("--config", train_opts.config, "Config file")->required();
  add_overrides(train, train_opts);

  CommonOptions sim_opts;
  std::string sim_fixture;
  auto* simulate = app.add_subcommand("simulate", "Offline run on a scripted fixture");
  simulate->add_option("--fixture", sim_fixture, "Fixture JSONL")->required();
  simulate->add_option("--config", sim_opts.config, "Config file")->required();
  add_overrides(simulate, sim_opts);

  std::string ckpt_path, input_text, infer_dataset, infer_output, infer_config, infer_fixture;
  std::size_t jobs = 1;
  auto* infer_cmd = app.add_subcommand("infer", "Run the frozen pipeline on new inputs");
  infer_cmd->add_option("--checkpoint", ckpt_path)->required();
  auto* input_opt = infer_cmd->add_option("--input", input_text, "Single input text");
  auto* data_opt = infer_cmd->add_option("--dataset", infer_dataset, "Batch of inputs (JSONL)");
  input_opt->excludes(data_opt);
  infer_cmd->add_option("--output", infer_output, "Batch output JSONL (default stdout)");
  infer_cmd->add_option("--config", infer_config, "Config with backend settings");
  infer_cmd->add_option("--fixture", infer_fixture, "Use a scripted fixture as backend");
  infer_cmd->add_option("--jobs", jobs, "Concurrent inputs in batch mode")
      ->check(CLI::PositiveNumber);

  std::string inspect_ckpt, sort_key = "sr";
  auto* inspect = app.add_subcommand("inspect", "Print the codebook of a checkpoint");
  inspect->add_option("--checkpoint", inspect_ckpt)->required();
  inspect->add_option("--sort", sort_key, "sr | usage | id")
      ->check(CLI::IsMember({"sr", "usage", "id"}));

  std::string report_dir, report_mode = "approx", report_ckpt;
  auto* report = app.add_subcommand("report", "Summarize a finished run directory");
  report->add_option("--run", report_dir, "Output directory of a run")->required();
  report->add_option("--checkpoint", report_ckpt, "Checkpoint (default <run>/checkpoint.json)");
  report->add_option("--token-mode", report_mode, "approx | backend")
      ->check(CLI::IsMember({"approx", "backend"}));

  std::string export_ckpt, export_out;
  auto* export_cmd = app.add_subcommand("export", "Write the codebook as JSONL");
  export_cmd->add_option("--checkpoint", export_ckpt)->required();
  export_cmd->add_option("--output", export_out, "Destination (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  LogScope logging(err, verbose ? spdlog::level::debug
                                : quiet ? spdlog::level::warn : spdlog::level::info);
  try {
    if (train->parsed()) {
      run_training(effective_config(train_opts), train_opts, out);
    } else if (simulate->parsed()) {
      sim_opts.overrides.fixture = sim_fixture;
      EngineConfig config = effective_config(sim_opts);
      const fs::path log_path = run_training(config, sim_opts, out);
      out << "run-log sha256 " << sha256_file(log_path) << "\n";
    } else if (infer_cmd->parsed()) {
      if (input_text.empty() && infer_dataset.empty()) {
        throw Error(ErrorCode::invalid_request, "infer needs --input or --dataset");
      }
      const Checkpoint checkpoint = load_checkpoint(ckpt_path);
      EngineConfig config;
      if (!infer_config.empty()) config = load_engine_config(infer_config);
      if (!infer_fixture.empty()) {
        config.backend = BackendKind::scripted;
        config.fixture = infer_fixture;
      } else if (infer_config.empty()) {
        config.endpoint = RemoteSettings::from_env().defaults;
      }
      const auto backend = make_backend(config);
      Roles roles(*backend, Templates::with_overrides(config.templates));
      const RunState& st = checkpoint.state;

      if (!input_text.empty()) {
        const InferenceResult r =
            infer(input_text, st.codebook, st.trainables, checkpoint.config.s, roles);
        out << inference_json(input_text, r).dump() << "\n";
      } else {
        const std::vector<Example> inputs = load_dataset(infer_dataset);
        std::vector<std::string> lines(inputs.size());
        std::vector<std::string> failures(inputs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
          for (std::size_t i = next++; i < inputs.size(); i = next++) {
            try {
              lines[i] = inference_json(inputs[i].input,
                                        infer(inputs[i].input, st.codebook, st.trainables,
                                              checkpoint.config.s, roles))
                             .dump();
            } catch (const std::exception& e) {
              failures[i] = e.what();
            }
          }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < std::min(jobs, inputs.size()); ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < failures.size(); ++i) {
          if (!failures[i].empty()) {
            throw Error(ErrorCode::invalid_request,
                        "input " + std::to_string(i + 1) + ": " + failures[i]);
          }
        }
        std::string body;
        for (const std::string& l : lines) body += l + "\n";
        if (infer_output.empty()) {
          out << body;
        } else {
          write_file(infer_output, body);
          out << "wrote " << lines.size() << " records to " << infer_output << "\n";
        }
      }
    } else if (inspect->parsed()) {
      const Checkpoint checkpoint = load_checkpoint(inspect_ckpt);
      out << "  ID  Usage(n)   sr(%)  Instinct\n";
      for (const Instinct& e : sorted_rows(checkpoint.state.codebook, sort_key)) {
        char line[64];
        std::snprintf(line, sizeof line, "%4zu  %8llu  %6.2f  ", e.index,
                      static_cast<unsigned long long>(e.usage_count), 100.0 * e.ema_success);
        out << line << text::single_line(e.text) << "\n";
      }
    } else if (report->parsed()) {
      const fs::path dir = report_dir;
      const Checkpoint checkpoint =
          load_checkpoint(report_ckpt.empty() ? dir / "checkpoint.json" : fs::path(report_ckpt));
      std::unique_ptr<Backend> backend;
      const TokenCountMode mode = parse_token_count_mode(report_mode);
      if (mode == TokenCountMode::backend && !std::getenv("PCO_ENDPOINT")) {
        spdlog::warn("PCO_ENDPOINT is unset; token counts use the approximation");
      } else if (mode == TokenCountMode::backend) {
        backend = std::make_unique<RemoteBackend>(RemoteSettings::from_env());
      }
      out << report_for(dir, checkpoint.state.codebook, mode, backend.get());
    } else if (export_cmd->parsed()) {
      const Checkpoint checkpoint = load_checkpoint(export_ckpt);
      const std::string jsonl = checkpoint.state.codebook.export_jsonl();
      if (export_out.empty()) {
        out << jsonl;
      } else {
        write_file(export_out, jsonl);
      }
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pco::cli
