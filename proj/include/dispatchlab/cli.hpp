#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dispatchlab/bench.hpp"
#include "dispatchlab/oracle.hpp"
#include "dispatchlab/runner.hpp"
#include "dispatchlab/scenario.hpp"
#include "dispatchlab/scenario_gen.hpp"

namespace dispatchlab {

inline constexpr std::string_view kCliName = "dispatchlab";
inline constexpr std::string_view kCliVersion = "0.1.0";

// Exit codes: 0 success, 1 runtime/check failure, 2 usage error.

namespace cli_detail {

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

/// Usage errors (bad input shape) exit 2; anything the input legitimately
/// triggered at runtime exits 1.
inline int exit_code_for(const Error& e) {
  return e.code() == errc::parse_error || e.code() == errc::validation_error ? 2 : 1;
}

inline std::optional<std::vector<BenchModel>> parse_model_list(const std::string& text, std::ostream& err) {
  std::vector<BenchModel> models;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string name = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? text.size() + 1 : comma + 1;
    if (name.empty()) continue;
    const std::optional<BenchModel> model = bench_model_from(name);
    if (!model) {
      err << "unknown model '" << name
          << "' (expected direct, os_send, os_post_pump, msgmap_over_os, msgmap_dispatch, or vtable)\n";
      return std::nullopt;
    }
    bool present = false;
    for (BenchModel m : models) present = present || m == *model;
    if (!present) models.push_back(*model);
  }
  if (models.empty()) {
    err << "--models selects no model\n";
    return std::nullopt;
  }
  return models;
}

struct BenchFlags {
  std::string models = "direct,os_send,os_post_pump,msgmap_over_os,vtable";
  std::uint64_t messages = 10'000'000;
  std::uint64_t warmup = 100'000;
  std::uint32_t reps = 5;
  std::uint32_t payload = 0;
  std::uint64_t batch = 8192;
  std::string format = "markdown";
  std::string out_path;
  bool pin = false;
};

inline int do_bench(const BenchFlags& flags, bool plain, std::ostream& out, std::ostream& err) {
  const auto models = parse_model_list(flags.models, err);
  if (!models) return 2;
  BenchConfig config;
  config.models = *models;
  config.message_count = flags.messages;
  config.warmup_count = flags.warmup;
  config.repetitions = flags.reps;
  config.payload_size = flags.payload;
  config.queue_batch = flags.batch;
  config.pin_thread = flags.pin;

  std::string report;
  try {
    report = render_report(run_bench(config), *report_format_from(flags.format));
  } catch (const Error& e) {
    err << e.what() << "\n";  // what() already starts with the error name
    return exit_code_for(e);
  }
  if (flags.out_path.empty()) {
    out << report;
  } else {
    if (!write_file(flags.out_path, report)) {
      err << "cannot write report to '" << flags.out_path << "'\n";
      return 2;
    }
    if (!plain) err << "report written to " << flags.out_path << "\n";
  }
  return 0;
}

struct RunFlags {
  std::string model;
  std::string scenario_path;
  std::string log_path;
};

inline int do_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const std::optional<ModelTag> model = model_tag_from(flags.model);
  if (!model) {
    err << "unknown model '" << flags.model << "' (expected direct, os, msgmap, or vtable)\n";
    return 2;
  }
  const auto text = cli_detail::read_file(flags.scenario_path);
  if (!text) {
    err << "cannot read scenario file '" << flags.scenario_path << "'\n";
    return 2;
  }
  std::string formatted;
  try {
    const Scenario scenario = parse_scenario(*text);
    formatted = format_delivery_log(run_scenario(*model, scenario));
  } catch (const Error& e) {
    err << e.what() << "\n";  // what() already starts with the error name
    return exit_code_for(e);
  }
  if (flags.log_path.empty()) {
    out << formatted;
  } else if (!write_file(flags.log_path, formatted)) {
    err << "cannot write log to '" << flags.log_path << "'\n";
    return 2;
  }
  return 0;
}

struct OracleCheckFlags {
  std::string scenario_path;
  std::uint32_t random_count = 0;
  std::uint64_t seed = 1;
  bool queued = false;
  bool corrupt_record = false;  // test fixture: perturbs the model log to force a divergence
};

inline std::optional<std::size_t> first_divergence(const DeliveryLog& a, const DeliveryLog& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] == b[i])) return i;
  }
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

inline std::optional<std::size_t> first_projection_divergence(const DeliveryLog& a, const DeliveryLog& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].receiver != b[i].receiver || a[i].seq != b[i].seq) return i;
  }
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

inline std::string record_or_absent(const DeliveryLog& log, std::size_t index) {
  return index < log.size() ? format_delivery_record(log[index]) : std::string("<absent>");
}

/// Checks one scenario against the oracle. Returns true when all comparable
/// logs match; prints a divergence report otherwise.
inline bool check_one(const Scenario& scenario, const std::string& label, bool corrupt, std::ostream& out) {
  const DeliveryLog oracle = oracle_deliveries(scenario);

  bool has_queued_actions = false;
  for (const Action& action : scenario.script) {
    has_queued_actions = has_queued_actions || action.kind == ActionKind::post || action.kind == ActionKind::pump;
  }

  bool ok = true;
  if (!has_queued_actions) {
    DeliveryLog direct = run_scenario(ModelTag::direct, scenario);
    if (corrupt) {
      if (direct.empty()) {
        direct.push_back(DeliveryRecord{0, MessageTypeId{0}, ComponentId{0}, HandlerId{0}, ModelTag::direct});
      } else {
        direct[0].receiver.value += 1;
      }
    }
    if (const auto at = first_divergence(direct, oracle)) {
      out << label << ": direct log diverges from oracle at record " << *at << "\n"
          << "  direct: " << record_or_absent(direct, *at) << "\n"
          << "  oracle: " << record_or_absent(oracle, *at) << "\n";
      ok = false;
    }
  }

  const DeliveryLog os = run_scenario(ModelTag::os, scenario);
  if (const auto at = first_projection_divergence(os, oracle)) {
    out << label << ": os log diverges from oracle on (receiver, seq) at record " << *at << "\n"
        << "  os:     " << record_or_absent(os, *at) << "\n"
        << "  oracle: " << record_or_absent(oracle, *at) << "\n";
    ok = false;
  }
  return ok;
}

inline int do_oracle_check(const OracleCheckFlags& flags, std::ostream& out, std::ostream& err) {
  std::size_t checked = 0;
  std::size_t failed = 0;
  try {
    if (!flags.scenario_path.empty()) {
      const auto text = read_file(flags.scenario_path);
      if (!text) {
        err << "cannot read scenario file '" << flags.scenario_path << "'\n";
        return 2;
      }
      const Scenario scenario = parse_scenario(*text);
      ++checked;
      if (!check_one(scenario, flags.scenario_path, flags.corrupt_record, out)) ++failed;
    } else {
      GenLimits limits;
      limits.queued_actions = flags.queued;
      for (std::uint32_t i = 0; i < flags.random_count; ++i) {
        const std::uint64_t seed = flags.seed + i;
        const Scenario scenario = generate_scenario(seed, limits);
        ++checked;
        if (!check_one(scenario, "seed " + std::to_string(seed), flags.corrupt_record, out)) ++failed;
      }
    }
  } catch (const Error& e) {
    err << e.what() << "\n";  // what() already starts with the error name
    return exit_code_for(e);
  }
  if (failed > 0) {
    out << failed << " of " << checked << " scenario(s) diverged\n";
    return 1;
  }
  out << "checked " << checked << " scenario(s): all logs match the oracle\n";
  return 0;
}

}  // namespace cli_detail

/// Parses and executes one CLI invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"in-process message dispatch models: benchmarks, scenario runs, oracle checks"};
  app.name(std::string(kCliName));
  app.require_subcommand(1);
  bool plain = false;
  app.add_flag("--plain", plain, "suppress status chatter on stderr");

  cli_detail::BenchFlags bench_flags;
  CLI::App* bench_cmd = app.add_subcommand("bench", "measure dispatch throughput per model");
  bench_cmd->add_option("--models", bench_flags.models, "comma-separated model list")->capture_default_str();
  bench_cmd->add_option("--messages", bench_flags.messages, "messages per repetition")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", bench_flags.warmup, "untimed messages before the first repetition")
      ->capture_default_str();
  bench_cmd->add_option("--reps", bench_flags.reps, "timed repetitions; the median is reported")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--payload", bench_flags.payload, "payload bytes per message")->capture_default_str();
  bench_cmd->add_option("--batch", bench_flags.batch, "queued messages per pump in os_post_pump")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--format", bench_flags.format, "report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"markdown", "json", "csv"}));
  bench_cmd->add_option("--out", bench_flags.out_path, "write the report to a file instead of stdout");
  bench_cmd->add_flag("--pin", bench_flags.pin, "pin the benchmark thread to one CPU (best effort)");

  cli_detail::RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario under one model and print its delivery log");
  run_cmd->add_option("--model", run_flags.model, "direct, os, msgmap, or vtable")->required();
  run_cmd->add_option("--scenario", run_flags.scenario_path, "scenario file")->required();
  run_cmd->add_option("--log", run_flags.log_path, "write the delivery log to a file instead of stdout");

  cli_detail::OracleCheckFlags check_flags;
  CLI::App* check_cmd = app.add_subcommand("oracle-check", "compare model delivery logs against the oracle");
  CLI::Option* opt_scenario = check_cmd->add_option("--scenario", check_flags.scenario_path, "scenario file to check");
  CLI::Option* opt_random =
      check_cmd->add_option("--random", check_flags.random_count, "check N generated scenarios")
          ->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", check_flags.seed, "first seed for --random")->capture_default_str()->needs(opt_random);
  check_cmd->add_flag("--queued", check_flags.queued, "let generated scenarios use post/pump")->needs(opt_random);
  check_cmd->add_flag("--corrupt-record", check_flags.corrupt_record)->group("");  // test fixture, hidden
  opt_scenario->excludes(opt_random);

  CLI::App* version_cmd = app.add_subcommand("version", "print the tool name and version");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kCliName.data());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (*version_cmd) {
    out << kCliName << " " << kCliVersion << "\n";
    return 0;
  }
  if (*bench_cmd) return cli_detail::do_bench(bench_flags, plain, out, err);
  if (*run_cmd) return cli_detail::do_run(run_flags, out, err);
  if (*check_cmd) {
    if (check_flags.scenario_path.empty() && check_flags.random_count == 0) {
      err << "oracle-check needs --scenario <file> or --random <count>\n";
      return 2;
    }
    return cli_detail::do_oracle_check(check_flags, out, err);
  }
  err << "no subcommand given\n";
  return 2;
}

}  // namespace dispatchlab
