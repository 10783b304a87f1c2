#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#if defined(__linux__)
#include <sched.h>
#endif

#include <json.hpp>

#include "dispatchlab/core.hpp"
#include "dispatchlab/direct_bus.hpp"
#include "dispatchlab/msgmap_model.hpp"
#include "dispatchlab/os_emulation.hpp"
#include "dispatchlab/vtable_model.hpp"

namespace dispatchlab {

// ============================================================================
// Benchmark configuration and results
// ============================================================================

enum class BenchModel : std::uint8_t {
  direct,           ///< direct bus emit
  os_send,          ///< emulated OS synchronous send
  os_post_pump,     ///< emulated OS queued post + pump, drained in batches
  msgmap_over_os,   ///< cascading map dispatch behind an OS send (map receivers are windows)
  msgmap_dispatch,  ///< cascading map dispatch alone, isolating map-lookup cost
  vtable,           ///< sealed-catalog slot dispatch, swept over catalog sizes
};

inline std::string_view to_string(BenchModel model) noexcept {
  switch (model) {
    case BenchModel::direct: return "direct";
    case BenchModel::os_send: return "os_send";
    case BenchModel::os_post_pump: return "os_post_pump";
    case BenchModel::msgmap_over_os: return "msgmap_over_os";
    case BenchModel::msgmap_dispatch: return "msgmap_dispatch";
    case BenchModel::vtable: return "vtable";
  }
  return "?";
}

inline std::optional<BenchModel> bench_model_from(std::string_view name) noexcept {
  for (BenchModel m : {BenchModel::direct, BenchModel::os_send, BenchModel::os_post_pump, BenchModel::msgmap_over_os,
                       BenchModel::msgmap_dispatch, BenchModel::vtable}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

struct BenchConfig {
  std::vector<BenchModel> models = {BenchModel::direct, BenchModel::os_send, BenchModel::os_post_pump,
                                    BenchModel::msgmap_over_os, BenchModel::vtable};
  std::uint64_t message_count = 10'000'000;
  std::uint64_t warmup_count = 100'000;
  std::uint32_t repetitions = 5;
  std::uint32_t payload_size = 0;
  std::vector<std::size_t> vtable_catalog_sizes = {8, 64, 512};
  std::uint64_t queue_batch = 8192;  // post/pump drain granularity, bounds queue memory
  bool pin_thread = false;           // best-effort affinity to one CPU
};

struct BenchResult {
  std::string label;  // model name; vtable entries carry the catalog size, e.g. "vtable_c64"
  std::uint64_t message_count = 0;
  double elapsed_ms = 0;  // median over repetitions
  double min_ms = 0;
  double max_ms = 0;
  std::uint64_t rate = 0;                // floor(message_count / elapsed_ms)
  std::int64_t speedup_hundredths = 0;   // baseline_ms / elapsed_ms, truncated to 2 decimals
  double construct_ns = 0;               // per-handler construction cost where measured, else 0
  std::uint32_t repetitions = 0;
};

// ============================================================================
// Reported arithmetic
// ============================================================================
//
// Rates floor and speedups truncate (never round): these are the rules under
// which a report's rate and speedup rows are exactly recomputable from its
// elapsed row.

inline std::uint64_t bench_rate(std::uint64_t message_count, double elapsed_ms) {
  if (elapsed_ms <= 0) return 0;
  return static_cast<std::uint64_t>(static_cast<double>(message_count) / elapsed_ms);
}

inline std::int64_t speedup_hundredths(double baseline_ms, double elapsed_ms) {
  if (elapsed_ms <= 0) return 0;
  return static_cast<std::int64_t>(baseline_ms / elapsed_ms * 100.0);
}

/// 1398 -> "x13.98"
inline std::string speedup_string(std::int64_t hundredths) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "x%lld.%02lld", static_cast<long long>(hundredths / 100),
                static_cast<long long>(hundredths % 100));
  return buf;
}

// ============================================================================
// Measurement harness
// ============================================================================

namespace bench_detail {

/// Runs `body(n)` once for warmup and once per repetition, timing each
/// repetition with a monotonic clock. The delivery counter must equal the
/// requested count after every run: a mismatch means dispatch silently
/// dropped work (or the loop was optimized away) and no timing is reported.
template <class Body>
std::vector<double> timed_repetitions(const BenchConfig& config, volatile std::uint64_t& counter, Body&& body,
                                      std::string_view label) {
  auto verify = [&counter, label](std::uint64_t expected, const char* phase) {
    const std::uint64_t seen = counter;
    if (seen != expected) {
      raise(errc::counter_mismatch, std::string(label) + ": " + phase + " delivered " + std::to_string(seen) +
                                        " of " + std::to_string(expected) + " messages");
    }
  };
  if (config.warmup_count > 0) {
    counter = 0;
    body(config.warmup_count);
    verify(config.warmup_count, "warmup");
  }
  std::vector<double> times;
  times.reserve(config.repetitions);
  for (std::uint32_t rep = 0; rep < config.repetitions; ++rep) {
    counter = 0;
    const auto start = std::chrono::steady_clock::now();
    body(config.message_count);
    const auto stop = std::chrono::steady_clock::now();
    verify(config.message_count, "repetition");
    times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return times;
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

inline BenchResult make_result(std::string label, const BenchConfig& config, std::vector<double> times,
                               double construct_ns = 0) {
  BenchResult r;
  r.label = std::move(label);
  r.message_count = config.message_count;
  r.elapsed_ms = median(times);
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  r.min_ms = *lo;
  r.max_ms = *hi;
  r.rate = bench_rate(config.message_count, r.elapsed_ms);
  r.construct_ns = construct_ns;
  r.repetitions = config.repetitions;
  return r;
}

// Every workload below is the same two-party topology — one sender, one
// receiver accepting the benchmark type — and every receiving callback does
// the same work: one volatile counter increment.

inline BenchResult bench_direct(const BenchConfig& config) {
  MessageTypeRegistry registry;
  const MessageTypeId type = registry.register_type("bench.msg");
  DirectBus bus(registry);
  const ComponentId sender = bus.create_component();
  volatile std::uint64_t counter = 0;
  const HandlerId receiver =
      bus.create_handler({{type, [&counter](const Message&) { counter = counter + 1; }}});
  bus.subscribe(sender, receiver);
  const std::vector<std::byte> payload(config.payload_size);
  auto body = [&bus, sender, type, &payload](std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) bus.emit(sender, type, payload);
  };
  return make_result("direct", config, timed_repetitions(config, counter, body, "direct"));
}

inline BenchResult bench_os_send(const BenchConfig& config) {
  MessageTypeRegistry registry;
  const MessageTypeId type = registry.register_type("bench.msg");
  WindowSystem ws(registry);
  volatile std::uint64_t counter = 0;
  const WindowHandle win = ws.register_window({{type, [&counter](const Message&) { counter = counter + 1; }}});
  const std::vector<std::byte> payload(config.payload_size);
  auto body = [&ws, win, type, &payload](std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) ws.send(win, type, payload);
  };
  return make_result("os_send", config, timed_repetitions(config, counter, body, "os_send"));
}

inline BenchResult bench_os_post_pump(const BenchConfig& config) {
  MessageTypeRegistry registry;
  const MessageTypeId type = registry.register_type("bench.msg");
  WindowSystem ws(registry);
  volatile std::uint64_t counter = 0;
  const WindowHandle win = ws.register_window({{type, [&counter](const Message&) { counter = counter + 1; }}});
  const std::vector<std::byte> payload(config.payload_size);
  const std::uint64_t batch_size = std::max<std::uint64_t>(1, config.queue_batch);
  auto body = [&ws, win, type, &payload, batch_size](std::uint64_t n) {
    std::uint64_t remaining = n;
    while (remaining > 0) {
      const std::uint64_t batch = std::min(batch_size, remaining);
      for (std::uint64_t i = 0; i < batch; ++i) ws.post(win, type, payload);
      ws.pump();
      remaining -= batch;
    }
  };
  return make_result("os_post_pump", config, timed_repetitions(config, counter, body, "os_post_pump"));
}

inline BenchResult bench_msgmap_over_os(const BenchConfig& config) {
  MessageTypeRegistry registry;
  const MessageTypeId type = registry.register_type("bench.msg");
  MsgMapModel model(registry);
  volatile std::uint64_t counter = 0;
  const KindId kind =
      model.define_kind(std::nullopt, {{type, [&counter](HandlerId, const Message&) { counter = counter + 1; }}});
  const HandlerId instance = model.create_instance(kind);
  WindowSystem ws(registry);
  const WindowHandle win =
      ws.register_window_proc([&model, instance](const Message& m) { return model.dispatch(instance, m); });
  const std::vector<std::byte> payload(config.payload_size);
  auto body = [&ws, win, type, &payload](std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) ws.send(win, type, payload);
  };
  return make_result("msgmap_over_os", config, timed_repetitions(config, counter, body, "msgmap_over_os"));
}

inline BenchResult bench_msgmap_dispatch(const BenchConfig& config) {
  MessageTypeRegistry registry;
  const MessageTypeId type = registry.register_type("bench.msg");
  MsgMapModel model(registry);
  volatile std::uint64_t counter = 0;
  const KindId kind =
      model.define_kind(std::nullopt, {{type, [&counter](HandlerId, const Message&) { counter = counter + 1; }}});
  const HandlerId instance = model.create_instance(kind);
  const std::vector<std::byte> payload(config.payload_size);
  auto body = [&model, instance, type, &payload](std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) {
      model.dispatch(instance, Message{type, payload, ComponentId{0}, i});
    }
  };
  return make_result("msgmap_dispatch", config, timed_repetitions(config, counter, body, "msgmap_dispatch"));
}

inline BenchResult bench_vtable(const BenchConfig& config, std::size_t catalog_size) {
  MessageTypeRegistry registry;
  std::vector<MessageTypeId> types;
  types.reserve(catalog_size);
  for (std::size_t i = 0; i < catalog_size; ++i) types.push_back(registry.register_type("evt" + std::to_string(i)));
  const EventCatalog catalog(types);
  const MessageTypeId type = types[catalog_size / 2];

  // Per-handler construction cost: building a handler allocates one slot per
  // catalog entry, which is the cost the catalog size taxes even before any
  // dispatch happens.
  constexpr std::size_t kConstructSamples = 1000;
  volatile std::uint64_t sink = 0;
  const auto c0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < kConstructSamples; ++i) {
    TypedHandler h(HandlerId{static_cast<std::uint32_t>(i)}, catalog);
    sink = sink + h.slot_count();
  }
  const auto c1 = std::chrono::steady_clock::now();
  const double construct_ns =
      std::chrono::duration<double, std::nano>(c1 - c0).count() / static_cast<double>(kConstructSamples);

  volatile std::uint64_t counter = 0;
  TypedHandler handler(HandlerId{0}, catalog);
  handler.override_type(type, [&counter](const Message&) { counter = counter + 1; });
  const std::vector<std::byte> payload(config.payload_size);
  const std::string label = "vtable_c" + std::to_string(catalog_size);
  auto body = [&catalog, &handler, type, &payload](std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) {
      dispatch_typed(catalog, handler, Message{type, payload, ComponentId{0}, i});
    }
  };
  return make_result(label, config, timed_repetitions(config, counter, body, label), construct_ns);
}

inline void pin_current_thread() {
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(0, &set);
  (void)sched_setaffinity(0, sizeof(set), &set);  // best effort; failure is not an error
#endif
}

}  // namespace bench_detail

// ============================================================================
// Runner
// ============================================================================

/// Runs every selected model over the same count and repetition plan.
/// Speedups are relative to os_send when it is among the results, otherwise
/// to the first result (so a single-model run reports x1.00 against itself).
inline std::vector<BenchResult> run_bench(const BenchConfig& config) {
  if (config.message_count < 1) raise(errc::validation_error, "message_count must be at least 1");
  if (config.repetitions < 1) raise(errc::validation_error, "repetitions must be at least 1");
  if (config.models.empty()) raise(errc::validation_error, "no models selected");
  if (config.pin_thread) bench_detail::pin_current_thread();

  std::vector<BenchResult> results;
  for (BenchModel model : config.models) {
    switch (model) {
      case BenchModel::direct: results.push_back(bench_detail::bench_direct(config)); break;
      case BenchModel::os_send: results.push_back(bench_detail::bench_os_send(config)); break;
      case BenchModel::os_post_pump: results.push_back(bench_detail::bench_os_post_pump(config)); break;
      case BenchModel::msgmap_over_os: results.push_back(bench_detail::bench_msgmap_over_os(config)); break;
      case BenchModel::msgmap_dispatch: results.push_back(bench_detail::bench_msgmap_dispatch(config)); break;
      case BenchModel::vtable:
        for (std::size_t size : config.vtable_catalog_sizes) {
          results.push_back(bench_detail::bench_vtable(config, std::max<std::size_t>(1, size)));
        }
        break;
    }
  }

  double baseline_ms = results.front().elapsed_ms;
  for (const BenchResult& r : results) {
    if (r.label == "os_send") baseline_ms = r.elapsed_ms;
  }
  for (BenchResult& r : results) r.speedup_hundredths = speedup_hundredths(baseline_ms, r.elapsed_ms);
  return results;
}

// ============================================================================
// Reports
// ============================================================================

enum class ReportFormat : std::uint8_t { markdown, json, csv };

inline std::optional<ReportFormat> report_format_from(std::string_view name) noexcept {
  if (name == "markdown") return ReportFormat::markdown;
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  return std::nullopt;
}

namespace bench_detail {

inline std::string format_ms(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

inline std::string format_ns(double ns) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", ns);
  return buf;
}

inline std::string render_markdown(const std::vector<BenchResult>& results) {
  std::string out = "# Dispatch throughput\n\n";
  out += "Messages per run: " + std::to_string(results.front().message_count) + ". Elapsed is the median of " +
         std::to_string(results.front().repetitions) +
         " repetitions (repetition count is a harness default, tune with --reps); min/max below.\n\n";

  auto row = [&results](std::string_view head, auto&& cell) {
    std::string line = "| ";
    line += head;
    line += " |";
    for (const BenchResult& r : results) {
      line += ' ';
      line += cell(r);
      line += " |";
    }
    return line + "\n";
  };
  out += row("", [](const BenchResult& r) { return r.label; });
  {
    std::string line = "| --- |";
    for (std::size_t i = 0; i < results.size(); ++i) line += " ---: |";
    out += line + "\n";
  }
  out += row("total ms", [](const BenchResult& r) { return format_ms(r.elapsed_ms); });
  out += row("messages/ms", [](const BenchResult& r) { return std::to_string(r.rate); });
  out += row("speedup", [](const BenchResult& r) { return speedup_string(r.speedup_hundredths); });

  out += "\n| model | min ms | max ms |\n| --- | ---: | ---: |\n";
  for (const BenchResult& r : results) {
    out += "| " + r.label + " | " + format_ms(r.min_ms) + " | " + format_ms(r.max_ms) + " |\n";
  }

  bool any_construct = false;
  for (const BenchResult& r : results) any_construct = any_construct || r.construct_ns > 0;
  if (any_construct) {
    out += "\n| model | handler construction ns |\n| --- | ---: |\n";
    for (const BenchResult& r : results) {
      if (r.construct_ns > 0) out += "| " + r.label + " | " + format_ns(r.construct_ns) + " |\n";
    }
  }
  return out;
}

inline std::string render_json(const std::vector<BenchResult>& results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BenchResult& r : results) {
    nlohmann::ordered_json obj;
    obj["model"] = r.label;
    obj["n"] = r.message_count;
    obj["elapsed_ms"] = r.elapsed_ms;
    obj["rate"] = r.rate;
    obj["speedup"] = speedup_string(r.speedup_hundredths);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

inline std::string render_csv(const std::vector<BenchResult>& results) {
  std::string out = "model,n,elapsed_ms,rate,speedup\n";
  for (const BenchResult& r : results) {
    out += r.label + ',' + std::to_string(r.message_count) + ',' + format_ms(r.elapsed_ms) + ',' +
           std::to_string(r.rate) + ',' + speedup_string(r.speedup_hundredths) + '\n';
  }
  return out;
}

}  // namespace bench_detail

/// Deterministic text for the given results; the markdown variant is the
/// three-row throughput table (total ms / messages/ms / speedup) with one
/// column per model.
inline std::string render_report(const std::vector<BenchResult>& results, ReportFormat format) {
  if (results.empty()) raise(errc::validation_error, "no results to report");
  switch (format) {
    case ReportFormat::markdown: return bench_detail::render_markdown(results);
    case ReportFormat::json: return bench_detail::render_json(results);
    case ReportFormat::csv: return bench_detail::render_csv(results);
  }
  raise(errc::validation_error, "unknown report format");
}

}  // namespace dispatchlab
