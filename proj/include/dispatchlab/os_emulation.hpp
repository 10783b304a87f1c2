#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dispatchlab/core.hpp"
#include "dispatchlab/direct_bus.hpp"

namespace dispatchlab {

using WindowHandle = Id<struct WindowTag>;

/// Window procedure: receives every message addressed to the window and
/// returns true if the message was handled (bound in the receiver's map),
/// false if it fell through to the default sink.
using WindowProc = std::function<bool(const Message&)>;

/// Emulation of OS-mediated message routing: components are reachable only
/// through opaque window handles resolved in a global associative registry,
/// either synchronously (send) or via a central FIFO queue (post + pump).
///
/// Every delivery pays the full indirection chain the emulated platform
/// mandates:
///   1. associative registry lookup of the handle,
///   2. indirect call through the window-procedure thunk,
///   3. message-map lookup inside the receiver.
/// The chain is instrumented (counters()) so the structural overhead per
/// delivery is observable: exactly 2 associative lookups and 1 thunk call
/// for a map-backed window. No artificial delays anywhere.
///
/// Handles start at 0 and increase by 1 per registration; they are never
/// recycled. Single-threaded, same contract as DirectBus.
class WindowSystem {
 public:
  struct Counters {
    std::uint64_t registry_lookups = 0;
    std::uint64_t map_lookups = 0;
    std::uint64_t thunk_calls = 0;
    std::uint64_t delivered = 0;
    std::uint64_t unhandled = 0;
  };

  /// A queue entry skipped during pump because its handle did not resolve.
  struct PumpIncident {
    std::size_t entry_index;  // position in this pump's drain sequence
    WindowHandle handle;
  };

  explicit WindowSystem(const MessageTypeRegistry& registry) : registry_(&registry) {}

  WindowSystem(const WindowSystem&) = delete;
  WindowSystem& operator=(const WindowSystem&) = delete;
  WindowSystem(WindowSystem&&) = delete;
  WindowSystem& operator=(WindowSystem&&) = delete;

  /// Registers a window whose receiver owns a flat message map. Messages of
  /// unbound types fall to the counted default sink.
  WindowHandle register_window(std::vector<DirectBinding> bindings) {
    std::unordered_map<std::uint32_t, DirectCallback> map;
    map.reserve(bindings.size());
    for (auto& [type, cb] : bindings) {
      if (!map.emplace(type.value, std::move(cb)).second) {
        raise(errc::duplicate_binding, "type id " + std::to_string(type.value) + " bound twice");
      }
    }
    return register_window_proc([this, map = std::move(map)](const Message& msg) -> bool {
      ++counters_.map_lookups;
      auto it = map.find(msg.msg_type.value);
      if (it == map.end()) {
        ++counters_.unhandled;
        return false;
      }
      ++counters_.delivered;
      it->second(msg);
      return true;
    });
  }

  /// Registers a window with a caller-supplied procedure. Used when another
  /// dispatch layer rides the OS transport (e.g. cascading-map receivers).
  WindowHandle register_window_proc(WindowProc proc) {
    const std::uint32_t handle = next_handle_++;
    windows_.emplace(handle, Window{std::move(proc)});
    return WindowHandle{handle};
  }

  bool is_registered(WindowHandle handle) const { return windows_.contains(handle.value); }

  /// Synchronous delivery through the full indirection chain. Returns true
  /// if the receiver's map bound the type, false on default-sink fallthrough.
  bool send(WindowHandle handle, MessageTypeId msg_type, std::span<const std::byte> payload = {}) {
    require_registered_type(msg_type);
    ++counters_.registry_lookups;
    auto it = windows_.find(handle.value);
    if (it == windows_.end()) {
      raise_with_id(errc::unknown_handle, "window handle ", handle.value, " does not resolve");
    }
    const Message msg{msg_type, payload, ComponentId::invalid(), next_seq_++};
    ++counters_.thunk_calls;
    return it->second.proc(msg);
  }

  /// Enqueues without delivering. The handle is resolved at pump time, not
  /// post time, mirroring queued semantics.
  void post(WindowHandle handle, MessageTypeId msg_type, std::span<const std::byte> payload = {}) {
    require_registered_type(msg_type);
    queue_.push_back(QueuedEntry{handle, msg_type,
                                 std::vector<std::byte>(payload.begin(), payload.end()), next_seq_++});
  }

  /// Drains the queue in strict FIFO order through the same indirection
  /// chain as send(). Messages posted by callbacks during the pump are
  /// appended and drained in the same call. Entries whose handle does not
  /// resolve are recorded in last_pump_incidents() and skipped; they do not
  /// count toward the returned total.
  std::size_t pump() {
    last_pump_incidents_.clear();
    std::size_t processed = 0;
    std::size_t index = 0;
    while (!queue_.empty()) {
      QueuedEntry entry = std::move(queue_.front());
      queue_.pop_front();
      ++counters_.registry_lookups;
      auto it = windows_.find(entry.target.value);
      if (it == windows_.end()) {
        last_pump_incidents_.push_back(PumpIncident{index++, entry.target});
        continue;
      }
      const Message msg{entry.msg_type, entry.payload, ComponentId::invalid(), entry.seq};
      ++counters_.thunk_calls;
      it->second.proc(msg);
      ++processed;
      ++index;
    }
    return processed;
  }

  std::size_t queue_size() const noexcept { return queue_.size(); }
  std::span<const PumpIncident> last_pump_incidents() const noexcept { return last_pump_incidents_; }

  const Counters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_ = Counters{}; }

 private:
  struct Window {
    WindowProc proc;
  };

  struct QueuedEntry {
    WindowHandle target;
    MessageTypeId msg_type;
    std::vector<std::byte> payload;
    std::uint64_t seq;
  };

  void require_registered_type(MessageTypeId msg_type) const {
    if (!registry_->contains(msg_type)) {
      raise_with_id(errc::unregistered_type, "message type id ", msg_type.value, " is not registered");
    }
  }

  const MessageTypeRegistry* registry_;
  std::unordered_map<std::uint32_t, Window> windows_;
  std::deque<QueuedEntry> queue_;
  std::vector<PumpIncident> last_pump_incidents_;
  Counters counters_;
  std::uint32_t next_handle_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace dispatchlab
