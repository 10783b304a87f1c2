#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dispatchlab/core.hpp"

namespace dispatchlab {

using DirectCallback = std::function<void(const Message&)>;
using DirectBinding = std::pair<MessageTypeId, DirectCallback>;

/// A handler's inbound message table: the set of message types it accepts,
/// one callback per type. Fixed at construction. Membership is a dense
/// array lookup keyed by type id, so it is O(1) and total: any id, including
/// one registered after the table was built, tests cleanly as absent.
class HandlerTable {
 public:
  HandlerTable() = default;

  explicit HandlerTable(std::vector<DirectBinding> bindings) {
    std::uint32_t max_id = 0;
    for (const auto& [type, cb] : bindings) max_id = std::max(max_id, type.value);
    if (!bindings.empty()) slots_.resize(static_cast<std::size_t>(max_id) + 1);
    for (auto& [type, cb] : bindings) {
      auto& slot = slots_[type.value];
      if (slot) raise(errc::duplicate_binding, "type id " + std::to_string(type.value) + " bound twice");
      slot = std::move(cb);
      ++binding_count_;
    }
  }

  const DirectCallback* find(MessageTypeId type) const noexcept {
    if (type.value >= slots_.size() || !slots_[type.value]) return nullptr;
    return &slots_[type.value];
  }

  bool contains(MessageTypeId type) const noexcept { return find(type) != nullptr; }
  std::size_t binding_count() const noexcept { return binding_count_; }

  /// The raw slot array (indexed by type id; unbound slots are empty
  /// callbacks). Stable for the table's lifetime, so callers may cache it.
  std::span<const DirectCallback> slots() const noexcept { return slots_; }

 private:
  std::vector<DirectCallback> slots_;
  std::size_t binding_count_ = 0;
};

/// Direct component-to-handler delivery: components hold ordered subscriber
/// lists, handlers hold immutable message tables, and emit() invokes the
/// accepting subscribers synchronously with no queue or central registry in
/// between.
///
/// Semantics:
///   - emit() dispatches over the subscriber list as it was at call entry;
///     subscriptions changed by a callback take effect from the next emit.
///   - Callbacks may emit reentrantly up to kMaxEmitDepth nested levels.
///   - A callback exception aborts the remaining deliveries of that emit and
///     propagates to the emit caller.
///
/// Single-threaded: all calls on one bus must come from one logical thread.
class DirectBus {
 public:
  static constexpr std::size_t kMaxEmitDepth = 64;

  explicit DirectBus(const MessageTypeRegistry& registry) : registry_(&registry) {}

  DirectBus(const DirectBus&) = delete;
  DirectBus& operator=(const DirectBus&) = delete;
  DirectBus(DirectBus&&) = delete;
  DirectBus& operator=(DirectBus&&) = delete;

  ComponentId create_component() {
    components_.push_back(Component{empty_list()});
    return ComponentId{static_cast<std::uint32_t>(components_.size() - 1)};
  }

  HandlerId create_handler(std::vector<DirectBinding> bindings) {
    handlers_.push_back(Handler{HandlerTable(std::move(bindings))});
    return HandlerId{static_cast<std::uint32_t>(handlers_.size() - 1)};
  }

  /// Appends the handler to the component's subscriber list. Idempotent:
  /// returns true if newly added, false if already subscribed.
  bool subscribe(ComponentId component, HandlerId handler) {
    Component& comp = component_at(component);
    require_handler(handler);
    const auto& current = *comp.subscribers;
    for (const Subscriber& s : current) {
      if (s.id == handler) return false;
    }
    auto next = std::make_shared<std::vector<Subscriber>>();
    next->reserve(current.size() + 1);
    next->assign(current.begin(), current.end());
    // The slot array is stable: handlers live in a deque and tables are
    // immutable, so emit indexes it directly with no handler lookup.
    next->push_back(Subscriber{handler, handlers_[handler.value].table.slots()});
    replace_subscribers(comp, std::move(next));
    return true;
  }

  /// Removes the handler if subscribed (true) else no-op (false). Relative
  /// order of the remaining subscribers is preserved.
  bool unsubscribe(ComponentId component, HandlerId handler) {
    Component& comp = component_at(component);
    require_handler(handler);
    const auto& current = *comp.subscribers;
    bool present = false;
    for (const Subscriber& s : current) {
      if (s.id == handler) {
        present = true;
        break;
      }
    }
    if (!present) return false;
    auto next = std::make_shared<std::vector<Subscriber>>();
    next->reserve(current.size() - 1);
    for (const Subscriber& s : current) {
      if (s.id != handler) next->push_back(s);
    }
    replace_subscribers(comp, std::move(next));
    return true;
  }

  /// Delivers directly to each accepting subscriber, in subscription order,
  /// and returns the number of callback invocations. Subscribers whose table
  /// does not contain msg_type are skipped silently.
  std::size_t emit(ComponentId sender, MessageTypeId msg_type, std::span<const std::byte> payload = {}) {
    if (sender.value >= components_.size()) {
      raise_with_id(errc::unknown_id, "component id ", sender.value, " does not exist");
    }
    if (!registry_->contains(msg_type)) {
      raise_with_id(errc::unregistered_type, "emit of unregistered type id ", msg_type.value, "");
    }
    if (++emit_depth_ > kMaxEmitDepth) {
      --emit_depth_;
      raise_with_id(errc::reentrancy_limit_exceeded, "nested emit depth would exceed ",
                    kMaxEmitDepth, "");
    }
    DepthGuard guard(*this);
    const Message msg{msg_type, payload, sender, next_seq_++};
    // Snapshot at entry: list replacements triggered by callbacks park the
    // old vector in retired_ until the outermost emit returns. Callbacks may
    // also grow components_, so no component reference is held past here.
    const std::vector<Subscriber>* subs = components_[sender.value].subscribers.get();
    std::size_t delivered = 0;
    for (const Subscriber& s : *subs) {
      if (msg_type.value < s.slots.size()) {
        if (const DirectCallback& cb = s.slots[msg_type.value]) {
          cb(msg);
          ++delivered;
        }
      }
    }
    return delivered;
  }

  std::vector<HandlerId> subscribers(ComponentId component) const {
    const Component& comp = component_at(component);
    std::vector<HandlerId> out;
    out.reserve(comp.subscribers->size());
    for (const Subscriber& s : *comp.subscribers) out.push_back(s.id);
    return out;
  }

  const HandlerTable& handler_table(HandlerId handler) const {
    require_handler(handler);
    return handlers_[handler.value].table;
  }

  std::size_t component_count() const noexcept { return components_.size(); }
  std::size_t handler_count() const noexcept { return handlers_.size(); }

 private:
  /// One entry per subscribed handler. Caches the handler's slot array so
  /// the emit loop indexes callbacks directly instead of re-resolving the
  /// handler id and table on every delivery.
  struct Subscriber {
    HandlerId id;
    std::span<const DirectCallback> slots;
  };

  using SubscriberList = std::shared_ptr<const std::vector<Subscriber>>;

  struct Component {
    SubscriberList subscribers;
  };
  struct Handler {
    HandlerTable table;
  };

  // The caller increments emit_depth_ (fused with the limit check); the
  // guard only restores it and frees retired lists at the outermost exit.
  struct DepthGuard {
    explicit DepthGuard(DirectBus& bus) : bus_(bus) {}
    ~DepthGuard() {
      if (--bus_.emit_depth_ == 0 && !bus_.retired_.empty()) bus_.retired_.clear();
    }
    DirectBus& bus_;
  };

  static SubscriberList empty_list() {
    static const SubscriberList empty = std::make_shared<const std::vector<Subscriber>>();
    return empty;
  }

  Component& component_at(ComponentId id) {
    if (id.value >= components_.size()) {
      raise(errc::unknown_id, "component id " + std::to_string(id.value) + " does not exist");
    }
    return components_[id.value];
  }

  const Component& component_at(ComponentId id) const {
    if (id.value >= components_.size()) {
      raise(errc::unknown_id, "component id " + std::to_string(id.value) + " does not exist");
    }
    return components_[id.value];
  }

  void require_handler(HandlerId id) const {
    if (id.value >= handlers_.size()) {
      raise(errc::unknown_id, "handler id " + std::to_string(id.value) + " does not exist");
    }
  }

  void replace_subscribers(Component& comp, SubscriberList next) {
    if (emit_depth_ > 0) retired_.push_back(std::move(comp.subscribers));
    comp.subscribers = std::move(next);
  }

  const MessageTypeRegistry* registry_;
  // Components may be created from inside a callback; emit never holds a
  // Component reference across an invocation, so vector growth is safe.
  std::vector<Component> components_;
  // Handlers must NOT move: Subscriber caches &handler.table.
  std::deque<Handler> handlers_;
  std::vector<SubscriberList> retired_;
  std::uint64_t next_seq_ = 0;
  std::uint32_t emit_depth_ = 0;
};

}  // namespace dispatchlab
