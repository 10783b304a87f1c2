#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "dispatchlab/core.hpp"

namespace dispatchlab {

/// An immutable, sealed list of message types fixed at construction. Every
/// handler built against the catalog carries one callback slot per entry,
/// mirroring a base class that pre-declares a virtual method for each event
/// it will ever support. Types outside the catalog cannot be dispatched
/// through it at all.
class EventCatalog {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit EventCatalog(std::vector<MessageTypeId> types) : types_(std::move(types)) {
    for (std::size_t slot = 0; slot < types_.size(); ++slot) {
      const std::uint32_t raw = types_[slot].value;
      if (raw >= slot_of_.size()) slot_of_.resize(raw + 1, npos);
      if (slot_of_[raw] != npos) {
        raise(errc::duplicate_slot, "type id " + std::to_string(raw) + " appears twice in catalog");
      }
      slot_of_[raw] = slot;
    }
  }

  /// Slot index for the type, or npos when the catalog does not carry it.
  std::size_t slot_of(MessageTypeId msg_type) const noexcept {
    if (!msg_type.is_valid() || msg_type.value >= slot_of_.size()) return npos;
    return slot_of_[msg_type.value];
  }

  bool contains(MessageTypeId msg_type) const noexcept { return slot_of(msg_type) != npos; }

  MessageTypeId slot_type(std::size_t slot) const {
    if (slot >= types_.size()) {
      raise(errc::unknown_slot, "slot " + std::to_string(slot) + " out of range");
    }
    return types_[slot];
  }

  std::size_t size() const noexcept { return types_.size(); }

 private:
  std::vector<MessageTypeId> types_;
  std::vector<std::size_t> slot_of_;  // dense: raw type id -> slot or npos
};

using SlotCallback = std::function<void(const Message&)>;

/// A handler whose callback table is shaped by an EventCatalog: one slot per
/// catalog entry, each starting as a counted no-op default. Overriding a slot
/// replaces the default; there is no way to add a slot the catalog did not
/// declare, which is the defining restriction of this model.
class TypedHandler {
 public:
  TypedHandler(HandlerId id, const EventCatalog& catalog)
      : id_(id), catalog_(&catalog), slots_(catalog.size()), overridden_(catalog.size(), false) {}

  void override_slot(std::size_t slot, SlotCallback callback) {
    if (slot >= slots_.size()) {
      raise(errc::unknown_slot, "slot " + std::to_string(slot) + " out of range");
    }
    slots_[slot] = std::move(callback);
    overridden_[slot] = true;
  }

  void override_type(MessageTypeId msg_type, SlotCallback callback) {
    const std::size_t slot = catalog_->slot_of(msg_type);
    if (slot == EventCatalog::npos) {
      raise(errc::unknown_slot, "type id " + std::to_string(msg_type.value) + " has no slot in catalog");
    }
    override_slot(slot, std::move(callback));
  }

  bool is_overridden(std::size_t slot) const { return slot < overridden_.size() && overridden_[slot]; }

  HandlerId id() const noexcept { return id_; }
  const EventCatalog& catalog() const noexcept { return *catalog_; }
  std::size_t slot_count() const noexcept { return slots_.size(); }
  std::uint64_t default_hits() const noexcept { return default_hits_; }

 private:
  friend struct TypedDispatch;

  HandlerId id_;
  const EventCatalog* catalog_;
  std::vector<SlotCallback> slots_;    // empty function == counted default
  std::vector<char> overridden_;
  std::uint64_t default_hits_ = 0;
};

enum class TypedOutcome : std::uint8_t {
  overridden,       ///< an overriding callback ran
  default_handled,  ///< the slot exists but still holds the counted no-op
  outside_catalog,  ///< the type has no slot; nothing ran
};

struct TypedDispatch {
  /// Total over every message: types without a slot are absorbed as
  /// outside_catalog rather than raising. The caller's handler must have been
  /// built against the same catalog.
  static TypedOutcome dispatch(const EventCatalog& catalog, TypedHandler& handler, const Message& msg) {
    const std::size_t slot = catalog.slot_of(msg.msg_type);
    if (slot == EventCatalog::npos) return TypedOutcome::outside_catalog;
    SlotCallback& cb = handler.slots_[slot];
    if (!cb) {
      ++handler.default_hits_;
      return TypedOutcome::default_handled;
    }
    cb(msg);
    return TypedOutcome::overridden;
  }
};

inline TypedOutcome dispatch_typed(const EventCatalog& catalog, TypedHandler& handler, const Message& msg) {
  return TypedDispatch::dispatch(catalog, handler, msg);
}

}  // namespace dispatchlab
