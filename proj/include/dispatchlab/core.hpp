#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dispatchlab {

// ============================================================================
// Errors
// ============================================================================

enum class errc : std::uint8_t {
  duplicate_name,
  empty_name,
  unknown_id,
  unregistered_type,
  reentrancy_limit_exceeded,
  duplicate_binding,
  unknown_parent,
  unknown_kind,
  unknown_instance,
  unknown_handle,
  duplicate_slot,
  unknown_slot,
  counter_mismatch,
  parse_error,
  validation_error,
};

constexpr std::string_view errc_name(errc code) noexcept {
  switch (code) {
    case errc::duplicate_name: return "DuplicateName";
    case errc::empty_name: return "EmptyName";
    case errc::unknown_id: return "UnknownId";
    case errc::unregistered_type: return "UnregisteredType";
    case errc::reentrancy_limit_exceeded: return "ReentrancyLimitExceeded";
    case errc::duplicate_binding: return "DuplicateBinding";
    case errc::unknown_parent: return "UnknownParent";
    case errc::unknown_kind: return "UnknownKind";
    case errc::unknown_instance: return "UnknownInstance";
    case errc::unknown_handle: return "UnknownHandle";
    case errc::duplicate_slot: return "DuplicateSlot";
    case errc::unknown_slot: return "UnknownSlot";
    case errc::counter_mismatch: return "CounterMismatch";
    case errc::parse_error: return "ParseError";
    case errc::validation_error: return "ValidationError";
  }
  return "UnknownError";
}

/// Library error: a code for programmatic checks plus a human message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

#if defined(__GNUC__) || defined(__clang__)
#define DISPATCHLAB_COLD __attribute__((cold, noinline))
#else
#define DISPATCHLAB_COLD
#endif

/// Out-of-line "<prefix><id><suffix>" error thrower. Dispatch fast paths call
/// this instead of concatenating strings inline, which keeps them small
/// enough for the compiler to inline into callers.
[[noreturn]] DISPATCHLAB_COLD inline void raise_with_id(errc code, const char* prefix,
                                                        std::uint64_t id, const char* suffix) {
  raise(code, std::string(prefix) + std::to_string(id) + suffix);
}

// ============================================================================
// Strong identity types
// ============================================================================

/// Opaque non-negative identity. Allocated monotonically, never recycled
/// within a run; distinct Tag types keep the id spaces from mixing.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  static constexpr Id invalid() noexcept { return Id{0xffffffffu}; }
  constexpr bool is_valid() const noexcept { return value != 0xffffffffu; }

  friend constexpr auto operator<=>(Id, Id) = default;
};

using MessageTypeId = Id<struct MessageTypeTag>;
using ComponentId = Id<struct ComponentTag>;
using HandlerId = Id<struct HandlerTag>;

// ============================================================================
// Message-type registry
// ============================================================================

/// Maps event-kind names to dense numeric ids. Ids are exactly 0..count-1 in
/// registration order, which lets dispatch tables be plain arrays indexed by
/// type id. Single-threaded; values handed out are immutable.
class MessageTypeRegistry {
 public:
  /// Registers a fresh name and returns the next dense id.
  MessageTypeId register_type(std::string_view name) {
    if (name.empty()) raise(errc::empty_name, "message type name must be non-empty");
    std::string key(name);
    if (index_.contains(key)) raise(errc::duplicate_name, "message type '" + key + "' already registered");
    const auto id = static_cast<std::uint32_t>(names_.size());
    index_.emplace(std::move(key), id);
    names_.emplace_back(name);
    limit_ = static_cast<std::uint32_t>(names_.size());
    return MessageTypeId{id};
  }

  /// Absence is a value, not an error.
  std::optional<MessageTypeId> lookup(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return MessageTypeId{it->second};
  }

  std::size_t count() const noexcept { return names_.size(); }

  bool contains(MessageTypeId id) const noexcept { return id.value < limit_; }

  const std::string& name_of(MessageTypeId id) const {
    if (!contains(id)) raise(errc::unregistered_type, "type id " + std::to_string(id.value) + " is not registered");
    return names_[id.value];
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint32_t limit_ = 0;  // == names_.size(); keeps contains() to one load
};

// ============================================================================
// Message & delivery records
// ============================================================================

/// The unit flowing through every dispatch model. The payload is an opaque
/// byte view no routing layer inspects; it stays valid for the duration of
/// the synchronous callback invocation it is delivered to.
struct Message {
  MessageTypeId msg_type;
  std::span<const std::byte> payload;
  ComponentId sender;
  std::uint64_t seq = 0;
};

enum class ModelTag : std::uint8_t { direct, os, msgmap, vtable };

constexpr std::string_view to_string(ModelTag tag) noexcept {
  switch (tag) {
    case ModelTag::direct: return "direct";
    case ModelTag::os: return "os";
    case ModelTag::msgmap: return "msgmap";
    case ModelTag::vtable: return "vtable";
  }
  return "?";
}

inline std::optional<ModelTag> model_tag_from(std::string_view text) noexcept {
  if (text == "direct") return ModelTag::direct;
  if (text == "os") return ModelTag::os;
  if (text == "msgmap") return ModelTag::msgmap;
  if (text == "vtable") return ModelTag::vtable;
  return std::nullopt;
}

/// One observed callback invocation, in real invocation order.
struct DeliveryRecord {
  std::uint64_t seq = 0;
  MessageTypeId msg_type;
  ComponentId sender;
  HandlerId receiver;
  ModelTag model = ModelTag::direct;

  friend constexpr bool operator==(const DeliveryRecord&, const DeliveryRecord&) = default;
};

using DeliveryLog = std::vector<DeliveryRecord>;

}  // namespace dispatchlab
