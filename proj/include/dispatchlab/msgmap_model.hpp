#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dispatchlab/core.hpp"

namespace dispatchlab {

using KindId = Id<struct KindTag>;

/// Map callbacks receive the dispatching instance alongside the message,
/// because the map itself is shared by every instance of the kind.
using KindCallback = std::function<void(HandlerId instance, const Message&)>;
using KindBinding = std::pair<MessageTypeId, KindCallback>;

/// Cascading static message maps: handler kinds form single-parent chains;
/// each kind owns exactly one map shared by all of its instances; dispatch
/// walks the chain from the instance's kind upward and the nearest binding
/// wins. Bindings are not virtual: a child kind that does not re-register a
/// type keeps dispatching through the parent's entry.
///
/// Kind maps stay mutable after definition (add_map_entry), and a mutation is
/// immediately visible to every existing and future instance of the kind.
/// Unhandled messages fall to a counted default sink. Single-threaded.
class MsgMapModel {
 public:
  explicit MsgMapModel(const MessageTypeRegistry& registry) : registry_(&registry) {}

  KindId define_kind(std::optional<KindId> parent, std::vector<KindBinding> entries) {
    if (parent && parent->value >= kinds_.size()) {
      raise(errc::unknown_parent, "parent kind id " + std::to_string(parent->value) + " does not exist");
    }
    Kind kind;
    kind.parent = parent;
    kind.map.reserve(entries.size());
    for (auto& [type, cb] : entries) {
      if (!kind.map.emplace(type.value, std::move(cb)).second) {
        raise(errc::duplicate_binding, "type id " + std::to_string(type.value) + " bound twice in kind map");
      }
    }
    kinds_.push_back(std::move(kind));
    return KindId{static_cast<std::uint32_t>(kinds_.size() - 1)};
  }

  /// Adds an entry to the kind's shared map. Existing instances of the kind
  /// dispatch through it immediately.
  void add_map_entry(KindId kind, MessageTypeId msg_type, KindCallback callback) {
    Kind& k = kind_at(kind);
    if (!k.map.emplace(msg_type.value, std::move(callback)).second) {
      raise(errc::duplicate_binding,
            "type id " + std::to_string(msg_type.value) + " already bound in kind " + std::to_string(kind.value));
    }
  }

  HandlerId create_instance(KindId kind) {
    kind_at(kind);
    instances_.push_back(Instance{kind});
    return HandlerId{static_cast<std::uint32_t>(instances_.size() - 1)};
  }

  /// Walks the kind chain from the instance's own kind upward; the first map
  /// containing msg_type wins and its callback runs exactly once. Returns
  /// false (and counts one unhandled) if no map in the chain binds the type.
  bool dispatch(HandlerId instance, const Message& msg) {
    if (instance.value >= instances_.size()) {
      raise_with_id(errc::unknown_instance, "instance id ", instance.value, " does not exist");
    }
    if (!registry_->contains(msg.msg_type)) {
      raise_with_id(errc::unregistered_type, "message type id ", msg.msg_type.value, " is not registered");
    }
    const Kind* kind = &kinds_[instances_[instance.value].kind.value];
    for (;;) {
      ++map_probes_;
      auto it = kind->map.find(msg.msg_type.value);
      if (it != kind->map.end()) {
        it->second(instance, msg);
        return true;
      }
      if (!kind->parent) break;
      kind = &kinds_[kind->parent->value];
    }
    ++unhandled_;
    return false;
  }

  KindId kind_of(HandlerId instance) const {
    if (instance.value >= instances_.size()) {
      raise(errc::unknown_instance, "instance id " + std::to_string(instance.value) + " does not exist");
    }
    return instances_[instance.value].kind;
  }

  /// Number of kinds on the chain from `kind` to its root, inclusive.
  std::size_t chain_length(KindId kind) const {
    const Kind* k = &kind_at(kind);
    std::size_t length = 1;
    while (k->parent) {
      k = &kinds_[k->parent->value];
      ++length;
    }
    return length;
  }

  bool kind_binds(KindId kind, MessageTypeId msg_type) const {
    return kind_at(kind).map.contains(msg_type.value);
  }

  std::size_t kind_count() const noexcept { return kinds_.size(); }
  std::size_t instance_count() const noexcept { return instances_.size(); }
  std::uint64_t unhandled_count() const noexcept { return unhandled_; }
  std::uint64_t map_probes() const noexcept { return map_probes_; }

 private:
  struct Kind {
    std::optional<KindId> parent;
    std::unordered_map<std::uint32_t, KindCallback> map;
  };
  struct Instance {
    KindId kind;
  };

  Kind& kind_at(KindId id) {
    if (id.value >= kinds_.size()) {
      raise(errc::unknown_kind, "kind id " + std::to_string(id.value) + " does not exist");
    }
    return kinds_[id.value];
  }

  const Kind& kind_at(KindId id) const {
    if (id.value >= kinds_.size()) {
      raise(errc::unknown_kind, "kind id " + std::to_string(id.value) + " does not exist");
    }
    return kinds_[id.value];
  }

  const MessageTypeRegistry* registry_;
  std::deque<Kind> kinds_;  // parents precede children, so chains are acyclic
  std::deque<Instance> instances_;
  std::uint64_t unhandled_ = 0;
  std::uint64_t map_probes_ = 0;
};

}  // namespace dispatchlab
