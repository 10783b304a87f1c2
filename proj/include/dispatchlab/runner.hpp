#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dispatchlab/core.hpp"
#include "dispatchlab/direct_bus.hpp"
#include "dispatchlab/msgmap_model.hpp"
#include "dispatchlab/os_emulation.hpp"
#include "dispatchlab/scenario.hpp"
#include "dispatchlab/vtable_model.hpp"

namespace dispatchlab {

// ============================================================================
// Scenario runner
// ============================================================================
//
// Executes a scenario's script against one dispatch model and returns the
// delivery log. Numeric ids in the log are declaration indices: type i is the
// i-th name in `types`, component i the i-th in `components`, handler i the
// i-th in `handlers` — identical across models, so logs are comparable.
//
// Message identity is the ordinal of the issuing action among all emit/post
// actions, counted from zero. Models that stamp their own sequence (the
// direct bus) agree with this by construction; for the emulated OS path,
// which neither tracks senders nor exposes its queue stamps, the runner
// carries identity in a 12-byte payload header (seq u64 LE, sender u32 LE)
// that the receiving window strips off before recording.

namespace runner_detail {

/// Insertion-ordered subscription state for models that have no native
/// subscriber concept; mirrors the direct bus rules (idempotent subscribe,
/// order-preserving unsubscribe).
class SubscriptionState {
 public:
  void subscribe(std::uint32_t component, std::uint32_t handler) {
    for (const auto& [c, h] : pairs_)
      if (c == component && h == handler) return;
    pairs_.emplace_back(component, handler);
  }

  void unsubscribe(std::uint32_t component, std::uint32_t handler) {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      if (pairs_[i].first == component && pairs_[i].second == handler) {
        pairs_.erase(pairs_.begin() + static_cast<std::ptrdiff_t>(i));
        return;
      }
    }
  }

  std::vector<std::uint32_t> subscribers_of(std::uint32_t component) const {
    std::vector<std::uint32_t> out;
    for (const auto& [c, h] : pairs_)
      if (c == component) out.push_back(h);
    return out;
  }

 private:
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
};

/// Accepted types of a handler: its own list first, then anything inherited
/// through its kind chain (nearest kind first), without repeats. Expressed as
/// type indices into scenario.types.
inline std::vector<std::uint32_t> effective_accepts(const Scenario& s, std::uint32_t handler) {
  std::vector<std::uint32_t> out;
  auto add = [&s, &out](const std::vector<std::string>& names) {
    for (const std::string& name : names) {
      const std::uint32_t type = *s.type_index(name);
      bool present = false;
      for (std::uint32_t t : out)
        if (t == type) present = true;
      if (!present) out.push_back(type);
    }
  };
  add(s.handlers[handler].accepts);
  std::optional<std::string> kind_name = s.handlers[handler].kind;
  while (kind_name) {
    const KindDecl& kind = s.kinds[*s.kind_index(*kind_name)];
    add(kind.accepts);
    kind_name = kind.parent;
  }
  return out;
}

constexpr std::size_t kIdentityHeaderSize = 12;

inline std::vector<std::byte> encode_identity(std::uint64_t seq, std::uint32_t sender,
                                              std::span<const std::byte> payload) {
  std::vector<std::byte> out(kIdentityHeaderSize + payload.size());
  for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<std::byte>((seq >> (8 * i)) & 0xff);
  for (std::size_t i = 0; i < 4; ++i) out[8 + i] = static_cast<std::byte>((sender >> (8 * i)) & 0xff);
  std::copy(payload.begin(), payload.end(), out.begin() + kIdentityHeaderSize);
  return out;
}

inline std::pair<std::uint64_t, std::uint32_t> decode_identity(std::span<const std::byte> payload) {
  std::uint64_t seq = 0;
  std::uint32_t sender = 0;
  for (std::size_t i = 0; i < 8; ++i) seq |= static_cast<std::uint64_t>(payload[i]) << (8 * i);
  for (std::size_t i = 0; i < 4; ++i) sender |= static_cast<std::uint32_t>(payload[8 + i]) << (8 * i);
  return {seq, sender};
}

[[noreturn]] inline void inapplicable(std::size_t step, ActionKind action, ModelTag model) {
  raise(errc::validation_error, "step " + std::to_string(step) + ": action '" + std::string(to_string(action)) +
                                    "' is not applicable to model '" + std::string(to_string(model)) + "'");
}

/// Runs `body(step_index, action)` over the script, re-raising model errors
/// with the step index attached.
template <class Body>
void for_each_step(const Scenario& s, Body&& body) {
  for (std::size_t i = 0; i < s.script.size(); ++i) {
    try {
      body(i, s.script[i]);
    } catch (const Error& e) {
      const std::string text = e.what();
      if (text.rfind("step ", 0) == 0) throw;  // already annotated
      raise(e.code(), "step " + std::to_string(i + 1) + ": " + text);
    }
  }
}

// ----------------------------------------------------------------------------

inline DeliveryLog run_direct(const Scenario& s) {
  MessageTypeRegistry registry;
  for (const std::string& name : s.types) registry.register_type(name);

  DirectBus bus(registry);
  DeliveryLog log;

  for (std::size_t i = 0; i < s.components.size(); ++i) bus.create_component();
  for (std::uint32_t h = 0; h < s.handlers.size(); ++h) {
    std::vector<DirectBinding> bindings;
    for (std::uint32_t type : effective_accepts(s, h)) {
      bindings.emplace_back(MessageTypeId{type}, [&log, h](const Message& m) {
        log.push_back(DeliveryRecord{m.seq, m.msg_type, m.sender, HandlerId{h}, ModelTag::direct});
      });
    }
    bus.create_handler(std::move(bindings));
  }
  for (const SubscriptionDecl& sub : s.subscriptions) {
    bus.subscribe(ComponentId{*s.component_index(sub.component)}, HandlerId{*s.handler_index(sub.handler)});
  }

  for_each_step(s, [&](std::size_t i, const Action& action) {
    switch (action.kind) {
      case ActionKind::emit:
        bus.emit(ComponentId{*s.component_index(action.component)}, MessageTypeId{*s.type_index(action.arg)},
                 action.payload);
        break;
      case ActionKind::subscribe:
        bus.subscribe(ComponentId{*s.component_index(action.component)}, HandlerId{*s.handler_index(action.arg)});
        break;
      case ActionKind::unsubscribe:
        bus.unsubscribe(ComponentId{*s.component_index(action.component)}, HandlerId{*s.handler_index(action.arg)});
        break;
      case ActionKind::post:
      case ActionKind::pump:
        inapplicable(i + 1, action.kind, ModelTag::direct);
    }
  });
  return log;
}

inline DeliveryLog run_os(const Scenario& s) {
  MessageTypeRegistry registry;
  for (const std::string& name : s.types) registry.register_type(name);

  WindowSystem ws(registry);
  DeliveryLog log;

  std::vector<WindowHandle> window_of;
  window_of.reserve(s.handlers.size());
  for (std::uint32_t h = 0; h < s.handlers.size(); ++h) {
    std::vector<DirectBinding> bindings;
    for (std::uint32_t type : effective_accepts(s, h)) {
      bindings.emplace_back(MessageTypeId{type}, [&log, h](const Message& m) {
        const auto [seq, sender] = decode_identity(m.payload);
        log.push_back(DeliveryRecord{seq, m.msg_type, ComponentId{sender}, HandlerId{h}, ModelTag::os});
      });
    }
    window_of.push_back(ws.register_window(std::move(bindings)));
  }

  SubscriptionState subs;
  for (const SubscriptionDecl& sub : s.subscriptions) {
    subs.subscribe(*s.component_index(sub.component), *s.handler_index(sub.handler));
  }

  std::uint64_t next_seq = 0;
  for_each_step(s, [&](std::size_t, const Action& action) {
    switch (action.kind) {
      case ActionKind::emit: {
        const std::uint32_t sender = *s.component_index(action.component);
        const MessageTypeId type{*s.type_index(action.arg)};
        const std::vector<std::byte> wire = encode_identity(next_seq++, sender, action.payload);
        for (std::uint32_t h : subs.subscribers_of(sender)) ws.send(window_of[h], type, wire);
        break;
      }
      case ActionKind::post: {
        const std::uint32_t sender = *s.component_index(action.component);
        const MessageTypeId type{*s.type_index(action.arg)};
        const std::vector<std::byte> wire = encode_identity(next_seq++, sender, action.payload);
        for (std::uint32_t h : subs.subscribers_of(sender)) ws.post(window_of[h], type, wire);
        break;
      }
      case ActionKind::pump:
        ws.pump();
        break;
      case ActionKind::subscribe:
        subs.subscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::unsubscribe:
        subs.unsubscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
    }
  });
  return log;
}

inline DeliveryLog run_msgmap(const Scenario& s) {
  MessageTypeRegistry registry;
  for (const std::string& name : s.types) registry.register_type(name);

  MsgMapModel model(registry);
  DeliveryLog log;
  auto recording = [&log](MessageTypeId type) {
    return std::pair<MessageTypeId, KindCallback>(type, [&log](HandlerId instance, const Message& m) {
      log.push_back(DeliveryRecord{m.seq, m.msg_type, m.sender, instance, ModelTag::msgmap});
    });
  };

  // Declared kinds first (kind id == declaration index), then one leaf kind
  // per handler carrying its own accepts, so per-handler types shadow or
  // extend the shared chain without touching it.
  for (const KindDecl& kind : s.kinds) {
    std::optional<KindId> parent;
    if (kind.parent) parent = KindId{*s.kind_index(*kind.parent)};
    std::vector<KindBinding> entries;
    for (const std::string& type : kind.accepts) entries.push_back(recording(MessageTypeId{*s.type_index(type)}));
    model.define_kind(parent, std::move(entries));
  }
  for (const HandlerDecl& handler : s.handlers) {
    std::optional<KindId> parent;
    if (handler.kind) parent = KindId{*s.kind_index(*handler.kind)};
    std::vector<KindBinding> entries;
    for (const std::string& type : handler.accepts) entries.push_back(recording(MessageTypeId{*s.type_index(type)}));
    const KindId leaf = model.define_kind(parent, std::move(entries));
    model.create_instance(leaf);  // instance id == handler declaration index
  }

  SubscriptionState subs;
  for (const SubscriptionDecl& sub : s.subscriptions) {
    subs.subscribe(*s.component_index(sub.component), *s.handler_index(sub.handler));
  }

  std::uint64_t next_seq = 0;
  for_each_step(s, [&](std::size_t i, const Action& action) {
    switch (action.kind) {
      case ActionKind::emit: {
        const ComponentId sender{*s.component_index(action.component)};
        const Message msg{MessageTypeId{*s.type_index(action.arg)}, action.payload, sender, next_seq++};
        for (std::uint32_t h : subs.subscribers_of(sender.value)) model.dispatch(HandlerId{h}, msg);
        break;
      }
      case ActionKind::subscribe:
        subs.subscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::unsubscribe:
        subs.unsubscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::post:
      case ActionKind::pump:
        inapplicable(i + 1, action.kind, ModelTag::msgmap);
    }
  });
  return log;
}

inline DeliveryLog run_vtable(const Scenario& s) {
  MessageTypeRegistry registry;
  for (const std::string& name : s.types) registry.register_type(name);

  // The catalog is sealed over every declared type (slot i == type i), so the
  // filter comes entirely from which slots a handler overrides.
  std::vector<MessageTypeId> catalog_types;
  for (std::uint32_t t = 0; t < s.types.size(); ++t) catalog_types.push_back(MessageTypeId{t});
  EventCatalog catalog(std::move(catalog_types));

  DeliveryLog log;
  std::vector<TypedHandler> handlers;
  handlers.reserve(s.handlers.size());
  for (std::uint32_t h = 0; h < s.handlers.size(); ++h) {
    TypedHandler& handler = handlers.emplace_back(HandlerId{h}, catalog);
    for (std::uint32_t type : effective_accepts(s, h)) {
      handler.override_type(MessageTypeId{type}, [&log, h](const Message& m) {
        log.push_back(DeliveryRecord{m.seq, m.msg_type, m.sender, HandlerId{h}, ModelTag::vtable});
      });
    }
  }

  SubscriptionState subs;
  for (const SubscriptionDecl& sub : s.subscriptions) {
    subs.subscribe(*s.component_index(sub.component), *s.handler_index(sub.handler));
  }

  std::uint64_t next_seq = 0;
  for_each_step(s, [&](std::size_t i, const Action& action) {
    switch (action.kind) {
      case ActionKind::emit: {
        const ComponentId sender{*s.component_index(action.component)};
        const Message msg{MessageTypeId{*s.type_index(action.arg)}, action.payload, sender, next_seq++};
        for (std::uint32_t h : subs.subscribers_of(sender.value)) dispatch_typed(catalog, handlers[h], msg);
        break;
      }
      case ActionKind::subscribe:
        subs.subscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::unsubscribe:
        subs.unsubscribe(*s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::post:
      case ActionKind::pump:
        inapplicable(i + 1, action.kind, ModelTag::vtable);
    }
  });
  return log;
}

}  // namespace runner_detail

/// Executes the scenario under the chosen model. The scenario is validated
/// first; model errors are re-raised with the 1-based script step attached.
inline DeliveryLog run_scenario(ModelTag model, const Scenario& s) {
  validate(s);
  switch (model) {
    case ModelTag::direct: return runner_detail::run_direct(s);
    case ModelTag::os: return runner_detail::run_os(s);
    case ModelTag::msgmap: return runner_detail::run_msgmap(s);
    case ModelTag::vtable: return runner_detail::run_vtable(s);
  }
  raise(errc::validation_error, "unknown model tag");
}

}  // namespace dispatchlab
