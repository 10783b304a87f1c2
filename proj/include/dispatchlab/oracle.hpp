#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dispatchlab/core.hpp"
#include "dispatchlab/scenario.hpp"

namespace dispatchlab {

// ============================================================================
// Brute-force delivery oracle
// ============================================================================
//
// Computes the exact expected delivery log for a scenario by direct, naive
// simulation of the delivery law:
//
//   a handler receives a message iff it is in the sender's subscriber list
//   when the message is issued AND the message's type is in the handler's
//   accepted set.
//
// Everything here is deliberately unoptimized — linear scans over plain
// lists — and shares no code with any dispatch model. Independence is what
// makes this an oracle.

namespace oracle_detail {

struct Subscription {
  std::uint32_t component;
  std::uint32_t handler;
};

struct QueuedDelivery {
  std::uint64_t seq;
  std::uint32_t type;
  std::uint32_t sender;
  std::uint32_t handler;
};

/// A handler accepts a type if its own list names it, or any kind on its
/// kind chain does. Resolved by name, scanning the declaration lists.
inline bool handler_accepts(const Scenario& s, std::uint32_t handler, std::uint32_t type) {
  const std::string& type_name = s.types[type];
  for (const std::string& accepted : s.handlers[handler].accepts) {
    if (accepted == type_name) return true;
  }
  std::optional<std::string> kind_name = s.handlers[handler].kind;
  while (kind_name) {
    const KindDecl* kind = nullptr;
    for (const KindDecl& k : s.kinds) {
      if (k.name == *kind_name) kind = &k;
    }
    for (const std::string& accepted : kind->accepts) {
      if (accepted == type_name) return true;
    }
    kind_name = kind->parent;
  }
  return false;
}

/// Subscribers of `component`, in subscription order.
inline std::vector<std::uint32_t> subscribers_of(const std::vector<Subscription>& subs, std::uint32_t component) {
  std::vector<std::uint32_t> out;
  for (const Subscription& sub : subs) {
    if (sub.component == component) out.push_back(sub.handler);
  }
  return out;
}

inline void add_subscription(std::vector<Subscription>& subs, std::uint32_t component, std::uint32_t handler) {
  for (const Subscription& sub : subs) {
    if (sub.component == component && sub.handler == handler) return;  // idempotent
  }
  subs.push_back(Subscription{component, handler});
}

inline void remove_subscription(std::vector<Subscription>& subs, std::uint32_t component, std::uint32_t handler) {
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i].component == component && subs[i].handler == handler) {
      subs.erase(subs.begin() + static_cast<std::ptrdiff_t>(i));
      return;
    }
  }
}

}  // namespace oracle_detail

/// Ground-truth delivery log for a valid scenario. Records carry the direct
/// model tag; comparisons against other models project the fields that the
/// model can express.
inline DeliveryLog oracle_deliveries(const Scenario& s) {
  validate(s);

  std::vector<oracle_detail::Subscription> subs;
  for (const SubscriptionDecl& decl : s.subscriptions) {
    oracle_detail::add_subscription(subs, *s.component_index(decl.component), *s.handler_index(decl.handler));
  }

  DeliveryLog log;
  std::deque<oracle_detail::QueuedDelivery> queue;
  std::uint64_t next_seq = 0;

  auto record = [&log](std::uint64_t seq, std::uint32_t type, std::uint32_t sender, std::uint32_t handler) {
    log.push_back(DeliveryRecord{seq, MessageTypeId{type}, ComponentId{sender}, HandlerId{handler}, ModelTag::direct});
  };

  for (const Action& action : s.script) {
    switch (action.kind) {
      case ActionKind::emit: {
        const std::uint32_t sender = *s.component_index(action.component);
        const std::uint32_t type = *s.type_index(action.arg);
        const std::uint64_t seq = next_seq++;
        for (std::uint32_t handler : oracle_detail::subscribers_of(subs, sender)) {
          if (oracle_detail::handler_accepts(s, handler, type)) record(seq, type, sender, handler);
        }
        break;
      }
      case ActionKind::post: {
        // Recipients are fixed when the message is issued; delivery waits for
        // a pump. Undrained messages at script end are never delivered.
        const std::uint32_t sender = *s.component_index(action.component);
        const std::uint32_t type = *s.type_index(action.arg);
        const std::uint64_t seq = next_seq++;
        for (std::uint32_t handler : oracle_detail::subscribers_of(subs, sender)) {
          queue.push_back(oracle_detail::QueuedDelivery{seq, type, sender, handler});
        }
        break;
      }
      case ActionKind::pump: {
        while (!queue.empty()) {
          const oracle_detail::QueuedDelivery q = queue.front();
          queue.pop_front();
          if (oracle_detail::handler_accepts(s, q.handler, q.type)) record(q.seq, q.type, q.sender, q.handler);
        }
        break;
      }
      case ActionKind::subscribe:
        oracle_detail::add_subscription(subs, *s.component_index(action.component), *s.handler_index(action.arg));
        break;
      case ActionKind::unsubscribe:
        oracle_detail::remove_subscription(subs, *s.component_index(action.component), *s.handler_index(action.arg));
        break;
    }
  }
  return log;
}

}  // namespace dispatchlab
