#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dispatchlab/scenario.hpp"

namespace dispatchlab {

/// Bounds for random scenario generation. Defaults match the randomized
/// corpus used by the acceptance suite.
struct GenLimits {
  std::uint32_t max_types = 50;
  std::uint32_t max_components = 20;
  std::uint32_t max_handlers = 20;
  std::uint32_t max_steps = 1000;
  std::uint32_t max_payload = 8;
  bool queued_actions = false;  // include post/pump steps
  bool kinds = false;           // generate kind hierarchies and kind-typed handlers
};

namespace gen_detail {

/// mt19937_64 output is fully specified by the standard, so modulo draws give
/// the same scenario for the same seed on every platform (the standard
/// distributions do not guarantee that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint32_t below(std::uint32_t n) { return n == 0 ? 0 : static_cast<std::uint32_t>(engine_() % n); }
  bool chance(std::uint32_t percent) { return below(100) < percent; }

  /// k distinct values from [0, n) via partial Fisher–Yates shuffle.
  std::vector<std::uint32_t> distinct(std::uint32_t k, std::uint32_t n) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gen_detail

/// Deterministic random scenario: the same seed and limits always produce the
/// same scenario. The result is always valid (all references declared).
inline Scenario generate_scenario(std::uint64_t seed, const GenLimits& limits = {}) {
  gen_detail::Rng rng(seed);
  Scenario s;

  const std::uint32_t n_types = 1 + rng.below(limits.max_types);
  const std::uint32_t n_components = 1 + rng.below(limits.max_components);
  const std::uint32_t n_handlers = 1 + rng.below(limits.max_handlers);
  for (std::uint32_t i = 0; i < n_types; ++i) s.types.push_back("t" + std::to_string(i));
  for (std::uint32_t i = 0; i < n_components; ++i) s.components.push_back("c" + std::to_string(i));

  std::uint32_t n_kinds = 0;
  if (limits.kinds) {
    n_kinds = rng.below(n_handlers + 1);
    for (std::uint32_t i = 0; i < n_kinds; ++i) {
      KindDecl kind;
      kind.name = "k" + std::to_string(i);
      if (i > 0 && rng.chance(50)) kind.parent = "k" + std::to_string(rng.below(i));
      const std::uint32_t n_accepts = rng.below(std::min<std::uint32_t>(n_types, 4) + 1);
      for (std::uint32_t type : rng.distinct(n_accepts, n_types)) kind.accepts.push_back(s.types[type]);
      s.kinds.push_back(std::move(kind));
    }
  }

  for (std::uint32_t i = 0; i < n_handlers; ++i) {
    HandlerDecl handler;
    handler.name = "h" + std::to_string(i);
    if (n_kinds > 0 && rng.chance(50)) handler.kind = "k" + std::to_string(rng.below(n_kinds));
    const std::uint32_t n_accepts = rng.below(std::min<std::uint32_t>(n_types, 8) + 1);
    for (std::uint32_t type : rng.distinct(n_accepts, n_types)) handler.accepts.push_back(s.types[type]);
    s.handlers.push_back(std::move(handler));
  }

  const std::uint32_t n_subs = rng.below(n_components * n_handlers / 4 + 2);
  for (std::uint32_t i = 0; i < n_subs; ++i) {
    s.subscriptions.push_back(
        SubscriptionDecl{s.components[rng.below(n_components)], s.handlers[rng.below(n_handlers)].name});
  }

  const std::uint32_t n_steps = 1 + rng.below(limits.max_steps);
  for (std::uint32_t i = 0; i < n_steps; ++i) {
    Action action;
    const std::uint32_t roll = rng.below(100);
    if (limits.queued_actions && roll < 15) {
      action.kind = ActionKind::post;
    } else if (limits.queued_actions && roll < 25) {
      action.kind = ActionKind::pump;
    } else if (roll < 60) {
      action.kind = ActionKind::emit;
    } else if (roll < 80) {
      action.kind = ActionKind::subscribe;
    } else {
      action.kind = ActionKind::unsubscribe;
    }
    switch (action.kind) {
      case ActionKind::emit:
      case ActionKind::post: {
        action.component = s.components[rng.below(n_components)];
        action.arg = s.types[rng.below(n_types)];
        if (limits.max_payload > 0 && rng.chance(50)) {
          const std::uint32_t len = 1 + rng.below(limits.max_payload);
          for (std::uint32_t b = 0; b < len; ++b) action.payload.push_back(static_cast<std::byte>(rng.below(256)));
        }
        break;
      }
      case ActionKind::subscribe:
      case ActionKind::unsubscribe:
        action.component = s.components[rng.below(n_components)];
        action.arg = s.handlers[rng.below(n_handlers)].name;
        break;
      case ActionKind::pump:
        break;
    }
    s.script.push_back(std::move(action));
  }
  return s;
}

}  // namespace dispatchlab
