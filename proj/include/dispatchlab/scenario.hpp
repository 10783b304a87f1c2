#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dispatchlab/core.hpp"

namespace dispatchlab {

// ============================================================================
// Scenario model
// ============================================================================

enum class ActionKind : std::uint8_t { emit, post, subscribe, unsubscribe, pump };

inline std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::emit: return "emit";
    case ActionKind::post: return "post";
    case ActionKind::subscribe: return "subscribe";
    case ActionKind::unsubscribe: return "unsubscribe";
    case ActionKind::pump: return "pump";
  }
  return "?";
}

struct Action {
  ActionKind kind = ActionKind::pump;
  std::string component;            // emit/post: sender; (un)subscribe: component
  std::string arg;                  // emit/post: type name; (un)subscribe: handler name
  std::vector<std::byte> payload;   // emit/post only
  std::size_t line = 0;             // 1-based source line; not part of the action's identity

  friend bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && a.component == b.component && a.arg == b.arg && a.payload == b.payload;
  }
};

struct KindDecl {
  std::string name;
  std::optional<std::string> parent;  // must be declared on an earlier line
  std::vector<std::string> accepts;
  friend bool operator==(const KindDecl&, const KindDecl&) = default;
};

struct HandlerDecl {
  std::string name;
  std::optional<std::string> kind;    // msgmap grouping; handlers without one get a standalone kind
  std::vector<std::string> accepts;
  friend bool operator==(const HandlerDecl&, const HandlerDecl&) = default;
};

struct SubscriptionDecl {
  std::string component;
  std::string handler;
  friend bool operator==(const SubscriptionDecl&, const SubscriptionDecl&) = default;
};

/// A declarative dispatch scenario: declarations plus an ordered action
/// script. The same scenario drives every model and the oracle.
struct Scenario {
  std::vector<std::string> types;
  std::vector<std::string> components;
  std::vector<KindDecl> kinds;
  std::vector<HandlerDecl> handlers;
  std::vector<SubscriptionDecl> subscriptions;
  std::vector<Action> script;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  std::optional<std::uint32_t> type_index(std::string_view name) const { return index_of(types, name); }
  std::optional<std::uint32_t> component_index(std::string_view name) const { return index_of(components, name); }

  std::optional<std::uint32_t> kind_index(std::string_view name) const {
    for (std::uint32_t i = 0; i < kinds.size(); ++i)
      if (kinds[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<std::uint32_t> handler_index(std::string_view name) const {
    for (std::uint32_t i = 0; i < handlers.size(); ++i)
      if (handlers[i].name == name) return i;
    return std::nullopt;
  }

 private:
  static std::optional<std::uint32_t> index_of(const std::vector<std::string>& names, std::string_view name) {
    for (std::uint32_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  }
};

// ============================================================================
// Validation
// ============================================================================

namespace detail {

inline bool is_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> kKeywords = {
      "types", "components", "kinds", "handlers", "subscriptions", "script", "end",
      "emit",  "post",       "subscribe", "unsubscribe", "pump", "parent", "kind", "accepts"};
  return kKeywords.contains(word);
}

inline bool is_valid_name(std::string_view name) {
  if (name.empty() || is_keyword(name)) return false;
  for (char c : name) {
    if (c == '#' || c == ' ' || c == '\t' || c == '\r' || c == '\n') return false;
  }
  return true;
}

[[noreturn]] inline void validation_fail(const std::string& what) { raise(errc::validation_error, what); }

inline void check_names(const std::vector<std::string>& names, const char* category) {
  std::unordered_set<std::string_view> seen;
  for (const auto& name : names) {
    if (!is_valid_name(name)) validation_fail(std::string(category) + " name '" + name + "' is not a valid identifier");
    if (!seen.insert(name).second) validation_fail(std::string(category) + " '" + name + "' declared twice");
  }
}

inline void check_accepts(const Scenario& s, const std::vector<std::string>& accepts, const std::string& owner) {
  std::unordered_set<std::string_view> seen;
  for (const auto& type : accepts) {
    if (!s.type_index(type)) validation_fail("type '" + type + "' accepted by '" + owner + "' is not declared");
    if (!seen.insert(type).second) validation_fail("type '" + type + "' accepted twice by '" + owner + "'");
  }
}

}  // namespace detail

/// Checks every cross-reference in the scenario; raises ValidationError
/// naming the dangling reference. Kind parents must be declared on an earlier
/// line than the child, which keeps kind chains acyclic by construction.
inline void validate(const Scenario& s) {
  detail::check_names(s.types, "type");
  detail::check_names(s.components, "component");

  std::unordered_set<std::string_view> kind_names;
  for (const auto& kind : s.kinds) {
    if (!detail::is_valid_name(kind.name)) detail::validation_fail("kind name '" + kind.name + "' is not a valid identifier");
    if (kind.parent) {
      if (!kind_names.contains(*kind.parent))
        detail::validation_fail("parent kind '" + *kind.parent + "' of '" + kind.name + "' is not declared above it");
    }
    if (!kind_names.insert(kind.name).second) detail::validation_fail("kind '" + kind.name + "' declared twice");
    detail::check_accepts(s, kind.accepts, kind.name);
  }

  std::unordered_set<std::string_view> handler_names;
  for (const auto& handler : s.handlers) {
    if (!detail::is_valid_name(handler.name))
      detail::validation_fail("handler name '" + handler.name + "' is not a valid identifier");
    if (!handler_names.insert(handler.name).second) detail::validation_fail("handler '" + handler.name + "' declared twice");
    if (handler.kind && !s.kind_index(*handler.kind))
      detail::validation_fail("kind '" + *handler.kind + "' of handler '" + handler.name + "' is not declared");
    detail::check_accepts(s, handler.accepts, handler.name);
  }

  for (const auto& sub : s.subscriptions) {
    if (!s.component_index(sub.component))
      detail::validation_fail("component '" + sub.component + "' in subscriptions is not declared");
    if (!s.handler_index(sub.handler)) detail::validation_fail("handler '" + sub.handler + "' in subscriptions is not declared");
  }

  for (std::size_t i = 0; i < s.script.size(); ++i) {
    const Action& action = s.script[i];
    const std::string where = " in script step " + std::to_string(i + 1);
    switch (action.kind) {
      case ActionKind::emit:
      case ActionKind::post:
        if (!s.component_index(action.component))
          detail::validation_fail("component '" + action.component + "'" + where + " is not declared");
        if (!s.type_index(action.arg)) detail::validation_fail("type '" + action.arg + "'" + where + " is not declared");
        break;
      case ActionKind::subscribe:
      case ActionKind::unsubscribe:
        if (!s.component_index(action.component))
          detail::validation_fail("component '" + action.component + "'" + where + " is not declared");
        if (!s.handler_index(action.arg)) detail::validation_fail("handler '" + action.arg + "'" + where + " is not declared");
        break;
      case ActionKind::pump:
        break;
    }
  }
}

// ============================================================================
// Parsing
// ============================================================================

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
  raise(errc::parse_error, "line " + std::to_string(line) + ": " + what);
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    if (i >= text.size() || text[i] == '#') break;  // comment runs to end of line
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' && text[i] != '#') ++i;
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

inline int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::vector<std::byte> parse_hex(std::string_view text, std::size_t line) {
  if (text.size() % 2 != 0) parse_fail(line, "payload hex '" + std::string(text) + "' has odd length");
  std::vector<std::byte> bytes;
  bytes.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int hi = hex_digit(text[i]);
    const int lo = hex_digit(text[i + 1]);
    if (hi < 0 || lo < 0) parse_fail(line, "payload hex '" + std::string(text) + "' contains a non-hex character");
    bytes.push_back(static_cast<std::byte>((hi << 4) | lo));
  }
  return bytes;
}

inline std::string to_hex(std::span<const std::byte> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::byte b : bytes) {
    out.push_back(kDigits[static_cast<unsigned>(b) >> 4]);
    out.push_back(kDigits[static_cast<unsigned>(b) & 0xf]);
  }
  return out;
}

}  // namespace detail

/// Parses the line-oriented scenario format and validates the result.
///
/// Grammar (one directive per line; `#` starts a comment; blank lines ignored):
///   types <name>...                          may repeat; appends
///   components <name>...                     may repeat; appends
///   kinds <name> [parent <kind>] [accepts <type>...]
///   handlers <name> [kind <kind>] [accepts <type>...]
///   subscriptions <component> <handler>
///   script ... end                           block of actions:
///     emit <component> <type> [<hex-payload>]
///     post <component> <type> [<hex-payload>]
///     subscribe <component> <handler>
///     unsubscribe <component> <handler>
///     pump
inline Scenario parse_scenario(std::string_view text) {
  Scenario scenario;
  bool in_script = false;
  bool script_seen = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::vector<std::string> tok = detail::tokenize(line);
    if (tok.empty()) continue;
    const std::string& head = tok[0];

    if (in_script) {
      if (head == "end") {
        in_script = false;
      } else if (head == "emit" || head == "post") {
        if (tok.size() < 3 || tok.size() > 4)
          detail::parse_fail(line_no, head + " needs <component> <type> [<hex-payload>]");
        Action action;
        action.kind = head == "emit" ? ActionKind::emit : ActionKind::post;
        action.component = tok[1];
        action.arg = tok[2];
        if (tok.size() == 4) action.payload = detail::parse_hex(tok[3], line_no);
        action.line = line_no;
        scenario.script.push_back(std::move(action));
      } else if (head == "subscribe" || head == "unsubscribe") {
        if (tok.size() != 3) detail::parse_fail(line_no, head + " needs <component> <handler>");
        scenario.script.push_back(Action{head == "subscribe" ? ActionKind::subscribe : ActionKind::unsubscribe,
                                         tok[1], tok[2], {}, line_no});
      } else if (head == "pump") {
        if (tok.size() != 1) detail::parse_fail(line_no, "pump takes no arguments");
        scenario.script.push_back(Action{ActionKind::pump, "", "", {}, line_no});
      } else {
        detail::parse_fail(line_no, "unknown script action '" + head + "'");
      }
      continue;
    }

    if (head == "types" || head == "components") {
      if (tok.size() < 2) detail::parse_fail(line_no, head + " needs at least one name");
      auto& dest = head == "types" ? scenario.types : scenario.components;
      dest.insert(dest.end(), tok.begin() + 1, tok.end());
    } else if (head == "kinds") {
      if (tok.size() < 2) detail::parse_fail(line_no, "kinds needs a name");
      KindDecl kind;
      kind.name = tok[1];
      std::size_t i = 2;
      if (i < tok.size() && tok[i] == "parent") {
        if (i + 1 >= tok.size()) detail::parse_fail(line_no, "parent needs a kind name");
        kind.parent = tok[i + 1];
        i += 2;
      }
      if (i < tok.size()) {
        if (tok[i] != "accepts") detail::parse_fail(line_no, "unexpected token '" + tok[i] + "' in kinds line");
        kind.accepts.assign(tok.begin() + static_cast<std::ptrdiff_t>(i) + 1, tok.end());
      }
      scenario.kinds.push_back(std::move(kind));
    } else if (head == "handlers") {
      if (tok.size() < 2) detail::parse_fail(line_no, "handlers needs a name");
      HandlerDecl handler;
      handler.name = tok[1];
      std::size_t i = 2;
      if (i < tok.size() && tok[i] == "kind") {
        if (i + 1 >= tok.size()) detail::parse_fail(line_no, "kind needs a kind name");
        handler.kind = tok[i + 1];
        i += 2;
      }
      if (i < tok.size()) {
        if (tok[i] != "accepts") detail::parse_fail(line_no, "unexpected token '" + tok[i] + "' in handlers line");
        handler.accepts.assign(tok.begin() + static_cast<std::ptrdiff_t>(i) + 1, tok.end());
      }
      scenario.handlers.push_back(std::move(handler));
    } else if (head == "subscriptions") {
      if (tok.size() != 3) detail::parse_fail(line_no, "subscriptions needs <component> <handler>");
      scenario.subscriptions.push_back(SubscriptionDecl{tok[1], tok[2]});
    } else if (head == "script") {
      if (tok.size() != 1) detail::parse_fail(line_no, "script takes no arguments");
      if (script_seen) detail::parse_fail(line_no, "only one script block is allowed");
      in_script = true;
      script_seen = true;
    } else if (head == "end") {
      detail::parse_fail(line_no, "'end' outside a script block");
    } else {
      detail::parse_fail(line_no, "unknown directive '" + head + "'");
    }
  }
  if (in_script) detail::parse_fail(line_no, "script block is missing its 'end'");

  validate(scenario);
  return scenario;
}

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto write_list = [&out](const char* head, const std::vector<std::string>& names) {
    if (names.empty()) return;
    out << head;
    for (const auto& name : names) out << ' ' << name;
    out << '\n';
  };
  write_list("types", s.types);
  write_list("components", s.components);
  for (const auto& kind : s.kinds) {
    out << "kinds " << kind.name;
    if (kind.parent) out << " parent " << *kind.parent;
    if (!kind.accepts.empty()) {
      out << " accepts";
      for (const auto& type : kind.accepts) out << ' ' << type;
    }
    out << '\n';
  }
  for (const auto& handler : s.handlers) {
    out << "handlers " << handler.name;
    if (handler.kind) out << " kind " << *handler.kind;
    if (!handler.accepts.empty()) {
      out << " accepts";
      for (const auto& type : handler.accepts) out << ' ' << type;
    }
    out << '\n';
  }
  for (const auto& sub : s.subscriptions) out << "subscriptions " << sub.component << ' ' << sub.handler << '\n';
  out << "script\n";
  for (const auto& action : s.script) {
    out << "  " << to_string(action.kind);
    switch (action.kind) {
      case ActionKind::emit:
      case ActionKind::post:
        out << ' ' << action.component << ' ' << action.arg;
        if (!action.payload.empty()) out << ' ' << detail::to_hex(action.payload);
        break;
      case ActionKind::subscribe:
      case ActionKind::unsubscribe:
        out << ' ' << action.component << ' ' << action.arg;
        break;
      case ActionKind::pump:
        break;
    }
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

// ============================================================================
// Delivery log text form
// ============================================================================

inline std::string format_delivery_record(const DeliveryRecord& r) {
  std::string out = std::to_string(r.seq);
  out += ' ';
  out += r.msg_type.is_valid() ? std::to_string(r.msg_type.value) : std::string("-");
  out += ' ';
  out += r.sender.is_valid() ? std::to_string(r.sender.value) : std::string("-");
  out += ' ';
  out += r.receiver.is_valid() ? std::to_string(r.receiver.value) : std::string("-");
  out += ' ';
  out += to_string(r.model);
  return out;
}

/// One `seq type sender receiver model` line per record.
inline std::string format_delivery_log(const DeliveryLog& log) {
  std::string out;
  for (const DeliveryRecord& r : log) {
    out += format_delivery_record(r);
    out += '\n';
  }
  return out;
}

}  // namespace dispatchlab
