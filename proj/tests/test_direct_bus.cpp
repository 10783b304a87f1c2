#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "dispatchlab/core.hpp"
#include "dispatchlab/direct_bus.hpp"

using namespace dispatchlab;

namespace {

struct BusFixture {
  MessageTypeRegistry registry;
  MessageTypeId t0 = registry.register_type("t0");
  MessageTypeId t1 = registry.register_type("t1");
  DirectBus bus{registry};
};

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an Error");
}

}  // namespace

TEST_CASE("first component is id 0 with an empty subscriber list") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  CHECK(c == ComponentId{0});
  CHECK(fx.bus.subscribers(c).empty());
}

TEST_CASE("components get distinct ids") {
  BusFixture fx;
  CHECK(fx.bus.create_component() != fx.bus.create_component());
}

TEST_CASE("emit from a fresh component delivers nothing") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  CHECK(fx.bus.emit(c, fx.t0) == 0);
}

TEST_CASE("a handler with no bindings never receives anything") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h = fx.bus.create_handler({});
  fx.bus.subscribe(c, h);
  CHECK(fx.bus.emit(c, fx.t0) == 0);
  CHECK(fx.bus.handler_table(h).binding_count() == 0);
}

TEST_CASE("a handler accepts exactly its bound types") {
  MessageTypeRegistry registry;
  const MessageTypeId t0 = registry.register_type("t0");
  const MessageTypeId t1 = registry.register_type("t1");
  const MessageTypeId t2 = registry.register_type("t2");
  DirectBus bus(registry);
  const HandlerId h = bus.create_handler({{t0, [](const Message&) {}}, {t2, [](const Message&) {}}});
  const HandlerTable& table = bus.handler_table(h);
  CHECK(table.contains(t0));
  CHECK(!table.contains(t1));
  CHECK(table.contains(t2));
}

TEST_CASE("binding the same type twice raises DuplicateBinding") {
  BusFixture fx;
  CHECK(code_of([&] {
          fx.bus.create_handler({{fx.t0, [](const Message&) {}}, {fx.t0, [](const Message&) {}}});
        }) == errc::duplicate_binding);
}

TEST_CASE("subscribe appends and is idempotent") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h = fx.bus.create_handler({});
  CHECK(fx.bus.subscribe(c, h));
  CHECK(!fx.bus.subscribe(c, h));
  REQUIRE(fx.bus.subscribers(c).size() == 1);
  CHECK(fx.bus.subscribers(c)[0] == h);
}

TEST_CASE("subscriber list preserves subscription order") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h1 = fx.bus.create_handler({});
  const HandlerId h2 = fx.bus.create_handler({});
  fx.bus.subscribe(c, h1);
  fx.bus.subscribe(c, h2);
  REQUIRE(fx.bus.subscribers(c).size() == 2);
  CHECK(fx.bus.subscribers(c)[0] == h1);
  CHECK(fx.bus.subscribers(c)[1] == h2);
}

TEST_CASE("subscribe and unsubscribe validate both ids") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h = fx.bus.create_handler({});
  CHECK(code_of([&] { fx.bus.subscribe(ComponentId{9}, h); }) == errc::unknown_id);
  CHECK(code_of([&] { fx.bus.subscribe(c, HandlerId{9}); }) == errc::unknown_id);
  CHECK(code_of([&] { fx.bus.unsubscribe(ComponentId{9}, h); }) == errc::unknown_id);
  CHECK(code_of([&] { fx.bus.unsubscribe(c, HandlerId{9}); }) == errc::unknown_id);
}

TEST_CASE("unsubscribe removes and reports absence") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h = fx.bus.create_handler({});
  fx.bus.subscribe(c, h);
  CHECK(fx.bus.unsubscribe(c, h));
  CHECK(fx.bus.subscribers(c).empty());
  CHECK(!fx.bus.unsubscribe(c, h));
}

TEST_CASE("unsubscribe keeps the relative order of the rest") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  const HandlerId h1 = fx.bus.create_handler({});
  const HandlerId h2 = fx.bus.create_handler({});
  const HandlerId h3 = fx.bus.create_handler({});
  fx.bus.subscribe(c, h1);
  fx.bus.subscribe(c, h2);
  fx.bus.subscribe(c, h3);
  fx.bus.unsubscribe(c, h2);
  REQUIRE(fx.bus.subscribers(c).size() == 2);
  CHECK(fx.bus.subscribers(c)[0] == h1);
  CHECK(fx.bus.subscribers(c)[1] == h3);
}

TEST_CASE("emit delivers only to subscribers whose table holds the type") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  std::vector<std::string> hits;
  const HandlerId h1 = fx.bus.create_handler({{fx.t0, [&](const Message&) { hits.push_back("h1"); }}});
  const HandlerId h2 = fx.bus.create_handler({{fx.t1, [&](const Message&) { hits.push_back("h2"); }}});
  fx.bus.subscribe(c, h1);
  fx.bus.subscribe(c, h2);
  CHECK(fx.bus.emit(c, fx.t0) == 1);
  CHECK(hits == std::vector<std::string>{"h1"});
}

TEST_CASE("a type registered after the handlers exist is filtered without error") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  int hits = 0;
  const HandlerId h = fx.bus.create_handler({{fx.t0, [&](const Message&) { ++hits; }}});
  fx.bus.subscribe(c, h);
  const MessageTypeId late = fx.registry.register_type("late");
  CHECK(fx.bus.emit(c, late) == 0);
  CHECK(hits == 0);
}

TEST_CASE("emit validates sender and type") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  CHECK(code_of([&] { fx.bus.emit(ComponentId{7}, fx.t0); }) == errc::unknown_id);
  CHECK(code_of([&] { fx.bus.emit(c, MessageTypeId{99}); }) == errc::unregistered_type);
}

TEST_CASE("delivery order equals subscription order restricted to accepting handlers") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  std::vector<int> order;
  const HandlerId h1 = fx.bus.create_handler({{fx.t0, [&](const Message&) { order.push_back(1); }}});
  const HandlerId h2 = fx.bus.create_handler({{fx.t1, [&](const Message&) { order.push_back(2); }}});
  const HandlerId h3 = fx.bus.create_handler({{fx.t0, [&](const Message&) { order.push_back(3); }}});
  fx.bus.subscribe(c, h1);
  fx.bus.subscribe(c, h2);
  fx.bus.subscribe(c, h3);
  CHECK(fx.bus.emit(c, fx.t0) == 2);
  CHECK(order == std::vector<int>{1, 3});
}

TEST_CASE("messages carry payload, sender, and strictly increasing seq") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  std::vector<std::uint64_t> seqs;
  std::size_t last_payload_size = 0;
  ComponentId last_sender = ComponentId::invalid();
  const HandlerId h = fx.bus.create_handler({{fx.t0, [&](const Message& m) {
                                                seqs.push_back(m.seq);
                                                last_payload_size = m.payload.size();
                                                last_sender = m.sender;
                                              }}});
  fx.bus.subscribe(c, h);
  const std::vector<std::byte> payload{std::byte{1}, std::byte{2}, std::byte{3}};
  fx.bus.emit(c, fx.t0, payload);
  fx.bus.emit(c, fx.t0);
  fx.bus.emit(c, fx.t1);  // consumes a seq even though nothing accepts it
  fx.bus.emit(c, fx.t0);
  CHECK(seqs == std::vector<std::uint64_t>{0, 1, 3});
  CHECK(last_payload_size == 0);
  CHECK(last_sender == c);
  (void)payload;
}

TEST_CASE("subscriptions changed by a callback take effect on the next emit") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  int late_hits = 0;
  const HandlerId late = fx.bus.create_handler({{fx.t0, [&](const Message&) { ++late_hits; }}});
  const HandlerId trigger = fx.bus.create_handler({{fx.t0, [&](const Message&) { fx.bus.subscribe(c, late); }}});
  fx.bus.subscribe(c, trigger);

  CHECK(fx.bus.emit(c, fx.t0) == 1);  // snapshot: late not yet in the list
  CHECK(late_hits == 0);
  CHECK(fx.bus.emit(c, fx.t0) == 2);  // now both
  CHECK(late_hits == 1);
}

TEST_CASE("unsubscribe during an emit does not affect that emit") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  std::vector<int> order;
  const HandlerId h2 = fx.bus.create_handler({{fx.t0, [&](const Message&) { order.push_back(2); }}});
  const HandlerId h1 = fx.bus.create_handler({{fx.t0, [&](const Message&) {
                                                 order.push_back(1);
                                                 fx.bus.unsubscribe(c, h2);
                                               }}});
  fx.bus.subscribe(c, h1);
  fx.bus.subscribe(c, h2);
  CHECK(fx.bus.emit(c, fx.t0) == 2);  // h2 still in the entry snapshot
  CHECK(order == std::vector<int>{1, 2});
  CHECK(fx.bus.emit(c, fx.t0) == 1);  // h2 gone now
}

TEST_CASE("reentrant emits are allowed up to the depth limit") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  std::size_t depth = 0;
  std::size_t max_depth = 0;
  HandlerId h{};
  h = fx.bus.create_handler({{fx.t0, [&](const Message&) {
                                ++depth;
                                max_depth = std::max(max_depth, depth);
                                if (depth < DirectBus::kMaxEmitDepth) fx.bus.emit(c, fx.t0);
                                --depth;
                              }}});
  fx.bus.subscribe(c, h);
  CHECK_NOTHROW(fx.bus.emit(c, fx.t0));
  CHECK(max_depth == DirectBus::kMaxEmitDepth);
}

TEST_CASE("exceeding the reentrancy depth raises ReentrancyLimitExceeded") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  HandlerId h{};
  h = fx.bus.create_handler({{fx.t0, [&](const Message&) { fx.bus.emit(c, fx.t0); }}});
  fx.bus.subscribe(c, h);
  CHECK(code_of([&] { fx.bus.emit(c, fx.t0); }) == errc::reentrancy_limit_exceeded);
}

TEST_CASE("a callback exception aborts the rest of that emit and propagates") {
  BusFixture fx;
  const ComponentId c = fx.bus.create_component();
  int later_hits = 0;
  const HandlerId thrower =
      fx.bus.create_handler({{fx.t0, [](const Message&) { throw std::runtime_error("boom"); }}});
  const HandlerId after = fx.bus.create_handler({{fx.t0, [&](const Message&) { ++later_hits; }}});
  fx.bus.subscribe(c, thrower);
  fx.bus.subscribe(c, after);
  CHECK_THROWS_AS(fx.bus.emit(c, fx.t0), std::runtime_error);
  CHECK(later_hits == 0);
  // The bus stays usable and the depth guard unwound.
  CHECK(fx.bus.unsubscribe(c, thrower));
  CHECK(fx.bus.emit(c, fx.t0) == 1);
  CHECK(later_hits == 1);
}

TEST_CASE("handler tables answer membership for arbitrary ids") {
  HandlerTable empty;
  CHECK(!empty.contains(MessageTypeId{0}));
  CHECK(!empty.contains(MessageTypeId::invalid()));

  HandlerTable table({{MessageTypeId{5}, [](const Message&) {}}});
  CHECK(table.contains(MessageTypeId{5}));
  CHECK(!table.contains(MessageTypeId{4}));
  CHECK(!table.contains(MessageTypeId{6}));
  CHECK(!table.contains(MessageTypeId{1000000}));
}
