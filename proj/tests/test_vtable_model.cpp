#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <string>
#include <vector>

#include "dispatchlab/core.hpp"
#include "dispatchlab/vtable_model.hpp"

using namespace dispatchlab;

namespace {

struct CatalogFixture {
  MessageTypeRegistry registry;
  MessageTypeId t0 = registry.register_type("t0");
  MessageTypeId t1 = registry.register_type("t1");
  MessageTypeId t2 = registry.register_type("t2");
  MessageTypeId t7 = [this] {
    for (int i = 3; i < 7; ++i) registry.register_type("t" + std::to_string(i));
    return registry.register_type("t7");
  }();

  Message msg(MessageTypeId type, std::uint64_t seq = 0) const {
    return Message{type, {}, ComponentId{0}, seq};
  }
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

TEST_CASE("an empty catalog makes every type outside_catalog") {
  CatalogFixture fx;
  EventCatalog catalog({});
  TypedHandler handler(HandlerId{0}, catalog);
  CHECK(catalog.size() == 0);
  CHECK(dispatch_typed(catalog, handler, fx.msg(fx.t0)) == TypedOutcome::outside_catalog);
  CHECK(handler.default_hits() == 0);
}

TEST_CASE("slot indices follow the construction order") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t2, fx.t0, fx.t1});
  CHECK(catalog.size() == 3);
  CHECK(catalog.slot_of(fx.t2) == 0);
  CHECK(catalog.slot_of(fx.t0) == 1);
  CHECK(catalog.slot_of(fx.t1) == 2);
  CHECK(catalog.slot_type(0) == fx.t2);
  CHECK(catalog.slot_type(2) == fx.t1);
  CHECK(catalog.contains(fx.t0));
  CHECK_FALSE(catalog.contains(fx.t7));
  CHECK(catalog.slot_of(fx.t7) == EventCatalog::npos);
}

TEST_CASE("a duplicate type in the catalog is rejected") {
  CatalogFixture fx;
  CHECK(code_of([&] { EventCatalog catalog({fx.t0, fx.t0}); }) == errc::duplicate_slot);
}

TEST_CASE("an overridden slot dispatches the override") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1});
  TypedHandler handler(HandlerId{3}, catalog);
  std::vector<std::string> trace;
  handler.override_type(fx.t0, [&](const Message& m) {
    trace.push_back("t0 seq " + std::to_string(m.seq));
  });
  CHECK(handler.is_overridden(0));
  CHECK_FALSE(handler.is_overridden(1));
  CHECK(dispatch_typed(catalog, handler, fx.msg(fx.t0, 5)) == TypedOutcome::overridden);
  CHECK(trace == std::vector<std::string>{"t0 seq 5"});
}

TEST_CASE("an in-catalog slot without an override runs the counted default") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1});
  TypedHandler handler(HandlerId{0}, catalog);
  handler.override_type(fx.t0, [](const Message&) {});
  CHECK(dispatch_typed(catalog, handler, fx.msg(fx.t1)) == TypedOutcome::default_handled);
  CHECK(handler.default_hits() == 1);
}

TEST_CASE("a type outside the catalog dispatches nothing") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1});
  TypedHandler handler(HandlerId{0}, catalog);
  bool invoked = false;
  handler.override_type(fx.t0, [&](const Message&) { invoked = true; });
  CHECK(dispatch_typed(catalog, handler, fx.msg(fx.t7)) == TypedOutcome::outside_catalog);
  CHECK_FALSE(invoked);
  CHECK(handler.default_hits() == 0);
}

TEST_CASE("overriding one slot leaves all other slots' outcomes unchanged") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1, fx.t2});
  TypedHandler plain(HandlerId{0}, catalog);
  TypedHandler patched(HandlerId{1}, catalog);
  patched.override_type(fx.t1, [](const Message&) {});
  for (MessageTypeId t : {fx.t0, fx.t2, fx.t7}) {
    CHECK(dispatch_typed(catalog, plain, fx.msg(t)) == dispatch_typed(catalog, patched, fx.msg(t)));
  }
  CHECK(dispatch_typed(catalog, patched, fx.msg(fx.t1)) == TypedOutcome::overridden);
}

TEST_CASE("every in-catalog type dispatches on a handler with zero overrides") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1, fx.t2});
  TypedHandler handler(HandlerId{0}, catalog);
  for (MessageTypeId t : {fx.t0, fx.t1, fx.t2}) {
    CHECK(dispatch_typed(catalog, handler, fx.msg(t)) == TypedOutcome::default_handled);
  }
  CHECK(handler.default_hits() == 3);
}

TEST_CASE("out-of-range slot accesses raise") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0});
  TypedHandler handler(HandlerId{0}, catalog);
  CHECK(code_of([&] { handler.override_slot(1, [](const Message&) {}); }) == errc::unknown_slot);
  CHECK(code_of([&] { handler.override_type(fx.t7, [](const Message&) {}); }) == errc::unknown_slot);
  CHECK(code_of([&] { catalog.slot_type(1); }) == errc::unknown_slot);
}

TEST_CASE("an invalid type id is outside every catalog") {
  CatalogFixture fx;
  EventCatalog catalog({fx.t0, fx.t1});
  TypedHandler handler(HandlerId{0}, catalog);
  CHECK(dispatch_typed(catalog, handler, fx.msg(MessageTypeId::invalid())) == TypedOutcome::outside_catalog);
}
