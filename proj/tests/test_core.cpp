#include <catch2/catch_amalgamated.hpp>

#include "dispatchlab/core.hpp"

using namespace dispatchlab;

TEST_CASE("first registration gets id 0") {
  MessageTypeRegistry reg;
  CHECK(reg.register_type("CLICK") == MessageTypeId{0});
  CHECK(reg.count() == 1);
}

TEST_CASE("ids are dense: a registry with 3 entries hands out id 3") {
  MessageTypeRegistry reg;
  reg.register_type("a");
  reg.register_type("b");
  reg.register_type("c");
  CHECK(reg.register_type("d") == MessageTypeId{3});
  CHECK(reg.count() == 4);
}

TEST_CASE("registering the same name twice raises DuplicateName") {
  MessageTypeRegistry reg;
  reg.register_type("CLICK");
  try {
    reg.register_type("CLICK");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::duplicate_name);
    CHECK(std::string(e.what()).find("CLICK") != std::string::npos);
  }
}

TEST_CASE("names are case-sensitive") {
  MessageTypeRegistry reg;
  reg.register_type("click");
  CHECK_NOTHROW(reg.register_type("CLICK"));
}

TEST_CASE("empty name raises EmptyName") {
  MessageTypeRegistry reg;
  try {
    reg.register_type("");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_name);
  }
}

TEST_CASE("lookup returns the registered id") {
  MessageTypeRegistry reg;
  const MessageTypeId id = reg.register_type("CLICK");
  CHECK(reg.lookup("CLICK") == id);
}

TEST_CASE("lookup of an unregistered name is absent, not an error") {
  MessageTypeRegistry reg;
  CHECK(!reg.lookup("nope").has_value());
}

TEST_CASE("lookup respects registration order: A,B,C then B is id 1") {
  MessageTypeRegistry reg;
  reg.register_type("A");
  reg.register_type("B");
  reg.register_type("C");
  CHECK(reg.lookup("B") == MessageTypeId{1});
}

TEST_CASE("successful registrations always cover ids 0..n-1") {
  MessageTypeRegistry reg;
  for (int i = 0; i < 20; ++i) {
    const MessageTypeId id = reg.register_type("t" + std::to_string(i));
    CHECK(id.value == static_cast<std::uint32_t>(i));
    CHECK(reg.contains(id));
  }
  CHECK(!reg.contains(MessageTypeId{20}));
  CHECK(!reg.contains(MessageTypeId::invalid()));
}

TEST_CASE("name_of inverts register_type and rejects unknown ids") {
  MessageTypeRegistry reg;
  const MessageTypeId id = reg.register_type("PAINT");
  CHECK(reg.name_of(id) == "PAINT");
  try {
    reg.name_of(MessageTypeId{9});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unregistered_type);
  }
}

TEST_CASE("strong ids compare by value and expose validity") {
  CHECK(ComponentId{3} == ComponentId{3});
  CHECK(ComponentId{3} != ComponentId{4});
  CHECK(ComponentId{0}.is_valid());
  CHECK(!ComponentId::invalid().is_valid());
}

TEST_CASE("model tags round-trip through their names") {
  for (ModelTag tag : {ModelTag::direct, ModelTag::os, ModelTag::msgmap, ModelTag::vtable}) {
    CHECK(model_tag_from(to_string(tag)) == tag);
  }
  CHECK(!model_tag_from("bogus").has_value());
}

TEST_CASE("error text leads with the error name") {
  const Error e(errc::unknown_handle, "handle 7");
  CHECK(std::string(e.what()).rfind("UnknownHandle:", 0) == 0);
  CHECK(e.code() == errc::unknown_handle);
}

TEST_CASE("delivery records compare field-wise") {
  const DeliveryRecord a{1, MessageTypeId{2}, ComponentId{3}, HandlerId{4}, ModelTag::direct};
  DeliveryRecord b = a;
  CHECK(a == b);
  b.receiver = HandlerId{5};
  CHECK(!(a == b));
}
