#include <doctest.h>

#include <iostream>

#include "properties.hpp"

TEST_CASE("randomized property suites run clean") {
  auto suites = soliton::props::run_all(20260826u, 100);
  REQUIRE(suites.size() == 7);
  for (const auto& s : suites) {
    INFO(s.name, ": ", s.detail);
    CHECK(s.cases == 100);
    CHECK(s.failures == 0);
  }
}
