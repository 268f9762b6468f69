#include <catch2/catch_amalgamated.hpp>
#include "perfbound/perfbound.hpp"
TEST_CASE("placeholder test_harness") { CHECK(true); }
