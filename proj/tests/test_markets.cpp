#include "doctest.h"
TEST_CASE("placeholder markets") { CHECK(true); }
