#include <doctest.h>
TEST_SUITE_BEGIN("gpr");
TEST_SUITE_END();
