#include <doctest.h>
TEST_SUITE_BEGIN("active");
TEST_SUITE_END();
