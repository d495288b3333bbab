#include <gtest/gtest.h>

#include "gradient_suite.hpp"

namespace rumi::testing {
namespace {

TEST(GradientSuite, EveryPrimitiveAtTenPoints) {
  for (const auto& r : run_grad_cases(primitive_grad_cases(), 10, 1001)) {
    SCOPED_TRACE(r.name);
    EXPECT_LE(r.worst, 1e-4) << r.name;
  }
}

TEST(GradientSuite, EveryCompositeAtTenPoints) {
  for (const auto& r : run_grad_cases(composite_grad_cases(), 10, 2002)) {
    SCOPED_TRACE(r.name);
    EXPECT_LE(r.worst, 1e-4) << r.name;
  }
}

}  // namespace
}  // namespace rumi::testing
