#include <gtest/gtest.h>

#include "support/properties.hpp"

namespace repopulse::properties {
namespace {

TEST(MetricsProperties, PrefixPositivityIsEnforced) {
    const auto r = prefix_positivity(200);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, WeightedSizeIsBoundedAndSplitConsistent) {
    const auto r = bounding_and_split(300, 1e-9);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, TimeShiftLeavesEverythingUnchanged) {
    const auto r = time_shift_invariance(200);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, DensityIdentityAndCumulativeRecurrence) {
    const auto r = density_identity_and_recurrence(200, 1e-9);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, SpoilageDriftsByElapsedTime) {
    const auto r = spoilage_drift(300);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, DownsampleMatchesPerDateMean) {
    const auto r = downsample_vs_brute_force(300, 1e-12);
    EXPECT_TRUE(r.ok()) << r.failure;
}

TEST(MetricsProperties, OutputsAreDeterministic) {
    const auto r = determinism(50);
    EXPECT_TRUE(r.ok()) << r.failure;
}

}  // namespace
}  // namespace repopulse::properties
