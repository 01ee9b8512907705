#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "qfuse/errors.hpp"
#include "qfuse/rng.hpp"
#include "qfuse/sensor.hpp"

using namespace qfuse;

TEST_CASE("phase_from_parameter is the linear encoding") {
    CHECK(phase_from_parameter(25.0, 0.1) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(phase_from_parameter(0.0, 0.1) == 0.0);
    CHECK(phase_from_parameter(1.0, 1.0) == 1.0);
    CHECK_THROWS_AS((void)phase_from_parameter(
                        std::numeric_limits<double>::infinity(), 0.1),
                    InvalidArgument);
    CHECK_THROWS_AS((void)phase_from_parameter(1.0, 0.0), InvalidArgument);
}

TEST_CASE("effective_visibility decays exponentially") {
    CHECK(effective_visibility(1.0, 0.0, 3.7) == 1.0);
    CHECK(effective_visibility(1.0, 2.0, 2.0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(effective_visibility(0.8, 0.3 * 5.0, 5.0) ==
          doctest::Approx(0.5926545765453743).epsilon(1e-12));
    CHECK_THROWS_AS((void)effective_visibility(1.0, 1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS((void)effective_visibility(1.2, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("effective_visibility is monotone non-increasing in t") {
    SplitMix64 rng(11);
    for (int i = 0; i < 120; ++i) {
        const double v0 = rng.uniform01();
        const double t2 = 0.1 + 5.0 * rng.uniform01();
        const double t1 = 10.0 * rng.uniform01();
        const double t2b = t1 + 10.0 * rng.uniform01();
        CHECK(effective_visibility(v0, t1, t2) >= effective_visibility(v0, t2b, t2));
        CHECK(effective_visibility(v0, 0.0, t2) == v0);
    }
}

TEST_CASE("phase_variance reproduces the projection-noise values") {
    CHECK(phase_variance(1000, 1.0) == doctest::Approx(2.5e-4).epsilon(1e-15));
    CHECK(phase_variance(1000, 0.5) == doctest::Approx(1.0e-3).epsilon(1e-15));
    CHECK(phase_variance(1, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    // QPN recovery at full visibility, exact
    CHECK(phase_variance(173, 1.0) * 4.0 * 173.0 == 1.0);
    CHECK_THROWS_AS((void)phase_variance(1000, 0.0), DivergentVariance);
    CHECK_THROWS_AS((void)phase_variance(0, 1.0), InvalidArgument);
}

TEST_CASE("confidence_interval width follows 1/(2 sqrt(N) eta V)") {
    const Interval ci = confidence_interval(25.0, 1000, 0.1, 1.0, 0.05);
    CHECK(ci.midpoint() == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(ci.half_width() == doctest::Approx(0.3098975161522808).epsilon(1e-9));

    // Halving the visibility exactly doubles the width.
    const Interval half = confidence_interval(25.0, 1000, 0.1, 0.5, 0.05);
    CHECK(half.half_width() == doctest::Approx(2.0 * ci.half_width()).epsilon(1e-12));

    // alpha -> 1 collapses the interval onto the estimate.
    const Interval tight = confidence_interval(25.0, 1000, 0.1, 1.0, 1.0 - 1e-12);
    CHECK(tight.half_width() < 1e-9);

    CHECK_THROWS_AS((void)confidence_interval(25.0, 1000, 0.1, 0.0, 0.05),
                    DivergentVariance);
    CHECK_THROWS_AS((void)confidence_interval(25.0, 1000, 0.1, 1.0, 0.0),
                    InvalidArgument);
}

TEST_CASE("sample_measurement honest draws center on the true value") {
    SensorParams params;   // N=1000, eta=0.1, V0=1, coherent
    ByzantineModel byz;
    SplitMix64 rng(404);
    const double sigma = 1.0 / (2.0 * std::sqrt(1000.0) * 0.1);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += sample_measurement(params, 25.0, byz, rng).estimate;
    }
    CHECK(std::abs(sum / n - 25.0) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample_measurement is bit-reproducible and honors fault modes") {
    SensorParams params;
    ByzantineModel byz;

    SplitMix64 a(9), b(9);
    const SensorReading ra = sample_measurement(params, 25.0, byz, a, 3, 1.5);
    const SensorReading rb = sample_measurement(params, 25.0, byz, b, 3, 1.5);
    CHECK(ra.estimate == rb.estimate);
    CHECK(ra.interval.lower == rb.interval.lower);
    CHECK(ra.interval.upper == rb.interval.upper);
    CHECK(ra.visibility == rb.visibility);
    CHECK(ra.sensor_id == 3);
    CHECK(ra.timestamp == 1.5);

    // Degenerate Byzantine offset: exact displacement.
    SensorParams corrupt = params;
    corrupt.mode = SensorMode::Byzantine;
    ByzantineModel degenerate;
    degenerate.kind = ByzantineKind::ConstantOffset;
    degenerate.offset = 5.0;
    degenerate.spread = 0.0;
    SplitMix64 c(1);
    CHECK(sample_measurement(corrupt, 25.0, degenerate, c).estimate == 30.0);

    // Fully decohered honest sensor carries no information.
    SensorParams dead = params;
    dead.mode = SensorMode::Decohered;
    dead.visibility0 = 0.0;
    SplitMix64 d(1);
    CHECK_THROWS_AS((void)sample_measurement(dead, 25.0, byz, d), DivergentVariance);
}

TEST_CASE("confidence intervals achieve their nominal coverage") {
    SensorParams params;
    ByzantineModel byz;
    for (double alpha : {0.05, 0.32}) {
        SplitMix64 rng(777);
        int covered = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const SensorReading r =
                sample_measurement(params, 25.0, byz, rng, 0, 0.0, alpha);
            if (r.interval.contains(25.0)) ++covered;
        }
        const double coverage = static_cast<double>(covered) / n;
        CHECK(std::abs(coverage - (1.0 - alpha)) < 0.02);
    }
}
