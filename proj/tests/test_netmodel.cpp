#include <doctest.h>

#include <cmath>
#include <vector>

#include "qfuse/errors.hpp"
#include "qfuse/netmodel.hpp"

using namespace qfuse;

TEST_CASE("transmit_energy follows the quadratic path-loss law") {
    CHECK(transmit_energy(0.0, 2.0) == 4.0);
    CHECK(transmit_energy(1.0, 0.0) == 1.0);
    CHECK(transmit_energy(0.5, 3.0) == 9.5);
    CHECK(transmit_energy(0.0, 0.0) == 0.0);
    CHECK_THROWS_AS((void)transmit_energy(-0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS((void)transmit_energy(0.1, -1.0), InvalidArgument);

    EnergyParams params;
    CHECK_NOTHROW(params.validate());
    params.e_amp = -1.0;
    CHECK_THROWS_AS(params.validate(), InvalidArgument);
}

TEST_CASE("power_law_scale_ratio is distance-invariant") {
    for (double d : {0.5, 1.0, 7.0, 123.0}) {
        CHECK(power_law_scale_ratio(2.0, d) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(power_law_scale_ratio(1.0, d) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(power_law_scale_ratio(3.0, d) == doctest::Approx(9.0).epsilon(1e-12));
        CHECK(power_law_scale_ratio(0.5, d) == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)power_law_scale_ratio(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS((void)power_law_scale_ratio(2.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS((void)power_law_scale_ratio(-2.0, 1.0), InvalidArgument);
}

TEST_CASE("pmax_classify keeps fusion local on a majority") {
    CHECK(pmax_classify(5, 10) == FusionLocality::LocalFusion);
    CHECK(pmax_classify(4, 10) == FusionLocality::GlobalFusion);
    CHECK(pmax_classify(3, 5) == FusionLocality::LocalFusion);
    CHECK(pmax_classify(2, 5) == FusionLocality::GlobalFusion);
    CHECK(pmax_classify(0, 1) == FusionLocality::GlobalFusion);
    CHECK(pmax_classify(1, 1) == FusionLocality::LocalFusion);
    CHECK_THROWS_AS((void)pmax_classify(6, 5), InvalidArgument);
    CHECK_THROWS_AS((void)pmax_classify(-1, 5), InvalidArgument);
    CHECK_THROWS_AS((void)pmax_classify(0, 0), InvalidArgument);
}

TEST_CASE("pmaxc_probability multiplies the conditional by the prior") {
    CHECK(pmaxc_probability(0.8, 0.5) == 0.4);
    CHECK(pmaxc_probability(1.0, 1.0) == 1.0);
    CHECK(pmaxc_probability(0.3, 0.0) == 0.0);
    CHECK_THROWS_AS((void)pmaxc_probability(1.2, 0.5), InvalidArgument);
    CHECK_THROWS_AS((void)pmaxc_probability(0.5, -0.1), InvalidArgument);
}

TEST_CASE("source_entropy in bits") {
    CHECK(source_entropy({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(source_entropy({1.0}) == 0.0);
    CHECK(source_entropy({0.5, 0.25, 0.25}) == doctest::Approx(1.5).epsilon(1e-15));
    // Zero-probability symbols contribute nothing.
    CHECK(source_entropy({0.5, 0.5, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)source_entropy({0.5, 0.4}), InvalidArgument);
    CHECK_THROWS_AS((void)source_entropy({0.6, 0.6}), InvalidArgument);
    CHECK_THROWS_AS((void)source_entropy({1.5, -0.5}), InvalidArgument);

    // The uniform distribution maximizes entropy at log2(n).
    for (int n = 2; n <= 8; ++n) {
        const std::vector<double> uniform(static_cast<std::size_t>(n), 1.0 / n);
        const double max_bits = source_entropy(uniform);
        CHECK(max_bits == doctest::Approx(std::log2(n)).epsilon(1e-12));
        std::vector<double> skewed(static_cast<std::size_t>(n), 0.5 / (n - 1));
        skewed[0] = 0.5;
        CHECK(source_entropy(skewed) < max_bits + 1e-12);
    }
}

TEST_CASE("hoeffding_epsilon shrinks with samples and confidence") {
    CHECK(hoeffding_epsilon(1.0, 0.5, 1) ==
          doctest::Approx(0.7071067811865476).epsilon(1e-12));
    // Quadrupling the sample count halves the radius exactly.
    CHECK(hoeffding_epsilon(1.0, 0.1, 400) == hoeffding_epsilon(1.0, 0.1, 100) / 2.0);
    CHECK(hoeffding_epsilon(2.0, 0.1, 50) ==
          doctest::Approx(2.0 * hoeffding_epsilon(1.0, 0.1, 50)).epsilon(1e-12));

    double previous = 1e300;
    for (int n : {1, 2, 5, 10, 100, 1000}) {
        const double eps = hoeffding_epsilon(1.0, 0.05, n);
        CHECK(eps < previous);
        previous = eps;
    }
    previous = 0.0;
    for (double delta : {0.5, 0.2, 0.1, 0.01}) {
        const double eps = hoeffding_epsilon(1.0, delta, 10);
        CHECK(eps > previous);
        previous = eps;
    }

    CHECK_THROWS_AS((void)hoeffding_epsilon(0.0, 0.1, 10), InvalidArgument);
    CHECK_THROWS_AS((void)hoeffding_epsilon(1.0, 0.0, 10), InvalidArgument);
    CHECK_THROWS_AS((void)hoeffding_epsilon(1.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS((void)hoeffding_epsilon(1.0, 0.1, 0), InvalidArgument);
}
