#include "qfuse/netmodel.hpp"

#include <cmath>

#include "qfuse/errors.hpp"

namespace qfuse {

void EnergyParams::validate() const {
    if (!std::isfinite(e_amp) || e_amp < 0.0) {
        throw InvalidArgument("e_amp must be non-negative");
    }
    if (!std::isfinite(distance) || distance < 0.0) {
        throw InvalidArgument("distance must be non-negative");
    }
}

double transmit_energy(double e_amp, double distance) {
    EnergyParams params{e_amp, distance};
    params.validate();
    return e_amp + distance * distance;
}

double power_law_scale_ratio(double c, double distance) {
    if (!std::isfinite(c) || c <= 0.0 || !std::isfinite(distance) || distance <= 0.0) {
        throw InvalidArgument("power_law_scale_ratio requires positive c and distance");
    }
    const double scaled = transmit_energy(0.0, c * distance);
    return scaled / transmit_energy(0.0, distance);
}

FusionLocality pmax_classify(int p_max, int n) {
    if (n < 1) {
        throw InvalidArgument("pmax_classify requires n >= 1");
    }
    if (p_max < 0 || p_max > n) {
        throw InvalidArgument("pmax_classify requires 0 <= p_max <= n");
    }
    return 2 * p_max >= n ? FusionLocality::LocalFusion : FusionLocality::GlobalFusion;
}

double pmaxc_probability(double p_m_given_c, double p_c) {
    if (!std::isfinite(p_m_given_c) || p_m_given_c < 0.0 || p_m_given_c > 1.0 ||
        !std::isfinite(p_c) || p_c < 0.0 || p_c > 1.0) {
        throw InvalidArgument("pmaxc_probability requires probabilities in [0, 1]");
    }
    return p_m_given_c * p_c;
}

double source_entropy(const std::vector<double>& probs) {
    double total = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidArgument("source_entropy requires non-negative probabilities");
        }
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw InvalidArgument("source_entropy requires probabilities summing to 1");
    }
    double entropy = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            entropy -= p * std::log2(p);
        }
    }
    return entropy;
}

double hoeffding_epsilon(double range_r, double delta, int n) {
    if (!std::isfinite(range_r) || range_r <= 0.0) {
        throw InvalidArgument("hoeffding_epsilon requires positive range");
    }
    if (!std::isfinite(delta) || delta <= 0.0 || delta >= 1.0) {
        throw InvalidArgument("hoeffding_epsilon requires delta in (0, 1)");
    }
    if (n < 1) {
        throw InvalidArgument("hoeffding_epsilon requires n >= 1");
    }
    return std::sqrt(range_r * range_r * std::log2(1.0 / delta) /
                     (2.0 * static_cast<double>(n)));
}

} // namespace qfuse
