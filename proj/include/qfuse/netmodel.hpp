#pragma once

#include <vector>

namespace qfuse {

/// Radio energy cost parameters for one hop.
struct EnergyParams {
    double e_amp = 0.0;     // fixed amplifier energy per bit
    double distance = 0.0;  // hop distance, meters

    void validate() const;
};

/// Fusion locality decision for a cluster head.
enum class FusionLocality { LocalFusion, GlobalFusion };

/// Per-bit transmit energy: e_amp + d^2.
double transmit_energy(double e_amp, double distance);

/// Ratio f(c d)/f(d) of the quadratic energy law; equals c^2 for every d,
/// which is what makes cluster-size planning scale invariant.
double power_law_scale_ratio(double c, double distance);

/// Local fusion iff p_max >= n/2 (real half, boundary inclusive).
FusionLocality pmax_classify(int p_max, int n);

/// Bayesian-corrected maximum membership probability: P(M|C) * P(C).
double pmaxc_probability(double p_m_given_c, double p_c);

/// Shannon entropy in bits of a normalized distribution (0 log 0 := 0).
double source_entropy(const std::vector<double>& probs);

/// Hoeffding deviation bound eps = sqrt(R^2 log2(1/delta) / (2n)).
double hoeffding_epsilon(double range_r, double delta, int n);

} // namespace qfuse
