#pragma once

namespace qfuse {

/// Fault-handling strategy, which fixes how many sensors survive:
/// BFT consensus spends 2f sensors per fault budget, outlier exclusion
/// spends only the f faulty ones.
enum class Strategy { BFT, Outlier };

/// Inputs of the unified MSE lower bound.
struct BoundQuery {
    int atoms = 1000;            // N, atoms per sensor
    double sensitivity = 0.1;    // eta, rad per parameter unit
    int sensors = 1;             // M
    int faults = 0;              // f
    double visibility = 1.0;     // V in [0, 1]
    Strategy strategy = Strategy::BFT;

    void validate() const;
};

/// Evaluated bound plus the derived quantities callers typically want.
struct BoundValue {
    double mse_lower = 0.0;    // parameter units^2
    double rmse_lower = 0.0;   // sqrt(mse_lower)
    int m_eff = 0;
    double qfi = 0.0;          // quantum Fisher information
};

/// Effective sensor count after fault handling: M - 2f (BFT, valid for
/// f <= floor((M-1)/3)) or M - f (outlier exclusion, valid for f < M).
int m_eff(int sensors, int faults, Strategy strategy);

/// Fused variance of M independent unentangled sensors: 1/(4 N eta^2 M).
double sql_variance(int atoms, double sensitivity, int sensors);

/// Fused variance with full entanglement: 1/(4 N eta^2 M^2).
double hl_variance(int atoms, double sensitivity, int sensors);

/// Quantum Fisher information of the partially-entangled network:
/// (1 - V^2) 4 N eta^2 m_eff + V^2 4 N eta^2 m_eff^2.
double qfi(int atoms, double sensitivity, int m_eff, double visibility);

/// Unified MSE lower bound for any unbiased fused estimator:
/// (1 - V^2)/(4 N eta^2 M_eff) + V^2/(4 N eta^2 M_eff^2).
BoundValue unified_bound(const BoundQuery& query);

/// RMSE penalty of BFT relative to outlier exclusion,
/// 20 log10((M - 2f)/(M - f)); <= 0, magnitude is the outlier advantage.
double outlier_advantage_db(int sensors, int faults);

/// Heisenberg-over-SQL gain: 10 log10(M) dB.
double metrological_gain_db(int sensors);

/// Critical visibility from the printed crossover inequality:
/// V_eff* = sqrt(m_eff/(m_eff + 1)), undone through the preparation
/// overhead V_eff = V e^{-tau}, clamped to 1.
double critical_visibility_literal(int m_eff, double tau_prep);

} // namespace qfuse
