#include "qfuse/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfuse/errors.hpp"

namespace qfuse {

void BoundQuery::validate() const {
    if (atoms < 1) {
        throw InvalidArgument("bound query requires atoms >= 1");
    }
    if (!std::isfinite(sensitivity) || sensitivity <= 0.0) {
        throw InvalidArgument("bound query requires positive sensitivity");
    }
    if (sensors < 1) {
        throw InvalidArgument("bound query requires sensors >= 1");
    }
    if (faults < 0) {
        throw InvalidArgument("bound query requires faults >= 0");
    }
    if (!std::isfinite(visibility) || visibility < 0.0 || visibility > 1.0) {
        throw InvalidArgument("bound query requires visibility in [0, 1]");
    }
    m_eff(sensors, faults, strategy); // throws FaultBudgetExceeded when over budget
}

int m_eff(int sensors, int faults, Strategy strategy) {
    if (sensors < 1 || faults < 0) {
        throw InvalidArgument("m_eff requires sensors >= 1 and faults >= 0");
    }
    if (strategy == Strategy::BFT) {
        if (faults > (sensors - 1) / 3) {
            throw FaultBudgetExceeded("BFT consensus requires f <= floor((M-1)/3): f=" +
                                      std::to_string(faults) + ", M=" + std::to_string(sensors));
        }
        return sensors - 2 * faults;
    }
    if (faults >= sensors) {
        throw FaultBudgetExceeded("outlier exclusion requires f < M: f=" +
                                  std::to_string(faults) + ", M=" + std::to_string(sensors));
    }
    return sensors - faults;
}

namespace {

double base_variance(int atoms, double sensitivity) {
    if (atoms < 1 || !(sensitivity > 0.0)) {
        throw InvalidArgument("variance requires atoms >= 1 and positive sensitivity");
    }
    return 1.0 / (4.0 * static_cast<double>(atoms) * sensitivity * sensitivity);
}

} // namespace

double sql_variance(int atoms, double sensitivity, int sensors) {
    if (sensors < 1) {
        throw InvalidArgument("sql_variance requires sensors >= 1");
    }
    return base_variance(atoms, sensitivity) / static_cast<double>(sensors);
}

double hl_variance(int atoms, double sensitivity, int sensors) {
    if (sensors < 1) {
        throw InvalidArgument("hl_variance requires sensors >= 1");
    }
    const double m = static_cast<double>(sensors);
    return base_variance(atoms, sensitivity) / (m * m);
}

double qfi(int atoms, double sensitivity, int m_eff, double visibility) {
    if (m_eff < 1) {
        throw InvalidArgument("qfi requires m_eff >= 1");
    }
    if (!std::isfinite(visibility) || visibility < 0.0 || visibility > 1.0) {
        throw InvalidArgument("qfi requires visibility in [0, 1]");
    }
    const double per_sensor = 1.0 / base_variance(atoms, sensitivity); // 4 N eta^2
    const double m = static_cast<double>(m_eff);
    const double v2 = visibility * visibility;
    return (1.0 - v2) * per_sensor * m + v2 * per_sensor * m * m;
}

BoundValue unified_bound(const BoundQuery& query) {
    query.validate();
    const int m = m_eff(query.sensors, query.faults, query.strategy);
    const double md = static_cast<double>(m);
    const double v2 = query.visibility * query.visibility;
    const double unit = base_variance(query.atoms, query.sensitivity); // 1/(4 N eta^2)

    BoundValue value;
    value.m_eff = m;
    value.mse_lower = (1.0 - v2) * unit / md + v2 * unit / (md * md);
    value.rmse_lower = std::sqrt(value.mse_lower);
    value.qfi = qfi(query.atoms, query.sensitivity, m, query.visibility);
    return value;
}

double outlier_advantage_db(int sensors, int faults) {
    if (faults < 0) {
        throw InvalidArgument("outlier_advantage_db requires faults >= 0");
    }
    if (sensors - 2 * faults <= 0) {
        throw InvalidArgument("outlier_advantage_db requires M - 2f > 0");
    }
    const double bft = static_cast<double>(sensors - 2 * faults);
    const double outlier = static_cast<double>(sensors - faults);
    return 20.0 * std::log10(bft / outlier);
}

double metrological_gain_db(int sensors) {
    if (sensors < 1) {
        throw InvalidArgument("metrological_gain_db requires sensors >= 1");
    }
    return 10.0 * std::log10(static_cast<double>(sensors));
}

double critical_visibility_literal(int m_eff, double tau_prep) {
    if (m_eff < 1) {
        throw InvalidArgument("critical_visibility_literal requires m_eff >= 1");
    }
    if (!std::isfinite(tau_prep) || tau_prep < 0.0) {
        throw InvalidArgument("critical_visibility_literal requires tau_prep >= 0");
    }
    const double m = static_cast<double>(m_eff);
    const double v_eff_star = std::sqrt(m / (m + 1.0));
    return std::min(1.0, v_eff_star * std::exp(tau_prep));
}

} // namespace qfuse
