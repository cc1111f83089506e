#pragma once

#include <cmath>

#include "oscid/model.hpp"
#include "oscid/optimize.hpp"

namespace testutil {

inline constexpr double kSigma1 = 0.151;
inline constexpr double kRCircle = 2.3;
inline constexpr double kOmega1 = 0.886;
inline constexpr double kG2Rise = 0.15;  // g2 grows by this much over [0, r_circle]

inline double beta() { return kSigma1 / (kRCircle * kRCircle); }
inline double gamma() { return kG2Rise / (kRCircle * kRCircle); }

/// Reference truth: g1 = 0.151 (1 - (r/2.3)^2), g2 = 0.886 + 0.15 (r/2.3)^2,
/// g3 = r^2.
inline oscid::model::DescriptorModel landau_truth(int n_nodes = 75) {
    return oscid::model::landau_ground_truth(kSigma1, beta(), kOmega1, gamma(),
                                             n_nodes, 1.0);
}

inline oscid::Vec2 default_xi0() { return {0.01 * kRCircle, 0.0}; }

inline oscid::model::Measurements twin_measurements(int n_t = 500, double T = 70.0,
                                                    int n_nodes = 75) {
    return oscid::model::synthesize_measurements(landau_truth(n_nodes), default_xi0(),
                                                 T, n_t, {}, 1e-10, 1e-10);
}

inline oscid::optimize::IdentificationConfig default_config() {
    oscid::optimize::IdentificationConfig cfg;
    cfg.xi0 = default_xi0();
    return cfg;
}

}  // namespace testutil
