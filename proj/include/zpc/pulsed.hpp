#pragma once

#include <vector>

#include "zpc/params.hpp"

namespace zpc::pulsed {

/// Mechanical state after a pulsed interaction and a photon-counting outcome.
/// fock_weights, when populated, is a finite prefix of the diagonal
/// number-basis distribution (entries >= 0, summing to <= 1).
struct ConditionedThermalResult {
    double occupation = 0.0;
    double probability = 0.0;
    std::vector<double> fock_weights;
};

/// Number of levels needed so the truncated tail of a geometric (thermal)
/// distribution with the given mean stays below tail_tol.
int thermal_weight_cutoff(double mean, double tail_tol = 1e-10);

/// Zero-photon detection after the anti-Stokes pulse, with detection
/// efficiency eta.  occupation = nbar cos^2(Gt) / (1 + eta nbar sin^2(Gt)).
/// weight_cutoff < 0 picks the default tail_tol = 1e-10 cutoff.
ConditionedThermalResult as_zero_click(double nbar, double gtau, double eta,
                                       int weight_cutoff = -1);

/// n-photon detection after the anti-Stokes pulse (lossless detection).
ConditionedThermalResult as_n_click(double nbar, double gtau, int n_clicks,
                                    int weight_cutoff = -1);

/// Unconditioned (measurement-averaged) occupation: nbar cos^2(Gt).
double laser_cooled_occupation(double nbar, double gtau);

/// Zero-photon detection after the Stokes pulse, with detection efficiency.
ConditionedThermalResult s_zero_click(double nbar, double gtau, double eta,
                                      int weight_cutoff = -1);

/// n-photon detection after the Stokes pulse (lossless detection).
/// fock_weights support starts at level n.
ConditionedThermalResult s_n_click(double nbar, double gtau, int n_clicks,
                                   int weight_cutoff = -1);

/// Unconditioned occupation under the Stokes pulse:
/// nbar + (nbar + 1) sinh^2(Gt).
double tms_occupation(double nbar, double gtau);

/// Efficiency above which the zero-click Stokes outcome cools below nbar:
/// 1 / (nbar + 1).
double threshold_efficiency(double nbar);

} // namespace zpc::pulsed
