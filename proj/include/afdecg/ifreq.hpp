#pragma once

#include "afdecg/afd.hpp"

namespace afdecg {

// Instantaneous-frequency curve of one decomposition component, in
// cycles per segment period (t runs over [0, 2*pi)).
struct IFCurve {
    std::vector<double> values;
    int component_index = 0; // 1-based
};

// Closed-form phase derivative of c_n B_n: the evaluator term at a_n plus
// one Poisson-kernel term per earlier pole. The coefficient's constant
// phase contributes nothing.
IFCurve instantaneous_frequency(const AFDDecomposition& d, int n);

// Same closed form at a single angle t (used for per-beat features).
double instantaneous_frequency_at(const AFDDecomposition& d, int n, double t);

// Independent oracle: unwrapped sample phase differentiated by central
// differences at grid step 2*pi/M. Requires |value| > 1e-12 everywhere.
IFCurve numeric_phase_derivative(const ComplexSignal& mono);

struct TFRBinSpec {
    int bins = 128;
    double lo = 0.0;
    double hi = 10.0; // typically the decomposition level
};

// Transient time-frequency representation: component energy rho_n^2(t)
// deposited in the bin containing theta'_n(t). Bin assignment is a
// partition (values outside clamp to the edge bins), so the per-time
// marginal equals sum_n rho_n^2(t) exactly.
struct TFRGrid {
    std::vector<double> times;      // M angles
    std::vector<double> bin_edges;  // F+1 edges
    std::vector<double> energy;     // row-major M x F
    long clamped = 0;               // deposits outside [lo, hi]

    int freq_bins() const { return static_cast<int>(bin_edges.size()) - 1; }
    double bin_center(int b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
    double& at(int t, int b) { return energy[static_cast<std::size_t>(t) * freq_bins() + b]; }
    double at(int t, int b) const { return energy[static_cast<std::size_t>(t) * freq_bins() + b]; }
};

TFRGrid tfr(const AFDDecomposition& d, const TFRBinSpec& spec);

} // namespace afdecg
