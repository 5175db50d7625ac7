#pragma once

#include "afdecg/analytic.hpp"

#include <complex>
#include <string>
#include <vector>

namespace afdecg {

// Radius ceiling for poles; evaluators become numerically singular as
// |a| -> 1.
inline constexpr double kDefaultPoleRadiusMax = 0.98;

// Point a in the open unit disk, |a| <= r_max < 1.
struct UnitDiskPoint {
    std::complex<double> value{0.0, 0.0};

    double modulus() const { return std::abs(value); }
    double phase() const { return std::arg(value); }
};

UnitDiskPoint make_unit_disk_point(std::complex<double> a,
                                   double r_max = kDefaultPoleRadiusMax);

// Discretization of the pole search: concentric rings of candidate poles.
// Ring radii are strictly increasing starting at 0; every ring carries
// phases_per_ring equally spaced angles 2*pi*p/P.
struct SearchGrid {
    std::vector<double> radii;
    int phases_per_ring = 0;

    // rings equally spaced on [0, r_max]; P = next power of two >= 2*M.
    static SearchGrid uniform(int rings, double r_max, int signal_len);

    void validate(int signal_len) const;
};

// Greedy rational decomposition of an analytic signal: ordered poles,
// coefficients, and the residual-energy trace.
struct AFDDecomposition {
    std::vector<UnitDiskPoint> poles;              // a_1..a_N
    std::vector<std::complex<double>> coeffs;      // c_1..c_N
    int level = 0;                                 // N
    int grid_len = 0;                              // M
    std::vector<double> residual_energies;         // ||R_n||^2, n = 0..N
    double source_energy = 0.0;                    // ||s+||^2
    double c0 = 0.0;                               // mean of the real signal
};

// Samples of the reproducing-kernel evaluator
// e_a(e^{it}) = sqrt(1-|a|^2) / (1 - conj(a) e^{it}) on the M-grid.
ComplexSignal evaluator(const UnitDiskPoint& a, int grid_len);

// Samples of the n-th Takenaka-Malmquist basis function
// B_n = e_{a_n} * prod_{k<n} (z - a_k)/(1 - conj(a_k) z); n is 1-based.
ComplexSignal tm_basis(const std::vector<UnitDiskPoint>& poles, int n, int grid_len);

struct PoleSelection {
    UnitDiskPoint pole;
    std::complex<double> coefficient; // sqrt(1-|a|^2) * G(a)
    double gain = 0.0;                // (1-|a|^2) |G(a)|^2
    int radius_index = 0;
    int phase_index = 0;
};

// Maximal selection over the grid of the energy gain
// A(a) = (1-|a|^2) |G(a)|^2, with G evaluated inside the disk through the
// remainder's non-negative-frequency DFT coefficients. Near-ties (within
// 1e-12 relative) resolve to the smallest radius index, then the smallest
// phase index, so the selection is a total deterministic order.
PoleSelection next_pole(const ComplexSignal& remainder, const SearchGrid& grid);

// Level-N greedy expansion s+ ~ sum c_n B_n. With force_first_pole_zero
// (the pipeline default) a_1 = 0 and c_1 = <s+, 1>. Each step projects the
// reduced remainder G_n onto the selected evaluator and applies
// G_{n+1} = (G_n - c_n e_n) (1 - conj(a_n) z)/(z - a_n) pointwise.
// residual_energies[n] is the measured norm of the reduced remainder, so
// the energy identity ||s+||^2 = sum |c_n|^2 + ||R_N||^2 is a genuine
// check of the recursion, not bookkeeping.
AFDDecomposition decompose(const ComplexSignal& s_plus, int level,
                           const SearchGrid& grid,
                           bool force_first_pole_zero = true,
                           double c0 = 0.0);

inline constexpr int kMaxDecompositionLevel = 64;

struct Reconstruction {
    ComplexSignal analytic;  // sum_{n<=upto} c_n B_n on the stored grid
    RealSignal real;         // 2*Re(analytic) - c0
};

// upto = -1 rebuilds through the full stored level, using the stored c0.
Reconstruction reconstruct(const AFDDecomposition& d, int upto = -1);

// Stored ||R_n||^2, 0 <= n <= level.
double residual_energy(const AFDDecomposition& d, int n);

// Serialization: JSON document with grid length, level, c0, poles and
// coefficients as (re, im) pairs, and the residual trace; enough to
// reconstruct without the original signal. Reload is value-exact, so
// re-serializing reproduces the file byte for byte.
std::string decomposition_to_json(const AFDDecomposition& d);
AFDDecomposition decomposition_from_json(const std::string& text);
void save_decomposition(const AFDDecomposition& d, const std::string& path);
AFDDecomposition load_decomposition(const std::string& path);

namespace detail {
// Discrete norm of the evaluator on the M-grid; 1 + O(r^M) rather than
// exactly 1, which is why projections inside decompose use the
// grid-normalized evaluator.
double evaluator_grid_norm(const UnitDiskPoint& a, int grid_len);

// Non-negative-frequency DFT coefficients of the remainder (bins 0..M/2).
std::vector<std::complex<double>> nonneg_spectrum(const ComplexSignal& g);
} // namespace detail

} // namespace afdecg
