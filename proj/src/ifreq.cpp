#include "afdecg/ifreq.hpp"

#include "afdecg/errors.hpp"

#include <cmath>
#include <numbers>

namespace afdecg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase derivative of the evaluator factor at pole a:
// (r cos(t-theta) - r^2) / (1 - 2 r cos(t-theta) + r^2).
double evaluator_phase_term(double r, double theta, double t) {
    if (r == 0.0) return 0.0;
    const double c = std::cos(t - theta);
    return (r * c - r * r) / (1.0 - 2.0 * r * c + r * r);
}

// Phase derivative of a Blaschke factor: the Poisson kernel
// (1 - r^2) / (1 - 2 r cos(t-theta) + r^2), strictly positive for r < 1.
double poisson_term(double r, double theta, double t) {
    if (r == 0.0) return 1.0;
    const double c = std::cos(t - theta);
    return (1.0 - r * r) / (1.0 - 2.0 * r * c + r * r);
}

} // namespace

double instantaneous_frequency_at(const AFDDecomposition& d, int n, double t) {
    if (n < 1 || n > d.level)
        throw ValidationError("instantaneous_frequency: component index out of range");
    const UnitDiskPoint& an = d.poles[static_cast<std::size_t>(n) - 1];
    double v = evaluator_phase_term(an.modulus(), an.phase(), t);
    for (int l = 0; l < n - 1; ++l) {
        const UnitDiskPoint& al = d.poles[static_cast<std::size_t>(l)];
        v += poisson_term(al.modulus(), al.phase(), t);
    }
    return v;
}

IFCurve instantaneous_frequency(const AFDDecomposition& d, int n) {
    IFCurve curve;
    curve.component_index = n;
    curve.values.resize(d.grid_len);
    for (int j = 0; j < d.grid_len; ++j) {
        const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(d.grid_len);
        curve.values[j] = instantaneous_frequency_at(d, n, t);
    }
    return curve;
}

IFCurve numeric_phase_derivative(const ComplexSignal& mono) {
    const int m = static_cast<int>(mono.size());
    if (m < 3) throw ValidationError("numeric_phase_derivative: signal too short");
    std::vector<double> phase(m);
    for (int j = 0; j < m; ++j) {
        if (std::abs(mono[j]) <= 1e-12)
            throw ValidationError("numeric_phase_derivative: near-zero sample at index " +
                                  std::to_string(j));
        phase[j] = std::arg(mono[j]);
    }
    // unwrap
    double offset = 0.0;
    std::vector<double> unwrapped(m);
    unwrapped[0] = phase[0];
    for (int j = 1; j < m; ++j) {
        double delta = phase[j] - phase[j - 1];
        if (delta > std::numbers::pi) offset -= kTwoPi;
        else if (delta < -std::numbers::pi) offset += kTwoPi;
        unwrapped[j] = phase[j] + offset;
    }

    const double h = kTwoPi / static_cast<double>(m);
    IFCurve curve;
    curve.values.resize(m);
    curve.values[0] = (unwrapped[1] - unwrapped[0]) / h;
    curve.values[m - 1] = (unwrapped[m - 1] - unwrapped[m - 2]) / h;
    for (int j = 1; j < m - 1; ++j)
        curve.values[j] = (unwrapped[j + 1] - unwrapped[j - 1]) / (2.0 * h);
    return curve;
}

TFRGrid tfr(const AFDDecomposition& d, const TFRBinSpec& spec) {
    if (spec.bins < 1) throw ValidationError("tfr: empty bin spec");
    if (!(spec.hi > spec.lo)) throw ValidationError("tfr: bin range must be increasing");
    const int m = d.grid_len;
    const int f = spec.bins;

    TFRGrid grid;
    grid.times.resize(m);
    for (int j = 0; j < m; ++j)
        grid.times[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    grid.bin_edges.resize(f + 1);
    for (int b = 0; b <= f; ++b)
        grid.bin_edges[b] = spec.lo + (spec.hi - spec.lo) * static_cast<double>(b) / f;
    grid.energy.assign(static_cast<std::size_t>(m) * f, 0.0);

    ComplexSignal blaschke(m, {1.0, 0.0});
    const double bin_width = (spec.hi - spec.lo) / f;
    for (int n = 1; n <= d.level; ++n) {
        const UnitDiskPoint& a = d.poles[static_cast<std::size_t>(n) - 1];
        ComplexSignal e = evaluator(a, m);
        const double nrm = detail::evaluator_grid_norm(a, m);
        const std::complex<double> c = d.coeffs[static_cast<std::size_t>(n) - 1];
        for (int j = 0; j < m; ++j) {
            const double rho2 = std::norm(c * (e[j] / nrm) * blaschke[j]);
            const double zeta = instantaneous_frequency_at(d, n, grid.times[j]);
            int b = static_cast<int>(std::floor((zeta - spec.lo) / bin_width));
            if (b < 0) { b = 0; ++grid.clamped; }
            else if (b >= f) { b = f - 1; if (zeta > spec.hi) ++grid.clamped; }
            grid.at(j, b) += rho2;
        }
        const std::complex<double> abar = std::conj(a.value);
        for (int j = 0; j < m; ++j) {
            const double t = grid.times[j];
            const std::complex<double> z{std::cos(t), std::sin(t)};
            blaschke[j] *= (z - a.value) / (1.0 - abar * z);
        }
    }
    return grid;
}

} // namespace afdecg
