#include "afdecg/afd.hpp"
#include "afdecg/analytic.hpp"
#include "afdecg/errors.hpp"
#include "afdecg/ifreq.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace afdecg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AFDDecomposition fake_decomposition(std::vector<std::complex<double>> poles,
                                    std::vector<std::complex<double>> coeffs, int grid_len) {
    AFDDecomposition d;
    for (const auto& a : poles) d.poles.push_back(UnitDiskPoint{a});
    d.coeffs = std::move(coeffs);
    d.level = static_cast<int>(d.poles.size());
    d.grid_len = grid_len;
    d.residual_energies.assign(static_cast<std::size_t>(d.level) + 1, 0.0);
    return d;
}

} // namespace

TEST_CASE("closed form at hand-computed points") {
    // Single real pole r: theta'(0) = r/(1-r), theta'(pi) = -r/(1+r).
    const auto d1 = fake_decomposition({{0.5, 0.0}}, {{1.0, 0.0}}, 64);
    CHECK(instantaneous_frequency_at(d1, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(instantaneous_frequency_at(d1, 1, std::numbers::pi) ==
          doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

    // Component 2 past an earlier pole at 0.5: zero evaluator term plus the
    // Poisson kernel (1-r^2)/(1-2r cos t+r^2).
    const auto d2 = fake_decomposition({{0.5, 0.0}, {0.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}, 64);
    CHECK(instantaneous_frequency_at(d2, 2, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(instantaneous_frequency_at(d2, 2, std::numbers::pi) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)instantaneous_frequency_at(d1, 0, 0.0), ValidationError);
    CHECK_THROWS_AS((void)instantaneous_frequency_at(d1, 2, 0.0), ValidationError);
}

TEST_CASE("all-zero poles give the integer frequency ladder") {
    std::vector<std::complex<double>> poles(10, {0.0, 0.0});
    std::vector<std::complex<double>> coeffs(10, {1.0, 0.0});
    const auto d = fake_decomposition(poles, coeffs, 301);
    for (int n = 1; n <= 10; ++n) {
        const IFCurve curve = instantaneous_frequency(d, n);
        for (double v : curve.values) CHECK(std::abs(v - (n - 1)) < 1e-9);
    }
}

TEST_CASE("closed form matches numeric phase differentiation") {
    // The numeric oracle needs a fine grid: central differences carry an
    // O(h^2 theta''') error that only drops below 1e-3 well past M ~ 10^4
    // when poles sit at radius 0.9.
    const int m = 16384;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> radius(0.0, 0.9);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);

    for (int set = 0; set < 6; ++set) {
        const int n_poles = 2 + set % 3;
        std::vector<std::complex<double>> poles, coeffs;
        for (int k = 0; k < n_poles; ++k) {
            poles.push_back(std::polar(radius(rng), angle(rng)));
            coeffs.push_back(std::polar(1.0 + k, angle(rng)));
        }
        const auto d = fake_decomposition(poles, coeffs, m);

        for (int n = 1; n <= n_poles; ++n) {
            ComplexSignal comp = tm_basis(d.poles, n, m);
            for (auto& v : comp) v *= d.coeffs[static_cast<std::size_t>(n) - 1];
            const IFCurve numeric = numeric_phase_derivative(comp);
            const IFCurve closed = instantaneous_frequency(d, n);
            double err = 0.0;
            for (int j = 1; j < m - 1; ++j)
                err = std::max(err, std::abs(numeric.values[j] - closed.values[j]));
            CHECK(err < 1e-3);
        }
    }
}

TEST_CASE("numeric oracle handles wrapping and rejects zeros") {
    const int m = 256;
    ComplexSignal tone(m);
    for (int j = 0; j < m; ++j) tone[j] = std::polar(2.0, 5.0 * kTwoPi * j / m);
    const IFCurve curve = numeric_phase_derivative(tone);
    for (double v : curve.values) CHECK(v == doctest::Approx(5.0).epsilon(1e-8));

    tone[100] = {0.0, 0.0};
    CHECK_THROWS_AS((void)numeric_phase_derivative(tone), ValidationError);
}

TEST_CASE("time-frequency grid with zero poles is exactly diagonal") {
    // Zero poles make each component a pure tone of constant modulus
    // |c_n| at integer frequency n-1, so row j holds |c_{b+1}|^2 in bin b.
    const int level = 5, m = 128;
    std::vector<std::complex<double>> poles(level, {0.0, 0.0});
    std::vector<std::complex<double>> coeffs;
    for (int n = 0; n < level; ++n) coeffs.push_back({0.5 + n, 0.25});
    const auto d = fake_decomposition(poles, coeffs, m);

    TFRBinSpec spec;
    spec.bins = level;
    spec.lo = 0.0;
    spec.hi = static_cast<double>(level);
    const TFRGrid grid = tfr(d, spec);

    REQUIRE(grid.freq_bins() == level);
    REQUIRE(static_cast<int>(grid.times.size()) == m);
    CHECK(grid.clamped == 0);
    for (int j = 0; j < m; ++j)
        for (int b = 0; b < level; ++b) {
            const double expected = std::norm(coeffs[static_cast<std::size_t>(b)]);
            CHECK(grid.at(j, b) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("marginals match component energies from reconstruction") {
    std::mt19937 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int m = 301, level = 6;
    RealSignal s(m);
    for (auto& v : s) v = gauss(rng);
    const SearchGrid sgrid = SearchGrid::uniform(16, 0.95, m);
    const AFDDecomposition d = decompose(analytic_signal(s), level, sgrid, true, mean_coefficient(s));

    // Component n recovered as the difference of successive partial sums.
    std::vector<ComplexSignal> comps;
    ComplexSignal prev(m, {0.0, 0.0});
    for (int n = 1; n <= level; ++n) {
        const ComplexSignal cur = reconstruct(d, n).analytic;
        ComplexSignal c(m);
        for (int j = 0; j < m; ++j) c[j] = cur[j] - prev[j];
        comps.push_back(std::move(c));
        prev = cur;
    }

    TFRBinSpec spec;
    spec.bins = 32;
    spec.lo = 0.0;
    spec.hi = static_cast<double>(level);
    const TFRGrid grid = tfr(d, spec);

    double captured = 0.0;
    for (const auto& c : d.coeffs) captured += std::norm(c);

    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        double row = 0.0;
        for (int b = 0; b < grid.freq_bins(); ++b) row += grid.at(j, b);
        double expected = 0.0;
        for (const auto& c : comps) expected += std::norm(c[static_cast<std::size_t>(j)]);
        CHECK(row == doctest::Approx(expected).epsilon(1e-8));
        total += row;
    }
    // Mean of the marginal over the grid is the captured energy.
    CHECK(total / m == doctest::Approx(captured).epsilon(1e-10));

    // A deliberately narrow band still conserves energy, just clamped to
    // the edge bins.
    TFRBinSpec narrow;
    narrow.bins = 4;
    narrow.lo = 0.0;
    narrow.hi = 0.5;
    const TFRGrid pinched = tfr(d, narrow);
    CHECK(pinched.clamped > 0);
    double pinched_total = 0.0;
    for (double e : pinched.energy) pinched_total += e;
    CHECK(pinched_total / m == doctest::Approx(captured).epsilon(1e-10));
}

TEST_CASE("bin spec validation") {
    const auto d = fake_decomposition({{0.0, 0.0}}, {{1.0, 0.0}}, 64);
    TFRBinSpec bad;
    bad.bins = 0;
    CHECK_THROWS_AS((void)tfr(d, bad), ValidationError);
    bad.bins = 8;
    bad.lo = 1.0;
    bad.hi = 1.0;
    CHECK_THROWS_AS((void)tfr(d, bad), ValidationError);

    TFRBinSpec one;
    one.bins = 1;
    one.lo = 0.0;
    one.hi = 2.0;
    const TFRGrid grid = tfr(d, one);
    CHECK(grid.freq_bins() == 1);
    double total = 0.0;
    for (double e : grid.energy) total += e;
    CHECK(total / 64.0 == doctest::Approx(std::norm(d.coeffs[0])).epsilon(1e-10));
}
