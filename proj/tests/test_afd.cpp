#include "afdecg/afd.hpp"
#include "afdecg/analytic.hpp"
#include "afdecg/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace afdecg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RealSignal random_signal(std::mt19937& rng, int m) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealSignal s(static_cast<std::size_t>(m));
    for (auto& v : s) v = gauss(rng);
    return s;
}

// Exhaustive reference for the pole search: naive DFT for the disk
// extension, Horner evaluation per candidate, and the same
// radius-major/phase-minor near-tie rule the library documents.
PoleSelection brute_force_pole(const ComplexSignal& g, const SearchGrid& grid) {
    const int m = static_cast<int>(g.size());
    std::vector<std::complex<double>> coef(static_cast<std::size_t>(m / 2) + 1, {0.0, 0.0});
    for (std::size_t k = 0; k < coef.size(); ++k) {
        for (int j = 0; j < m; ++j) {
            const double t = -kTwoPi * static_cast<double>(j) * static_cast<double>(k) / m;
            coef[k] += g[static_cast<std::size_t>(j)] * std::complex<double>{std::cos(t), std::sin(t)};
        }
        coef[k] /= static_cast<double>(m);
    }

    auto disk_value = [&](std::complex<double> a) {
        std::complex<double> acc = coef.back();
        for (std::size_t k = coef.size() - 1; k-- > 0;) acc = acc * a + coef[k];
        return acc;
    };

    const int p = grid.phases_per_ring;
    double best = -1.0;
    for (std::size_t ri = 0; ri < grid.radii.size(); ++ri) {
        const double r = grid.radii[ri];
        for (int pi = 0; pi < p; ++pi) {
            const auto v = disk_value(std::polar(r, kTwoPi * pi / p));
            best = std::max(best, (1.0 - r * r) * std::norm(v));
        }
    }
    const double threshold = best * (1.0 - 1e-12);
    for (std::size_t ri = 0; ri < grid.radii.size(); ++ri) {
        const double r = grid.radii[ri];
        for (int pi = 0; pi < p; ++pi) {
            const auto v = disk_value(std::polar(r, kTwoPi * pi / p));
            const double gain = (1.0 - r * r) * std::norm(v);
            if (gain >= threshold) {
                PoleSelection sel;
                sel.pole = UnitDiskPoint{std::polar(r, kTwoPi * pi / p)};
                sel.coefficient = std::sqrt(1.0 - r * r) * v;
                sel.gain = gain;
                sel.radius_index = static_cast<int>(ri);
                sel.phase_index = pi;
                return sel;
            }
        }
    }
    return {};
}

} // namespace

TEST_CASE("pole search matches exhaustive maximization") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        const int m = (trial % 2 == 0) ? 64 : 301;
        const int rings = (trial % 2 == 0) ? 8 : 12;
        const SearchGrid grid = SearchGrid::uniform(rings, 0.9, m);
        const ComplexSignal g = analytic_signal(random_signal(rng, m));

        const PoleSelection fast = next_pole(g, grid);
        const PoleSelection slow = brute_force_pole(g, grid);
        CHECK(fast.radius_index == slow.radius_index);
        CHECK(fast.phase_index == slow.phase_index);
        CHECK(fast.gain == doctest::Approx(slow.gain).epsilon(1e-10));
        CHECK(std::abs(fast.coefficient - slow.coefficient) < 1e-10 * (1.0 + std::abs(slow.coefficient)));
    }
}

TEST_CASE("hand-traced expansion of a pure tone") {
    const int m = 64;
    RealSignal s(m);
    for (int j = 0; j < m; ++j) s[j] = 2.0 * std::cos(kTwoPi * j / m);
    const double c0 = mean_coefficient(s);
    CHECK(std::abs(c0) < 1e-14);

    const SearchGrid grid = SearchGrid::uniform(8, 0.9, m);
    const AFDDecomposition d = decompose(analytic_signal(s), 2, grid, true, c0);

    // s+ = e^{it}: the forced first pole at 0 captures nothing, the shifted
    // remainder is the constant 1, and the second step removes it exactly.
    REQUIRE(d.level == 2);
    CHECK(std::abs(d.poles[0].value) < 1e-14);
    CHECK(std::abs(d.poles[1].value) < 1e-14);
    CHECK(std::abs(d.coeffs[0]) < 1e-13);
    CHECK(std::abs(d.coeffs[1] - std::complex<double>{1.0, 0.0}) < 1e-13);
    CHECK(d.source_energy == doctest::Approx(1.0).epsilon(1e-13));
    REQUIRE(d.residual_energies.size() == 3);
    CHECK(d.residual_energies[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(d.residual_energies[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(d.residual_energies[2] < 1e-20);

    const Reconstruction rec = reconstruct(d);
    for (int j = 0; j < m; ++j) CHECK(std::abs(rec.real[j] - s[j]) < 1e-12);
}

TEST_CASE("free first pole recovers an evaluator signal in one step") {
    const int m = 64;
    // Grid radius 5 of uniform(10, 0.9) lands exactly on 0.5.
    const SearchGrid grid = SearchGrid::uniform(10, 0.9, m);
    const UnitDiskPoint a = make_unit_disk_point({0.5, 0.0});
    const ComplexSignal target = evaluator(a, m);

    const AFDDecomposition d = decompose(target, 1, grid, false, 0.0);
    CHECK(std::abs(d.poles[0].value - std::complex<double>{0.5, 0.0}) < 1e-12);
    CHECK(std::abs(d.coeffs[0] - std::complex<double>{1.0, 0.0}) < 1e-10);
    CHECK(d.residual_energies[1] < 1e-12);
}

TEST_CASE("energy identity and non-increasing residual trace") {
    std::mt19937 rng(2025);
    const int m = 301, level = 10;
    const SearchGrid grid = SearchGrid::uniform(16, 0.95, m);
    for (int trial = 0; trial < 8; ++trial) {
        const RealSignal s = random_signal(rng, m);
        const ComplexSignal sp = analytic_signal(s);
        const AFDDecomposition d = decompose(sp, level, grid, true, mean_coefficient(s));

        double captured = 0.0;
        for (const auto& c : d.coeffs) captured += std::norm(c);
        const double identity_gap =
            std::abs(d.source_energy - captured - d.residual_energies.back());
        CHECK(identity_gap < 1e-8 * d.source_energy);

        for (std::size_t n = 1; n < d.residual_energies.size(); ++n)
            CHECK(d.residual_energies[n] <= d.residual_energies[n - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("basis functions are orthonormal on the grid") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> radius(0.0, 0.9);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    const int m = 512;
    for (int set = 0; set < 5; ++set) {
        const int n = 4 + set;
        std::vector<UnitDiskPoint> poles;
        for (int k = 0; k < n; ++k)
            poles.push_back(make_unit_disk_point(std::polar(radius(rng), angle(rng))));

        std::vector<ComplexSignal> basis;
        for (int k = 1; k <= n; ++k) basis.push_back(tm_basis(poles, k, m));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::complex<double> gram = inner_product(basis[i], basis[j]);
                const double expected = (i == j) ? 1.0 : 0.0;
                CHECK(std::abs(gram - expected) < 1e-6);
            }
    }
}

TEST_CASE("reconstruction error equals the residual") {
    std::mt19937 rng(99);
    const int m = 301;
    const SearchGrid grid = SearchGrid::uniform(16, 0.95, m);
    const RealSignal s = random_signal(rng, m);
    const double c0 = mean_coefficient(s);
    const ComplexSignal sp = analytic_signal(s);
    const AFDDecomposition d = decompose(sp, 8, grid, true, c0);

    for (int upto : {3, 8}) {
        const Reconstruction rec = reconstruct(d, upto);
        ComplexSignal diff(sp);
        for (int j = 0; j < m; ++j) diff[j] -= rec.analytic[j];
        CHECK(energy(diff) == doctest::Approx(d.residual_energies[upto]).epsilon(1e-8));
    }

    CHECK_THROWS_AS((void)reconstruct(d, 0), ValidationError);
    CHECK_THROWS_AS((void)reconstruct(d, 9), ValidationError);
    CHECK(residual_energy(d, 8) == d.residual_energies[8]);
    CHECK_THROWS_AS((void)residual_energy(d, -1), ValidationError);
    CHECK_THROWS_AS((void)residual_energy(d, 9), ValidationError);
}

TEST_CASE("serialization round trip preserves every field") {
    std::mt19937 rng(123);
    const int m = 128;
    const SearchGrid grid = SearchGrid::uniform(8, 0.9, m);
    const RealSignal s = random_signal(rng, m);
    const AFDDecomposition d = decompose(analytic_signal(s), 5, grid, true, mean_coefficient(s));

    const std::string text = decomposition_to_json(d);
    CHECK(text == decomposition_to_json(d)); // deterministic output

    const AFDDecomposition back = decomposition_from_json(text);
    CHECK(back.level == d.level);
    CHECK(back.grid_len == d.grid_len);
    CHECK(back.c0 == d.c0);
    CHECK(back.source_energy == d.source_energy);
    REQUIRE(back.poles.size() == d.poles.size());
    for (std::size_t k = 0; k < d.poles.size(); ++k)
        CHECK(back.poles[k].value == d.poles[k].value);
    REQUIRE(back.coeffs.size() == d.coeffs.size());
    for (std::size_t k = 0; k < d.coeffs.size(); ++k) CHECK(back.coeffs[k] == d.coeffs[k]);
    CHECK(back.residual_energies == d.residual_energies);

    const std::string path = "afd_roundtrip_tmp.json";
    save_decomposition(d, path);
    const AFDDecomposition loaded = load_decomposition(path);
    CHECK(decomposition_to_json(loaded) == text);
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)decomposition_from_json("not json"), IoError);
    CHECK_THROWS_AS((void)load_decomposition("does_not_exist.json"), IoError);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS((void)make_unit_disk_point({0.99, 0.0}, 0.98), ValidationError);
    CHECK_THROWS_AS((void)evaluator(UnitDiskPoint{{1.0, 0.0}}, 64), ValidationError);
    CHECK_THROWS_AS((void)SearchGrid::uniform(1, 0.9, 64), ValidationError);
    CHECK_THROWS_AS((void)SearchGrid::uniform(8, 1.0, 64), ValidationError);

    SearchGrid bad = SearchGrid::uniform(8, 0.9, 64);
    bad.phases_per_ring = 32; // fewer phases than samples
    CHECK_THROWS_AS(bad.validate(64), ValidationError);

    const SearchGrid grid = SearchGrid::uniform(8, 0.9, 64);
    const ComplexSignal zero(64, {0.0, 0.0});
    CHECK_THROWS_AS((void)next_pole(zero, grid), ValidationError);

    std::mt19937 rng(5);
    const ComplexSignal sp = analytic_signal(random_signal(rng, 64));
    CHECK_THROWS_AS((void)decompose(sp, 0, grid), ValidationError);
    CHECK_THROWS_AS((void)decompose(sp, kMaxDecompositionLevel + 1, grid), ValidationError);

    const std::vector<UnitDiskPoint> poles{UnitDiskPoint{{0.3, 0.0}}};
    CHECK_THROWS_AS((void)tm_basis(poles, 0, 64), ValidationError);
    CHECK_THROWS_AS((void)tm_basis(poles, 2, 64), ValidationError);
}
