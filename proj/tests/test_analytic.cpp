#include "afdecg/analytic.hpp"
#include "afdecg/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace afdecg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent O(M^2) reference transform; deliberately not the FFT the
// library uses.
ComplexSignal naive_dft(const ComplexSignal& x) {
    const std::size_t m = x.size();
    ComplexSignal out(m, {0.0, 0.0});
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < m; ++j) {
            const double t = -kTwoPi * static_cast<double>(j * k % m) / static_cast<double>(m);
            out[k] += x[j] * std::complex<double>{std::cos(t), std::sin(t)};
        }
    return out;
}

RealSignal random_signal(std::mt19937& rng, int m) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealSignal s(static_cast<std::size_t>(m));
    for (auto& v : s) v = gauss(rng);
    return s;
}

} // namespace

TEST_CASE("inner product and energy on pure tones") {
    const int m = 64;
    ComplexSignal one(m, {1.0, 0.0});
    ComplexSignal tone1(m), tone2(m);
    for (int j = 0; j < m; ++j) {
        const double t = kTwoPi * j / m;
        tone1[j] = std::polar(1.0, t);
        tone2[j] = std::polar(1.0, 2.0 * t);
    }

    CHECK(inner_product(one, one).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(energy(tone1) == doctest::Approx(1.0).epsilon(1e-14));
    // Distinct harmonics are orthogonal on the uniform grid.
    CHECK(std::abs(inner_product(tone1, tone2)) < 1e-13);
    CHECK(std::abs(inner_product(tone1, one)) < 1e-13);
    // Conjugate symmetry.
    const auto fg = inner_product(tone1, tone2);
    const auto gf = inner_product(tone2, tone1);
    CHECK(std::abs(fg - std::conj(gf)) < 1e-15);

    const ComplexSignal shorter(m - 1, {1.0, 0.0});
    CHECK_THROWS_AS((void)inner_product(one, shorter), ValidationError);
}

TEST_CASE("mean coefficient is the sample mean") {
    CHECK(mean_coefficient({1.0, 2.0, 3.0, 6.0}) == doctest::Approx(3.0));
    CHECK(mean_coefficient({-1.0, 1.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)mean_coefficient({1.0}), ValidationError);
}

TEST_CASE("analytic extension of elementary signals") {
    const int m = 64;
    RealSignal cosine(m), sine(m), constant(m, 2.5);
    for (int j = 0; j < m; ++j) {
        const double t = kTwoPi * j / m;
        cosine[j] = std::cos(t);
        sine[j] = std::sin(t);
    }

    // cos t -> e^{it}/2 and sin t -> -i e^{it}/2: only the +1 frequency
    // survives, at half amplitude.
    const ComplexSignal cp = analytic_signal(cosine);
    const ComplexSignal sp = analytic_signal(sine);
    for (int j = 0; j < m; ++j) {
        const std::complex<double> z = std::polar(1.0, kTwoPi * j / m);
        CHECK(std::abs(cp[j] - 0.5 * z) < 1e-13);
        CHECK(std::abs(sp[j] - std::complex<double>{0.0, -0.5} * z) < 1e-13);
    }

    // A constant is its own analytic extension.
    const ComplexSignal kp = analytic_signal(constant);
    for (const auto& v : kp) CHECK(std::abs(v - std::complex<double>{2.5, 0.0}) < 1e-13);

    CHECK_THROWS_AS((void)analytic_signal({1.0, 2.0, 3.0}), ValidationError);
}

TEST_CASE("real part identity on random signals") {
    std::mt19937 rng(2024);
    for (int m : {64, 301, 512}) {
        for (int trial = 0; trial < 25; ++trial) {
            const RealSignal s = random_signal(rng, m);
            const double c0 = mean_coefficient(s);
            const ComplexSignal sp = analytic_signal(s);
            double err = 0.0;
            for (int j = 0; j < m; ++j)
                err = std::max(err, std::abs(2.0 * sp[j].real() - c0 - s[j]));
            CHECK(err < 1e-10);
        }
    }
}

TEST_CASE("analytic extension has a one-sided spectrum") {
    std::mt19937 rng(7);
    for (int m : {64, 301, 512}) {
        const RealSignal s = random_signal(rng, m);
        const ComplexSignal sp = analytic_signal(s);
        const ComplexSignal spec = naive_dft(sp);

        double neg = 0.0, total = 0.0;
        for (int k = 0; k < m; ++k) {
            const double e = std::norm(spec[static_cast<std::size_t>(k)]);
            total += e;
            if (k > m / 2) neg += e;
        }
        CHECK(neg / total < 1e-10);

        // DC carries the full mean.
        const double c0 = mean_coefficient(s);
        CHECK(std::abs(spec[0] - std::complex<double>{c0 * m, 0.0}) < 1e-8 * m);

        if (m % 2 == 0) {
            // The shared Nyquist bin is halved rather than kept or dropped.
            ComplexSignal buf(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) buf[static_cast<std::size_t>(j)] = {s[static_cast<std::size_t>(j)], 0.0};
            const ComplexSignal full = naive_dft(buf);
            CHECK(std::abs(spec[static_cast<std::size_t>(m / 2)] - 0.5 * full[static_cast<std::size_t>(m / 2)]) <
                  1e-8 * m);
        }
    }
}
