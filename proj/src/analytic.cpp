#include "afdecg/analytic.hpp"

#include "afdecg/errors.hpp"
#include "fft.hpp"

#include <numeric>

namespace afdecg {

std::complex<double> inner_product(const ComplexSignal& f, const ComplexSignal& g) {
    if (f.size() != g.size() || f.empty())
        throw ValidationError("inner_product: size mismatch or empty signal");
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < f.size(); ++j) acc += f[j] * std::conj(g[j]);
    return acc / static_cast<double>(f.size());
}

double energy(const ComplexSignal& f) {
    double acc = 0.0;
    for (const auto& v : f) acc += std::norm(v);
    return acc / static_cast<double>(f.size());
}

double mean_coefficient(const RealSignal& s) {
    if (s.size() < 2) throw ValidationError("mean_coefficient: need at least 2 samples");
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

ComplexSignal analytic_signal(const RealSignal& s) {
    const std::size_t m = s.size();
    if (m < 4) throw ValidationError("analytic_signal: need at least 4 samples");

    ComplexSignal buf(m);
    for (std::size_t j = 0; j < m; ++j) buf[j] = {s[j], 0.0};
    ComplexSignal spec = detail::fft_forward(buf);

    // One-sided spectrum: bins above M/2 are negative frequencies.
    const std::size_t half = m / 2;
    if (m % 2 == 0) spec[half] *= 0.5;
    for (std::size_t k = half + 1; k < m; ++k) spec[k] = {0.0, 0.0};

    ComplexSignal out = detail::fft_backward(spec);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (auto& v : out) v *= inv_m;
    return out;
}

} // namespace afdecg
