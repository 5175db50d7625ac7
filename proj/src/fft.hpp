#pragma once

#include <complex>
#include <vector>

namespace afdecg::detail {

// Unnormalized DFT: X[k] = sum_j x[j] e^{-2pi i jk/N}.
std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& x);

// Unnormalized inverse: x[j] = sum_k X[k] e^{+2pi i jk/N} (no 1/N).
std::vector<std::complex<double>> fft_backward(const std::vector<std::complex<double>>& x);

std::size_t next_pow2(std::size_t n);

} // namespace afdecg::detail
