#pragma once

#include <complex>
#include <vector>

namespace afdecg {

// Signals live on the uniform circle grid t_j = 2*pi*j/M, j = 0..M-1.
using RealSignal = std::vector<double>;
using ComplexSignal = std::vector<std::complex<double>>;

// Normalized inner product <f,g> = (1/M) sum f_j conj(g_j), so ||1|| = 1.
std::complex<double> inner_product(const ComplexSignal& f, const ComplexSignal& g);
double energy(const ComplexSignal& f); // <f,f>, real

// Arithmetic mean of the samples (the discrete 0-th Fourier coefficient).
double mean_coefficient(const RealSignal& s);

// Analytic extension s+ = (s + i*Hs + c0)/2 with H the circular Hilbert
// transform, realized in the DFT domain: DC kept in full, positive
// frequencies kept in full, negative frequencies zeroed, Nyquist halved
// at even M. Re(2*s+ - c0) reproduces s to machine precision.
ComplexSignal analytic_signal(const RealSignal& s);

} // namespace afdecg
