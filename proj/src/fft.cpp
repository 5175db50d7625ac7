#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace afdecg::detail {

namespace {

// FFTW planning is not thread-safe; execution via fftw_execute_dft on
// distinct arrays is. Plans are cached per (size, sign) and created with
// FFTW_UNALIGNED so they work on arbitrary std::vector storage.
class PlanCache {
public:
    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> tmp_in(n), tmp_out(n);
        fftw_plan p = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(tmp_in.data()),
            reinterpret_cast<fftw_complex*>(tmp_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[key] = p;
        return p;
    }

    ~PlanCache() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

std::vector<std::complex<double>> run(const std::vector<std::complex<double>>& x, int sign) {
    const int n = static_cast<int>(x.size());
    std::vector<std::complex<double>> in(x), out(x.size());
    fftw_plan p = plan_cache().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& x) {
    return run(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> fft_backward(const std::vector<std::complex<double>>& x) {
    return run(x, FFTW_BACKWARD);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace afdecg::detail
