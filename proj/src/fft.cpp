#include "helix/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace helix {
namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int n1, int n2, int sign) {
    // Plans are keyed by shape and direction. FFTW_UNALIGNED lets one
    // plan serve any properly sized buffer via fftw_execute_dft.
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(n1, n2, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cplx> scratch(static_cast<size_t>(n1) * n2);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = (n2 == 1)
        ? fftw_plan_dft_1d(n1, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
        : fftw_plan_dft_2d(n1, n2, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, "fft: plan creation failed");
    cache[key] = plan;
    return plan;
}

}  // namespace

void fft_forward(int n1, int n2, cplx* data) {
    fftw_plan plan = get_plan(n1, n2, FFTW_FORWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
    double scale = 1.0 / (static_cast<double>(n1) * n2);
    std::int64_t n = static_cast<std::int64_t>(n1) * n2;
    for (std::int64_t i = 0; i < n; ++i) data[i] *= scale;
}

void fft_backward(int n1, int n2, cplx* data) {
    fftw_plan plan = get_plan(n1, n2, FFTW_BACKWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

}  // namespace helix
