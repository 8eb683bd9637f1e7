#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace helix {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double TWO_PI = 2.0 * PI;

// 1/sqrt(2*pi): L2(0,2pi)-normalized constant mode.
inline constexpr double INV_SQRT_2PI = 0.39894228040143267794;

// Number of worker threads. Reads HELIX_THREADS once; falls back to the
// hardware count. Always at least 1.
int thread_count();

// Deterministic parallel loop over [0, n). Results must be written to
// disjoint slots indexed by the loop variable so the schedule cannot
// change the output.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

// Quintic smoothstep: 0 at s<=0, 1 at s>=1, C2 across the joints.
inline double smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

}  // namespace helix
