#pragma once

#include <cstdint>

#include "helix/util.hpp"

namespace helix {

// Periodic computational box. The x1 axis carries n_per helix periods
// (length 2*pi*n_per) on n1 points; for d = 2 a transverse axis of
// length L2 on n2 points is added. d = 1 uses n2 = 1.
//
// Fourier indices are the usual signed FFT integers. Physical
// wavenumbers are j1 / n_per along x1 and 2*pi*j2 / L2 transversely,
// so multiplication by cos(x1) or sin(x1) shifts j1 by exactly n_per.
// Grouping j1 by its residue r modulo n_per therefore splits the
// coefficient array into fibers indexed by the fractional wavenumber
// xi1 = r / n_per; within a fiber the integer ladder k runs over
// [-p/2, p/2) with p = n1 / n_per points.
struct Box {
    int d = 1;
    int n_per = 32;
    int n1 = 256;
    int n2 = 1;
    double L2 = 0.0;

    double L1() const { return TWO_PI * n_per; }
    std::int64_t size() const { return static_cast<std::int64_t>(n1) * n2; }
    int ladder() const { return n1 / n_per; }
    double volume() const { return d == 1 ? L1() : L1() * L2; }
    double dx1() const { return L1() / n1; }
    double dx2() const { return d == 1 ? 0.0 : L2 / n2; }

    // Signed FFT index from storage index; (n + 1) / 2 keeps the
    // degenerate n = 1 axis at frequency zero.
    static int signed_index(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }
    static int storage_index(int j, int n) { return j >= 0 ? j : j + n; }

    double k1(int i1) const { return signed_index(i1, n1) / static_cast<double>(n_per); }
    double k2(int i2) const {
        return d == 1 ? 0.0 : TWO_PI * signed_index(i2, n2) / L2;
    }

    std::int64_t idx(int i1, int i2) const { return static_cast<std::int64_t>(i1) * n2 + i2; }

    // Fiber coordinates of an x1 storage index: residue r in [0, n_per)
    // and ladder integer k.
    void fiber_of(int i1, int& r, int& k) const {
        int j = signed_index(i1, n1);
        r = j % n_per;
        if (r < 0) r += n_per;
        k = (j - r) / n_per;
    }
    int i1_of_fiber(int r, int k) const { return storage_index(r + n_per * k, n1); }

    double xi1_of_fiber(int r) const { return r / static_cast<double>(n_per); }

    void validate() const {
        require(d == 1 || d == 2, "box: d must be 1 or 2");
        require(n_per >= 1 && n1 >= 2 && n1 % n_per == 0,
                "box: n1 must be a positive multiple of n_per");
        require(n1 % 2 == 0, "box: n1 must be even");
        if (d == 2) {
            require(n2 >= 2 && n2 % 2 == 0 && L2 > 0.0, "box: bad transverse grid");
        } else {
            require(n2 == 1, "box: d=1 requires n2=1");
        }
    }
};

}  // namespace helix
