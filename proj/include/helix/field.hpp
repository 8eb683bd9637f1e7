#pragma once

#include <array>
#include <vector>

#include "helix/fft.hpp"
#include "helix/grid.hpp"

namespace helix {

enum class Space { physical, spectral };

// Complex scalar field on a Box. Carries its own representation flag;
// transforms are in place. Spectral coefficients follow the Fourier
// series convention f(x) = sum c_j exp(i k_j . x).
struct Field {
    Box box;
    Space space = Space::physical;
    std::vector<cplx> data;

    Field() = default;
    explicit Field(const Box& b, Space s = Space::physical)
        : box(b), space(s), data(static_cast<size_t>(b.size()), cplx(0.0, 0.0)) {}

    cplx& at(int i1, int i2 = 0) { return data[static_cast<size_t>(box.idx(i1, i2))]; }
    const cplx& at(int i1, int i2 = 0) const {
        return data[static_cast<size_t>(box.idx(i1, i2))];
    }

    void to_spectral() {
        if (space == Space::spectral) return;
        fft_forward(box.n1, box.n2, data.data());
        space = Space::spectral;
    }
    void to_physical() {
        if (space == Space::physical) return;
        fft_backward(box.n1, box.n2, data.data());
        space = Space::physical;
    }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(cplx s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

// Spectral derivative along axis (0 -> x1, 1 -> x2). Accepts either
// representation, returns a spectral field.
Field derivative(const Field& f, int axis);
Field laplacian(const Field& f);

// Zero all coefficients with |j| above the 2/3 Nyquist radius in each
// dimension (the usual pseudo-spectral dealiasing mask).
void dealias(Field& f);

// Max |j1| (in FFT index units) kept by the dealiasing mask.
inline int dealias_radius(int n) { return n / 3; }

double sup_abs(const Field& f);        // physical-space sup of |f|
double l2_norm(const Field& f);        // sqrt(integral of |f|^2)
cplx inner(const Field& a, const Field& b);  // integral of a * conj(b)

// Real 3-vector field stored as three complex scalars (imaginary parts
// stay at rounding level for the fields this project uses).
struct VecField {
    std::array<Field, 3> c;

    VecField() = default;
    explicit VecField(const Box& b, Space s = Space::physical)
        : c{Field(b, s), Field(b, s), Field(b, s)} {}

    const Box& box() const { return c[0].box; }
    void to_spectral() { for (auto& f : c) f.to_spectral(); }
    void to_physical() { for (auto& f : c) f.to_physical(); }
};

VecField operator+(const VecField& a, const VecField& b);
VecField operator-(const VecField& a, const VecField& b);

// Pointwise cross product; operands are brought to physical space.
VecField cross(VecField a, VecField b);

// curl for fields on the box: d/dx3 is identically zero, and for d = 1
// d/dx2 vanishes as well.
VecField curl(const VecField& v);

VecField vec_laplacian(const VecField& v);
void dealias(VecField& v);
double sup_abs(const VecField& v);

}  // namespace helix
