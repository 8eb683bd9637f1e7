#include "helix/field.hpp"

#include <algorithm>
#include <cmath>

namespace helix {

namespace {
void check_same(const Field& a, const Field& b) {
    require(a.box.size() == b.box.size() && a.space == b.space,
            "field: shape or representation mismatch");
}
}  // namespace

Field& Field::operator+=(const Field& o) {
    check_same(*this, o);
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    check_same(*this, o);
    for (size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
}

Field& Field::operator*=(cplx s) {
    for (auto& v : data) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { a += b; return a; }
Field operator-(Field a, const Field& b) { a -= b; return a; }
Field operator*(cplx s, Field a) { a *= s; return a; }

Field derivative(const Field& f, int axis) {
    require(axis == 0 || axis == 1, "derivative: bad axis");
    Field g = f;
    g.to_spectral();
    const Box& b = g.box;
    if (axis == 1 && b.d == 1) {
        std::fill(g.data.begin(), g.data.end(), cplx(0.0, 0.0));
        return g;
    }
    for (int i1 = 0; i1 < b.n1; ++i1) {
        double kk1 = b.k1(i1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            double k = axis == 0 ? kk1 : b.k2(i2);
            g.data[b.idx(i1, i2)] *= cplx(0.0, k);
        }
    }
    return g;
}

Field laplacian(const Field& f) {
    Field g = f;
    g.to_spectral();
    const Box& b = g.box;
    for (int i1 = 0; i1 < b.n1; ++i1) {
        double k1 = b.k1(i1);
        for (int i2 = 0; i2 < b.n2; ++i2) {
            double k2 = b.k2(i2);
            g.data[b.idx(i1, i2)] *= -(k1 * k1 + k2 * k2);
        }
    }
    return g;
}

void dealias(Field& f) {
    Space orig = f.space;
    f.to_spectral();
    const Box& b = f.box;
    int r1 = dealias_radius(b.n1);
    int r2 = b.d == 2 ? dealias_radius(b.n2) : 0;
    for (int i1 = 0; i1 < b.n1; ++i1) {
        int j1 = Box::signed_index(i1, b.n1);
        bool kill1 = std::abs(j1) > r1;
        for (int i2 = 0; i2 < b.n2; ++i2) {
            int j2 = Box::signed_index(i2, b.n2);
            if (kill1 || (b.d == 2 && std::abs(j2) > r2))
                f.data[b.idx(i1, i2)] = cplx(0.0, 0.0);
        }
    }
    if (orig == Space::physical) f.to_physical();
}

double sup_abs(const Field& f) {
    Field g = f;
    g.to_physical();
    double m = 0.0;
    for (const auto& v : g.data) m = std::max(m, std::abs(v));
    return m;
}

double l2_norm(const Field& f) {
    // Parseval: the grid quadrature and the coefficient sum agree, so
    // use whichever representation is already present.
    double s = 0.0;
    for (const auto& v : f.data) s += std::norm(v);
    if (f.space == Space::physical) {
        return std::sqrt(s * f.box.volume() / static_cast<double>(f.box.size()));
    }
    return std::sqrt(s * f.box.volume());
}

cplx inner(const Field& a, const Field& b) {
    check_same(a, b);
    cplx s(0.0, 0.0);
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * std::conj(b.data[i]);
    if (a.space == Space::physical) {
        return s * (a.box.volume() / static_cast<double>(a.box.size()));
    }
    return s * a.box.volume();
}

VecField operator+(const VecField& a, const VecField& b) {
    VecField r;
    for (int i = 0; i < 3; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}

VecField operator-(const VecField& a, const VecField& b) {
    VecField r;
    for (int i = 0; i < 3; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
}

VecField cross(VecField a, VecField b) {
    a.to_physical();
    b.to_physical();
    VecField r(a.box(), Space::physical);
    size_t n = a.c[0].data.size();
    for (size_t i = 0; i < n; ++i) {
        cplx a0 = a.c[0].data[i], a1 = a.c[1].data[i], a2 = a.c[2].data[i];
        cplx b0 = b.c[0].data[i], b1 = b.c[1].data[i], b2 = b.c[2].data[i];
        r.c[0].data[i] = a1 * b2 - a2 * b1;
        r.c[1].data[i] = a2 * b0 - a0 * b2;
        r.c[2].data[i] = a0 * b1 - a1 * b0;
    }
    return r;
}

VecField curl(const VecField& v) {
    // (d2 v3, -d1 v3, d1 v2 - d2 v1); all d3 terms vanish on the box.
    VecField r;
    r.c[0] = derivative(v.c[2], 1);
    r.c[1] = cplx(-1.0, 0.0) * derivative(v.c[2], 0);
    r.c[2] = derivative(v.c[1], 0) - derivative(v.c[0], 1);
    return r;
}

VecField vec_laplacian(const VecField& v) {
    VecField r;
    for (int i = 0; i < 3; ++i) r.c[i] = laplacian(v.c[i]);
    return r;
}

void dealias(VecField& v) {
    for (auto& f : v.c) dealias(f);
}

double sup_abs(const VecField& v) {
    VecField g = v;
    g.to_physical();
    double m = 0.0;
    size_t n = g.c[0].data.size();
    for (size_t i = 0; i < n; ++i) {
        double s = std::norm(g.c[0].data[i]) + std::norm(g.c[1].data[i]) +
                   std::norm(g.c[2].data[i]);
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

}  // namespace helix
