#include "helix/frame.hpp"

#include <cmath>
#include <vector>

namespace helix {

namespace {

// cos x1 and sin x1 sampled on the x1 grid, shared by the assembly loops.
struct Trig {
    std::vector<double> c, s;
    explicit Trig(const Box& b) : c(b.n1), s(b.n1) {
        for (int i1 = 0; i1 < b.n1; ++i1) {
            double x = i1 * b.dx1();
            c[i1] = std::cos(x);
            s[i1] = std::sin(x);
        }
    }
};

// Pointwise dot of two vector fields, plain products (operands are real
// up to rounding). Both must be physical.
std::vector<cplx> dot(const VecField& a, const VecField& b) {
    size_t n = a.c[0].data.size();
    std::vector<cplx> r(n);
    for (size_t i = 0; i < n; ++i) {
        r[i] = a.c[0].data[i] * b.c[0].data[i] + a.c[1].data[i] * b.c[1].data[i] +
               a.c[2].data[i] * b.c[2].data[i];
    }
    return r;
}

}  // namespace

FrameBasis::FrameBasis(const Box& box)
    : J1(box, Space::physical), J2(box, Space::physical), h(box, Space::physical) {
    Trig t(box);
    for (int i1 = 0; i1 < box.n1; ++i1) {
        for (int i2 = 0; i2 < box.n2; ++i2) {
            auto k = box.idx(i1, i2);
            J1.c[1].data[k] = -t.s[i1];
            J1.c[2].data[k] = t.c[i1];
            J2.c[0].data[k] = 1.0;
            h.c[1].data[k] = t.c[i1];
            h.c[2].data[k] = t.s[i1];
        }
    }
}

VecField helical_state(const Box& box, double kappa) {
    double windings = kappa * box.n_per;
    require(std::abs(windings - std::round(windings)) < 1e-9,
            "helical_state: kappa * n_per must be an integer");
    VecField n(box, Space::physical);
    for (int i1 = 0; i1 < box.n1; ++i1) {
        double x = i1 * box.dx1();
        cplx cv(std::cos(kappa * x), 0.0), sv(std::sin(kappa * x), 0.0);
        for (int i2 = 0; i2 < box.n2; ++i2) {
            auto k = box.idx(i1, i2);
            n.c[1].data[k] = cv;
            n.c[2].data[k] = sv;
        }
    }
    return n;
}

double helical_energy_density(double kappa) { return 0.5 * kappa * (kappa - 1.0); }

double energy(const VecField& n) {
    VecField p = n;
    p.to_physical();
    VecField cu = curl(n);
    cu.to_physical();
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int ax = 0; ax < 2; ++ax) {
            Field d = derivative(n.c[c], ax);
            d.to_physical();
            for (const auto& v : d.data) acc += (v * v).real();
        }
    }
    auto nc = dot(p, cu);
    for (const auto& v : nc) acc += v.real();
    const Box& b = p.box();
    return 0.5 * acc * b.volume() / static_cast<double>(b.size());
}

Field z_of_u(const Field& u) {
    Field p = u;
    p.to_physical();
    Field z(p.box, Space::physical);
    for (size_t i = 0; i < p.data.size(); ++i) {
        double a2 = std::norm(p.data[i]);
        require(a2 <= 1.0 + 1e-12, "chart: |u| exceeds 1");
        z.data[i] = cplx(-1.0 + std::sqrt(std::max(0.0, 1.0 - a2)), 0.0);
    }
    return z;
}

VecField u_to_m(const Field& u, const FrameBasis& frame) {
    Field p = u;
    p.to_physical();
    Field z = z_of_u(p);
    VecField m(p.box, Space::physical);
    for (size_t i = 0; i < p.data.size(); ++i) {
        double u1 = p.data[i].real(), u2 = p.data[i].imag(), zv = z.data[i].real();
        for (int c = 0; c < 3; ++c) {
            m.c[c].data[i] = u1 * frame.J1.c[c].data[i] + u2 * frame.J2.c[c].data[i] +
                             zv * frame.h.c[c].data[i];
        }
    }
    return m;
}

Field m_to_u(const VecField& m, const FrameBasis& frame) {
    VecField p = m;
    p.to_physical();
    auto a = dot(p, frame.J1);
    auto b = dot(p, frame.J2);
    Field u(p.box(), Space::physical);
    for (size_t i = 0; i < u.data.size(); ++i) {
        u.data[i] = cplx(a[i].real() - b[i].imag(), a[i].imag() + b[i].real());
    }
    return u;
}

VecField llg_rhs(const VecField& n, double alpha) {
    VecField p = n;
    p.to_physical();
    VecField lap = vec_laplacian(n);
    lap.to_physical();
    VecField cu = curl(n);
    cu.to_physical();

    // |grad n|^2 with plain squares, one scalar per grid point.
    size_t sz = p.c[0].data.size();
    std::vector<double> g2(sz, 0.0);
    for (int c = 0; c < 3; ++c) {
        for (int ax = 0; ax < 2; ++ax) {
            Field d = derivative(n.c[c], ax);
            d.to_physical();
            for (size_t i = 0; i < sz; ++i) g2[i] += (d.data[i] * d.data[i]).real();
        }
    }

    VecField torque = cross(p, cu - lap);  // n x (-Lap n + curl n)
    auto cn = dot(cu, p);
    VecField out(p.box(), Space::physical);
    for (size_t i = 0; i < sz; ++i) {
        cplx scal = g2[i] + cn[i];
        for (int c = 0; c < 3; ++c) {
            out.c[c].data[i] = torque.c[c].data[i] +
                               alpha * (lap.c[c].data[i] - cu.c[c].data[i] +
                                        scal * p.c[c].data[i]);
        }
    }
    return out;
}

VecField rhs_m(const VecField& m, const FrameBasis& frame, double alpha) {
    VecField p = m;
    p.to_physical();
    VecField lap = vec_laplacian(m);
    lap.to_physical();
    VecField cm = curl(m);
    cm.to_physical();

    size_t sz = p.c[0].data.size();
    std::vector<double> g2(sz, 0.0);
    std::vector<cplx> jdm(sz, cplx(0.0, 0.0));  // J1 . d1 m
    for (int c = 0; c < 3; ++c) {
        for (int ax = 0; ax < 2; ++ax) {
            Field d = derivative(m.c[c], ax);
            d.to_physical();
            for (size_t i = 0; i < sz; ++i) {
                g2[i] += (d.data[i] * d.data[i]).real();
                if (ax == 0) jdm[i] += frame.J1.c[c].data[i] * d.data[i];
            }
        }
    }

    VecField F = lap - cm;  // Lap m - curl m
    VecField hF = cross(frame.h, F);
    VecField mF = cross(p, F);
    auto hm = dot(frame.h, p);
    auto ch = dot(cm, frame.h);
    auto cmm = dot(cm, p);

    VecField out(p.box(), Space::physical);
    for (size_t i = 0; i < sz; ++i) {
        // grad h : grad m collapses to J1 . d1 m, and curl h = -h.
        cplx gamma = 2.0 * jdm[i] - hm[i] + ch[i] + g2[i] + cmm[i];
        for (int c = 0; c < 3; ++c) {
            cplx base = frame.h.c[c].data[i] + p.c[c].data[i];
            out.c[c].data[i] = alpha * F.c[c].data[i] - hF.c[c].data[i] -
                               mF.c[c].data[i] + alpha * gamma * base;
        }
    }
    return out;
}

Field apply_A_pseudospectral(const Field& u) {
    Field Au = cplx(-1.0, 0.0) * laplacian(u);
    Au.to_physical();
    if (u.box.d == 2) {
        Field d2 = derivative(u, 1);
        d2.to_physical();
        Trig t(u.box);
        const Box& b = u.box;
        for (int i1 = 0; i1 < b.n1; ++i1) {
            cplx ic(0.0, t.c[i1]);
            for (int i2 = 0; i2 < b.n2; ++i2) {
                auto k = b.idx(i1, i2);
                Au.data[k] += ic * d2.data[k];
            }
        }
    }
    return Au;
}

namespace {

// Shared assembly for the chart flow. When with_linear is false the
// (-alpha + i) A u head is dropped, leaving alpha N1 + N2 for steppers
// that apply the linear factor exactly.
Field rhs_u_impl(const Field& u, double alpha, bool with_linear) {
    Field p = u;
    p.to_physical();
    Field z = z_of_u(p);

    Field du1 = derivative(p, 0);
    du1.to_physical();
    Field du2 = derivative(p, 1);
    du2.to_physical();
    Field dz1 = derivative(z, 0);
    dz1.to_physical();
    Field dz2 = derivative(z, 1);
    dz2.to_physical();
    Field lapu = laplacian(p);
    lapu.to_physical();
    Field lapz = laplacian(z);
    lapz.to_physical();
    Field Au = with_linear ? apply_A_pseudospectral(p)
                           : Field(p.box, Space::physical);

    const Box& b = p.box;
    Trig t(b);
    Field out(b, Space::physical);
    const cplx I(0.0, 1.0);
    const cplx lin(-alpha, 1.0);
    for (int i1 = 0; i1 < b.n1; ++i1) {
        double c = t.c[i1], s = t.s[i1];
        for (int i2 = 0; i2 < b.n2; ++i2) {
            auto k = b.idx(i1, i2);
            cplx U = p.data[k], D1 = du1.data[k], D2 = du2.data[k];
            double u1 = U.real(), u2 = U.imag();
            double zv = z.data[k].real();
            double z1 = dz1.data[k].real(), z2 = dz2.data[k].real();
            cplx LU = lapu.data[k];
            double LZ = lapz.data[k].real();

            double gu2 = std::norm(D1) + std::norm(D2);
            double gz2 = z1 * z1 + z2 * z2;

            // Scalar bracket multiplying u in N1. Every term is real.
            double brak = D1.real() - D2.imag() * s + gu2 + gz2 +
                          (u2 * D2.real() - u1 * D2.imag()) * c +
                          zv * D1.real() - u1 * z1 +
                          (u2 * z2 - zv * D2.imag()) * s;
            cplx N1 = z1 - I * (z2 * s) + brak * U;

            cplx N2 = -I * z1 - z2 * s +
                      I * U * (LZ - D1.real() + D2.imag() * s) -
                      zv * (I * LU + D2 * c + z2 * s + I * z1);

            out.data[k] = lin * Au.data[k] + alpha * N1 + N2;
        }
    }
    return out;
}

}  // namespace

Field rhs_u(const Field& u, double alpha) {
    return rhs_u_impl(u, alpha, true);
}

Field rhs_u_nonlinear(const Field& u, double alpha) {
    return rhs_u_impl(u, alpha, false);
}

}  // namespace helix
