#pragma once

#include "slabmhd/fields.hpp"

namespace slabmhd {

enum class Axis { X1, X2, X3 };

namespace detail {

inline Complex ik_pow(Real k, int order) {
    Complex ik(0.0, k);
    Complex r(1.0, 0.0);
    for (int i = 0; i < order; ++i)
        r *= ik;
    return r;
}

/// Relative spectral weight above the 2/3 band; crude resolution indicator.
inline Real horizontal_tail_fraction(const VectorXcd& coeffs, const TorusGrid& g) {
    Real tail = 0, total = 0;
    for (int m = 0; m < g.modes(); ++m) {
        Real a = std::norm(coeffs[m]);
        total += a;
        if (!g.in_dealias_band(m))
            tail += a;
    }
    return total > 0 ? tail / total : 0.0;
}

inline bool under_resolved(Real tail_fraction, int order) {
    // heuristic: each extra derivative costs roughly two digits
    return tail_fraction > std::pow(10.0, -14.0 + 2.0 * order);
}

}  // namespace detail

/// Spectral derivative: multiplication by (2*pi*i*xi)^k horizontally,
/// Chebyshev collocation differentiation vertically (scaled by the affine
/// map of the half-interval). Odd horizontal orders zero the Nyquist line.
/// If `resolution_warning` is given, it is set when the spectral tail is too
/// energetic for the requested order to be trustworthy.
inline SurfaceField differentiate(const SurfaceField& f, Axis axis, int order = 1,
                                  bool* resolution_warning = nullptr) {
    if (order < 1)
        throw ConfigError("differentiate: order must be >= 1");
    if (axis == Axis::X3)
        throw ConfigError("differentiate: surface fields have no vertical direction");
    SurfaceField out = to_spectral(f);
    const TorusGrid& g = f.grid();
    if (resolution_warning)
        *resolution_warning = detail::under_resolved(detail::horizontal_tail_fraction(out.data(), g), order);
    for (int m = 0; m < g.modes(); ++m) {
        Real k = axis == Axis::X1 ? g.k1(m) : g.k2(m);
        bool nyq = axis == Axis::X1 ? std::abs(g.xi1(m)) == g.n1 / 2 : std::abs(g.xi2(m)) == g.n2 / 2;
        out.data()[m] *= (nyq && order % 2 == 1) ? Complex(0, 0) : detail::ik_pow(k, order);
    }
    return out;
}

inline VolumeField differentiate(const VolumeField& f, Axis axis, int order = 1,
                                 bool* resolution_warning = nullptr) {
    if (order < 1)
        throw ConfigError("differentiate: order must be >= 1");
    VolumeField out = to_spectral(f);
    const TorusGrid& g = f.torus();
    if (axis == Axis::X3) {
        for (Half h : out.halves()) {
            const MatrixXd& d = out.basis(h)->diff;
            MatrixXcd blk = out.block(h);
            for (int i = 0; i < order; ++i)
                blk = d * blk;
            out.block(h) = blk;
        }
        if (resolution_warning) {
            Real tail = 0, total = 0;
            for (Half h : out.halves()) {
                VolumeField fs = to_spectral(f);
                MatrixXcd coef = fs.basis(h)->to_coeff * fs.block(h);
                total += coef.squaredNorm();
                tail += coef.bottomRows(std::max<Eigen::Index>(1, coef.rows() / 3)).squaredNorm();
            }
            *resolution_warning = detail::under_resolved(total > 0 ? tail / total : 0.0, order);
        }
        return out;
    }
    if (resolution_warning) {
        Real tail = 0, total = 0;
        for (Half h : out.halves())
            for (int m = 0; m < g.modes(); ++m) {
                Real a = out.block(h).col(m).squaredNorm();
                total += a;
                if (!g.in_dealias_band(m))
                    tail += a;
            }
        *resolution_warning = detail::under_resolved(total > 0 ? tail / total : 0.0, order);
    }
    for (int m = 0; m < g.modes(); ++m) {
        Real k = axis == Axis::X1 ? g.k1(m) : g.k2(m);
        bool nyq = axis == Axis::X1 ? std::abs(g.xi1(m)) == g.n1 / 2 : std::abs(g.xi2(m)) == g.n2 / 2;
        Complex factor = (nyq && order % 2 == 1) ? Complex(0, 0) : detail::ik_pow(k, order);
        for (Half h : out.halves())
            out.block(h).col(m) *= factor;
    }
    return out;
}

// ---------------------------------------------------------------------------
// flat horizontal operators on surface fields

inline std::array<SurfaceField, 2> grad_h(const SurfaceField& f) {
    return {differentiate(f, Axis::X1), differentiate(f, Axis::X2)};
}

inline SurfaceField div_h(const SurfaceField& f1, const SurfaceField& f2) {
    return differentiate(f1, Axis::X1) + differentiate(f2, Axis::X2);
}

inline SurfaceField laplace_h(const SurfaceField& f) {
    SurfaceField out = to_spectral(f);
    const TorusGrid& g = f.grid();
    for (int m = 0; m < g.modes(); ++m)
        out.data()[m] *= -g.ksq(m);
    return out;
}

// ---------------------------------------------------------------------------
// flat differential operators on volume fields

inline VectorField gradient(const VolumeField& f) {
    VectorField out(f.grid(), f.region(), Domain::Spectral);
    out.x1 = differentiate(f, Axis::X1);
    out.x2 = differentiate(f, Axis::X2);
    out.x3 = differentiate(f, Axis::X3);
    return out;
}

inline VolumeField divergence(const VectorField& v) {
    return differentiate(v.x1, Axis::X1) + differentiate(v.x2, Axis::X2) + differentiate(v.x3, Axis::X3);
}

inline VectorField curl(const VectorField& v) {
    VectorField out(v.grid(), v.region(), Domain::Spectral);
    out.x1 = differentiate(v.x3, Axis::X2) - differentiate(v.x2, Axis::X3);
    out.x2 = differentiate(v.x1, Axis::X3) - differentiate(v.x3, Axis::X1);
    out.x3 = differentiate(v.x2, Axis::X1) - differentiate(v.x1, Axis::X2);
    return out;
}

inline VolumeField laplacian(const VolumeField& f) {
    return differentiate(f, Axis::X1, 2) + differentiate(f, Axis::X2, 2) + differentiate(f, Axis::X3, 2);
}

// ---------------------------------------------------------------------------
// pointwise vector algebra (physical space)

inline VectorField cross(const VectorField& a, const VectorField& b) {
    VectorField pa = to_physical(a), pb = to_physical(b);
    VectorField out(a.grid(), a.region(), Domain::Physical);
    for (Half h : a.x1.halves()) {
        out.x1.block(h) = pa.x2.block(h).cwiseProduct(pb.x3.block(h)) - pa.x3.block(h).cwiseProduct(pb.x2.block(h));
        out.x2.block(h) = pa.x3.block(h).cwiseProduct(pb.x1.block(h)) - pa.x1.block(h).cwiseProduct(pb.x3.block(h));
        out.x3.block(h) = pa.x1.block(h).cwiseProduct(pb.x2.block(h)) - pa.x2.block(h).cwiseProduct(pb.x1.block(h));
    }
    return to_spectral(out);
}

inline VectorField cross(const VectorField& a, const Eigen::Vector3d& c) {
    VectorField out(a.grid(), a.region(), a.domain());
    out.x1 = a.x2 * c[2] - a.x3 * c[1];
    out.x2 = a.x3 * c[0] - a.x1 * c[2];
    out.x3 = a.x1 * c[1] - a.x2 * c[0];
    return out;
}

inline VectorField cross(const Eigen::Vector3d& c, const VectorField& a) {
    return -1.0 * cross(a, c);
}

inline VolumeField dot(const VectorField& a, const VectorField& b) {
    VectorField pa = to_physical(a), pb = to_physical(b);
    VolumeField out(a.grid(), a.region(), Domain::Physical);
    for (Half h : out.halves())
        out.block(h) = pa.x1.block(h).cwiseProduct(pb.x1.block(h)) +
                       pa.x2.block(h).cwiseProduct(pb.x2.block(h)) +
                       pa.x3.block(h).cwiseProduct(pb.x3.block(h));
    return to_spectral(out);
}

}  // namespace slabmhd
