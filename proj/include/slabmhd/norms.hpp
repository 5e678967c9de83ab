#pragma once

#include "slabmhd/calculus.hpp"

namespace slabmhd {

/// L2 inner product over the field's region (unit measure; no metric weight).
/// Horizontal direction by Parseval, vertical by the exact Chebyshev mass
/// matrix, so the result is exact for the stored interpolants.
inline Real l2_inner(const VolumeField& a, const VolumeField& b) {
    require_same_layout(a, b);
    VolumeField sa = to_spectral(a), sb = to_spectral(b);
    Real sum = 0;
    for (Half h : sa.halves()) {
        const MatrixXd& mass = sa.basis(h)->mass;
        for (int m = 0; m < sa.torus().modes(); ++m)
            sum += (sa.block(h).col(m).adjoint() * mass * sb.block(h).col(m))(0).real();
    }
    return sum;
}

inline Real l2_norm(const VolumeField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

inline Real l2_norm(const VectorField& v) {
    return std::sqrt(std::max(0.0, l2_inner(v.x1, v.x1) + l2_inner(v.x2, v.x2) + l2_inner(v.x3, v.x3)));
}

inline Real volume(const VolumeField& f) {
    Real vol = 0;
    if (f.has_lower())
        vol += 1.0;
    if (f.has_upper())
        vol += 1.0;
    return vol;
}

/// Integral over the region (unit horizontal measure).
inline Real integral(const VolumeField& f) {
    VolumeField fs = to_spectral(f);
    Real sum = 0;
    for (Half h : fs.halves())
        sum += (fs.basis(h)->quadrature.transpose() * fs.block(h).col(0).real())(0);
    return sum;
}

/// Integral over the torus.
inline Real integral(const SurfaceField& f) { return to_spectral(f).data()[0].real(); }

inline Real l2_inner(const SurfaceField& a, const SurfaceField& b) {
    require_same_grid(a, b);
    SurfaceField sa = to_spectral(a), sb = to_spectral(b);
    return sa.data().dot(sb.data()).real();
}

inline Real l2_norm(const SurfaceField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

/// Fractional Sobolev norm |f|_s = ( sum (1+|2 pi xi|^2)^s |fhat|^2 )^(1/2).
inline Real sobolev_norm_surface(const SurfaceField& f, Real s) {
    SurfaceField fs = to_spectral(f);
    const TorusGrid& g = f.grid();
    Real sum = 0;
    for (int m = 0; m < g.modes(); ++m)
        sum += std::pow(1.0 + g.ksq(m), s) * std::norm(fs.data()[m]);
    return std::sqrt(sum);
}

/// Integer volume Sobolev norm ||f||_m, all derivatives up to order m.
inline Real sobolev_norm_volume(const VolumeField& f, int m) {
    if (m < 0)
        throw ConfigError("sobolev_norm_volume: order must be >= 0");
    VolumeField fs = to_spectral(f);
    Real sum = 0;
    for (int b1 = 0; b1 <= m; ++b1)
        for (int b2 = 0; b1 + b2 <= m; ++b2)
            for (int b3 = 0; b1 + b2 + b3 <= m; ++b3) {
                VolumeField d = fs;
                if (b1 > 0)
                    d = differentiate(d, Axis::X1, b1);
                if (b2 > 0)
                    d = differentiate(d, Axis::X2, b2);
                if (b3 > 0)
                    d = differentiate(d, Axis::X3, b3);
                sum += l2_inner(d, d);
            }
    return std::sqrt(std::max(0.0, sum));
}

inline Real sobolev_norm_volume(const VectorField& v, int m) {
    Real a = sobolev_norm_volume(v.x1, m), b = sobolev_norm_volume(v.x2, m), c = sobolev_norm_volume(v.x3, m);
    return std::sqrt(a * a + b * b + c * c);
}

/// Anisotropic norm ||f||_{m,l} = sum over horizontal multi-indices
/// |alpha| <= l of ||d^alpha f||_m.
inline Real anisotropic_norm(const VolumeField& f, int m, int l) {
    if (m < 0 || l < 0)
        throw ConfigError("anisotropic_norm: orders must be >= 0");
    VolumeField fs = to_spectral(f);
    Real sum = 0;
    for (int a1 = 0; a1 <= l; ++a1)
        for (int a2 = 0; a1 + a2 <= l; ++a2) {
            VolumeField d = fs;
            if (a1 > 0)
                d = differentiate(d, Axis::X1, a1);
            if (a2 > 0)
                d = differentiate(d, Axis::X2, a2);
            sum += sobolev_norm_volume(d, m);
        }
    return sum;
}

inline Real anisotropic_norm(const VectorField& v, int m, int l) {
    return anisotropic_norm(v.x1, m, l) + anisotropic_norm(v.x2, m, l) + anisotropic_norm(v.x3, m, l);
}

/// Max of |f| over the collocation grid.
inline Real max_abs(const VolumeField& f) {
    VolumeField p = to_physical(f);
    Real m = 0;
    for (Half h : p.halves())
        m = std::max(m, p.block(h).cwiseAbs().maxCoeff());
    return m;
}

inline Real max_abs(const SurfaceField& f) {
    return to_physical(f).data().cwiseAbs().maxCoeff();
}

inline Real max_abs(const VectorField& v) {
    return std::max({max_abs(v.x1), max_abs(v.x2), max_abs(v.x3)});
}

}  // namespace slabmhd
