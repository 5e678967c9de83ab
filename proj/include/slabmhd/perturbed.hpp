#pragma once

#include "slabmhd/metric.hpp"

namespace slabmhd {

namespace detail {

/// Restriction of a Both-region field to a narrower region.
inline VolumeField restrict_region(const VolumeField& f, Region r) {
    if (f.region() == r)
        return f;
    if (f.region() != Region::Both)
        throw ConfigError("restrict_region: source must cover the target region");
    VolumeField out(f.grid(), r, f.domain());
    for (Half h : out.halves())
        out.block(h) = f.block(h);
    return out;
}

/// Pointwise product of a field with a metric coefficient (given in physical
/// space on Both), restricted to the field's region. Result is spectral.
inline VolumeField metric_times(const VolumeField& coeff_phys, const VolumeField& f) {
    VolumeField fp = to_physical(f);
    VolumeField out = fp;
    for (Half h : out.halves())
        out.block(h).array() *= coeff_phys.block(h).array();
    return to_spectral(out);
}

}  // namespace detail

inline void require_metric_grid(const Metric& m, const VolumeField& f) {
    if (f.grid() != m.grid)
        throw ConfigError("perturbed operator: field grid does not match the metric");
}

/// d3^phi f = (d3 f) / (d3 phi).
inline VolumeField perturbed_d3(const Metric& m, const VolumeField& f) {
    require_metric_grid(m, f);
    VolumeField d3 = differentiate(f, Axis::X3);
    if (m.flat)
        return d3;
    return detail::metric_times(m.inv_d3phi_phys, d3);
}

/// di^phi f = di f - (di eta_bar) d3^phi f for i = 1, 2.
inline VolumeField perturbed_dh(const Metric& m, const VolumeField& f, Axis axis) {
    if (axis == Axis::X3)
        return perturbed_d3(m, f);
    VolumeField flat = differentiate(f, axis);
    if (m.flat)
        return flat;
    const VolumeField& coeff = axis == Axis::X1 ? m.grad_eta_bar_phys.x1 : m.grad_eta_bar_phys.x2;
    return flat - detail::metric_times(coeff, perturbed_d3(m, f));
}

/// dt^phi f = ft - (dt eta_bar) d3^phi f; `ft` is the caller's time
/// derivative of f. Requires a metric built with dt_eta.
inline VolumeField perturbed_dt(const Metric& m, const VolumeField& ft, const VolumeField& f) {
    require_metric_grid(m, f);
    if (m.flat)
        return ft;
    if (!m.has_dt())
        throw ConfigError("perturbed_dt: metric was built without dt_eta");
    return ft - detail::metric_times(*m.dt_eta_bar_phys, perturbed_d3(m, f));
}

inline VectorField perturbed_grad(const Metric& m, const VolumeField& f) {
    VectorField out(f.grid(), f.region(), Domain::Spectral);
    VolumeField d3p = perturbed_d3(m, f);
    out.x3 = d3p;
    for (int i = 0; i < 2; ++i) {
        Axis ax = i == 0 ? Axis::X1 : Axis::X2;
        out[i] = differentiate(f, ax);
        if (!m.flat) {
            const VolumeField& coeff = i == 0 ? m.grad_eta_bar_phys.x1 : m.grad_eta_bar_phys.x2;
            out[i] = out[i] - detail::metric_times(coeff, d3p);
        }
    }
    return out;
}

inline VolumeField perturbed_div(const Metric& m, const VectorField& v) {
    require_metric_grid(m, v.x1);
    VolumeField out = differentiate(v.x1, Axis::X1) + differentiate(v.x2, Axis::X2);
    out = out + perturbed_d3(m, v.x3);
    if (m.flat)
        return out;
    out = out - detail::metric_times(m.grad_eta_bar_phys.x1, perturbed_d3(m, v.x1));
    out = out - detail::metric_times(m.grad_eta_bar_phys.x2, perturbed_d3(m, v.x2));
    return out;
}

/// curl^phi v = curl v - grad(eta_bar) x d3^phi v.
inline VectorField perturbed_curl(const Metric& m, const VectorField& v) {
    require_metric_grid(m, v.x1);
    VectorField out = curl(v);
    if (m.flat)
        return out;
    VectorField d3p(v.grid(), v.region(), Domain::Spectral);
    for (int i = 0; i < 3; ++i)
        d3p[i] = perturbed_d3(m, v[i]);
    VectorField grad_eta = m.grad_eta_bar_phys;
    for (int i = 0; i < 3; ++i)
        grad_eta[i] = detail::restrict_region(grad_eta[i], v.region());
    return out - cross(grad_eta, d3p);
}

inline VolumeField perturbed_laplacian(const Metric& m, const VolumeField& f) {
    return perturbed_div(m, perturbed_grad(m, f));
}

inline VectorField perturbed_dt(const Metric& m, const VectorField& vt, const VectorField& v) {
    VectorField out = vt;
    for (int i = 0; i < 3; ++i)
        out[i] = perturbed_dt(m, vt[i], v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// interface geometry

enum class CurvatureMode { Full, Linearized };

/// Mean curvature of the interface graph. The full form evaluates
/// div_h(grad_h eta / sqrt(1 + |grad_h eta|^2)) on a refined grid so the
/// quotient does not alias back into the resolved band.
inline SurfaceField mean_curvature(const SurfaceField& eta, CurvatureMode mode) {
    if (mode == CurvatureMode::Linearized)
        return laplace_h(eta);
    const TorusGrid& g = eta.grid();
    TorusGrid fine(2 * g.n1, 2 * g.n2);
    SurfaceField ef = resample(eta, fine);
    SurfaceField d1 = to_physical(differentiate(ef, Axis::X1));
    SurfaceField d2 = to_physical(differentiate(ef, Axis::X2));
    SurfaceField w1(fine, Domain::Physical), w2(fine, Domain::Physical);
    for (int j = 0; j < fine.modes(); ++j) {
        Real s1 = d1.data()[j].real(), s2 = d2.data()[j].real();
        Real w = 1.0 / std::sqrt(1.0 + s1 * s1 + s2 * s2);
        w1.data()[j] = s1 * w;
        w2.data()[j] = s2 * w;
    }
    SurfaceField h = div_h(to_spectral(w1), to_spectral(w2));
    SurfaceField out = resample(h, g);
    dealias(out);
    return out;
}

struct SurfaceNormal {
    std::array<SurfaceField, 3> component;
    bool unit = false;
    const SurfaceField& operator[](int i) const { return component[i]; }
};

/// Upward normal N = (-grad_h eta, 1); `unit` divides by sqrt(1+|grad_h eta|^2)
/// pointwise on the collocation grid.
inline SurfaceNormal normal_vector(const SurfaceField& eta, bool unit = false) {
    const TorusGrid& g = eta.grid();
    SurfaceNormal n{{SurfaceField(g, Domain::Spectral), SurfaceField(g, Domain::Spectral),
                     SurfaceField::constant(g, 1.0)},
                    unit};
    n.component[0] = -1.0 * differentiate(eta, Axis::X1);
    n.component[1] = -1.0 * differentiate(eta, Axis::X2);
    if (!unit)
        return n;
    SurfaceField d1 = to_physical(n.component[0]);
    SurfaceField d2 = to_physical(n.component[1]);
    for (int i = 0; i < 3; ++i)
        n.component[i] = SurfaceField(g, Domain::Physical);
    for (int j = 0; j < g.modes(); ++j) {
        Real s1 = d1.data()[j].real(), s2 = d2.data()[j].real();
        Real w = 1.0 / std::sqrt(1.0 + s1 * s1 + s2 * s2);
        n.component[0].data()[j] = s1 * w;
        n.component[1].data()[j] = s2 * w;
        n.component[2].data()[j] = w;
    }
    return n;
}

}  // namespace slabmhd
