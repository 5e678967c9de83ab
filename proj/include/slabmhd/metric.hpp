#pragma once

#include <optional>

#include "slabmhd/extension.hpp"

namespace slabmhd {

/// Everything the flattening map phi = x3 + eta_bar induces: eta_bar, its
/// space-time gradient and d3 phi = 1 + d3 eta_bar, all on both halves.
/// Physical-space copies are kept because every perturbed operator needs
/// them pointwise. Immutable after construction.
struct Metric {
    SlabGrid grid;
    bool flat = true;

    VolumeField eta_bar;                   // spectral
    VectorField grad_eta_bar;              // spectral (d1, d2, d3)
    VolumeField d3phi;                     // spectral
    std::optional<VolumeField> dt_eta_bar; // spectral, present iff dt_eta given

    // pointwise copies (physical space)
    VectorField grad_eta_bar_phys;
    VolumeField d3phi_phys;
    VolumeField inv_d3phi_phys;
    std::optional<VolumeField> dt_eta_bar_phys;

    bool has_dt() const { return dt_eta_bar.has_value(); }
};

/// Builds the metric of the flattening map from the interface height. The
/// bound 1/2 <= d3 phi <= 3/2 is the smallness regime in which the whole
/// solver operates; it is enforced, not warned about.
inline Metric build_metric(const SurfaceField& eta, const std::optional<SurfaceField>& dt_eta,
                           const PoissonWeights& w, const CutoffProfile& chi, const SlabGrid& grid) {
    Metric m;
    m.grid = grid;
    m.eta_bar = harmonic_extend(eta, w, chi, grid);
    m.flat = max_abs(m.eta_bar) == 0.0;

    m.grad_eta_bar = VectorField(grid, Region::Both, Domain::Spectral);
    m.grad_eta_bar.x1 = differentiate(m.eta_bar, Axis::X1);
    m.grad_eta_bar.x2 = differentiate(m.eta_bar, Axis::X2);
    m.grad_eta_bar.x3 = differentiate(m.eta_bar, Axis::X3);

    m.d3phi = VolumeField::constant(grid, Region::Both, 1.0) + m.grad_eta_bar.x3;
    m.d3phi_phys = to_physical(m.d3phi);

    Real lo = 2.0, hi = 0.0;
    for (Half h : m.d3phi_phys.halves()) {
        lo = std::min(lo, m.d3phi_phys.block(h).real().minCoeff());
        hi = std::max(hi, m.d3phi_phys.block(h).real().maxCoeff());
    }
    if (lo < 0.5 || hi > 1.5)
        throw PreconditionError("build_metric: interface too large (d3 phi leaves [1/2, 3/2])");

    m.grad_eta_bar_phys = to_physical(m.grad_eta_bar);
    m.inv_d3phi_phys = m.d3phi_phys;
    for (Half h : m.inv_d3phi_phys.halves())
        m.inv_d3phi_phys.block(h) = m.d3phi_phys.block(h).cwiseInverse();

    if (dt_eta) {
        m.dt_eta_bar = harmonic_extend(*dt_eta, w, chi, grid);
        m.dt_eta_bar_phys = to_physical(*m.dt_eta_bar);
    }
    return m;
}

inline Metric build_metric(const SurfaceField& eta, const PoissonWeights& w, const CutoffProfile& chi,
                           const SlabGrid& grid) {
    return build_metric(eta, std::nullopt, w, chi, grid);
}

/// The flat metric (eta = 0).
inline Metric flat_metric(const SlabGrid& grid) {
    SurfaceField zero(grid.torus, Domain::Spectral);
    return build_metric(zero, default_poisson_weights(), CutoffProfile(), grid);
}

}  // namespace slabmhd
