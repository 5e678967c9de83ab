#pragma once

#include "slabmhd/chebyshev.hpp"
#include "slabmhd/fourier.hpp"
#include "slabmhd/grids.hpp"

namespace slabmhd {

enum class Domain { Spectral, Physical };
enum class Region { Lower, Upper, Both };

inline bool region_has_lower(Region r) { return r != Region::Upper; }
inline bool region_has_upper(Region r) { return r != Region::Lower; }

enum class Half { Lower, Upper };

/// Real scalar field on the torus, stored as complex Fourier amplitudes
/// (Domain::Spectral) or point values (Domain::Physical). Real-valuedness
/// is the Hermitian symmetry fhat(-xi) = conj(fhat(xi)).
class SurfaceField {
  public:
    SurfaceField() = default;
    SurfaceField(TorusGrid grid, Domain domain)
        : grid_(grid), domain_(domain), data_(VectorXcd::Zero(grid.modes())) {}

    const TorusGrid& grid() const { return grid_; }
    Domain domain() const { return domain_; }
    VectorXcd& data() { return data_; }
    const VectorXcd& data() const { return data_; }

    Complex& operator[](int m) { return data_[m]; }
    Complex operator[](int m) const { return data_[m]; }

    /// Spectral coefficient of mode (xi1, xi2).
    Complex coeff(int xi1, int xi2) const { return data_[grid_.index_of(xi1, xi2)]; }
    void set_coeff(int xi1, int xi2, Complex v) { data_[grid_.index_of(xi1, xi2)] = v; }

    static SurfaceField constant(TorusGrid grid, Real c) {
        SurfaceField f(grid, Domain::Spectral);
        f.data_[0] = c;
        return f;
    }

  private:
    TorusGrid grid_;
    Domain domain_ = Domain::Spectral;
    VectorXcd data_;
};

/// Real scalar field on one or both slab halves: Fourier in the horizontal,
/// Chebyshev-Gauss-Lobatto point values in the vertical. Row i of a block is
/// the i-th vertical point (ascending x3), column m the horizontal mode or
/// collocation point depending on `domain`.
class VolumeField {
  public:
    VolumeField() = default;
    VolumeField(SlabGrid grid, Region region, Domain domain)
        : grid_(grid), region_(region), domain_(domain) {
        if (region_has_lower(region))
            lower_.setZero(grid.nz_lower, grid.torus.modes());
        if (region_has_upper(region))
            upper_.setZero(grid.nz_upper, grid.torus.modes());
    }

    const SlabGrid& grid() const { return grid_; }
    const TorusGrid& torus() const { return grid_.torus; }
    Region region() const { return region_; }
    Domain domain() const { return domain_; }
    void set_domain(Domain d) { domain_ = d; }

    bool has_lower() const { return region_has_lower(region_); }
    bool has_upper() const { return region_has_upper(region_); }

    MatrixXcd& block(Half h) { return h == Half::Lower ? lower_ : upper_; }
    const MatrixXcd& block(Half h) const { return h == Half::Lower ? lower_ : upper_; }
    MatrixXcd& lower() { return lower_; }
    const MatrixXcd& lower() const { return lower_; }
    MatrixXcd& upper() { return upper_; }
    const MatrixXcd& upper() const { return upper_; }

    int nz(Half h) const { return h == Half::Lower ? grid_.nz_lower : grid_.nz_upper; }

    std::shared_ptr<const ChebyshevBasis> basis(Half h) const {
        return h == Half::Lower ? lower_basis(grid_.nz_lower) : upper_basis(grid_.nz_upper);
    }

    std::vector<Half> halves() const {
        std::vector<Half> hs;
        if (has_lower())
            hs.push_back(Half::Lower);
        if (has_upper())
            hs.push_back(Half::Upper);
        return hs;
    }

    static VolumeField constant(SlabGrid grid, Region region, Real c) {
        VolumeField f(grid, region, Domain::Spectral);
        for (Half h : f.halves())
            f.block(h).col(0).setConstant(c);
        return f;
    }

  private:
    SlabGrid grid_;
    Region region_ = Region::Lower;
    Domain domain_ = Domain::Spectral;
    MatrixXcd lower_, upper_;
};

/// Three VolumeField components on a shared grid and region.
struct VectorField {
    VolumeField x1, x2, x3;

    VectorField() = default;
    VectorField(SlabGrid grid, Region region, Domain domain)
        : x1(grid, region, domain), x2(grid, region, domain), x3(grid, region, domain) {}

    VolumeField& operator[](int i) { return i == 0 ? x1 : (i == 1 ? x2 : x3); }
    const VolumeField& operator[](int i) const { return i == 0 ? x1 : (i == 1 ? x2 : x3); }

    const SlabGrid& grid() const { return x1.grid(); }
    Region region() const { return x1.region(); }
    Domain domain() const { return x1.domain(); }
};

// ---------------------------------------------------------------------------
// transforms

inline void require_same_grid(const SurfaceField& a, const SurfaceField& b) {
    if (a.grid() != b.grid())
        throw ConfigError("surface fields live on different grids");
}

inline void require_same_layout(const VolumeField& a, const VolumeField& b) {
    if (a.grid() != b.grid() || a.region() != b.region())
        throw ConfigError("volume fields live on different grids/regions");
}

inline SurfaceField to_spectral(const SurfaceField& f) {
    if (f.domain() == Domain::Spectral)
        return f;
    SurfaceField out(f.grid(), Domain::Spectral);
    VectorXcd line = f.data();
    detail::transform_line(line, f.grid(), true);
    out.data() = line;
    return out;
}

inline SurfaceField to_physical(const SurfaceField& f) {
    if (f.domain() == Domain::Physical)
        return f;
    SurfaceField out(f.grid(), Domain::Physical);
    VectorXcd line = f.data();
    detail::transform_line(line, f.grid(), false);
    out.data() = line;
    return out;
}

inline VolumeField to_spectral(const VolumeField& f) {
    if (f.domain() == Domain::Spectral)
        return f;
    VolumeField out = f;
    out.set_domain(Domain::Spectral);
    for (Half h : out.halves())
        detail::transform_rows(out.block(h), f.torus(), true);
    return out;
}

inline VolumeField to_physical(const VolumeField& f) {
    if (f.domain() == Domain::Physical)
        return f;
    VolumeField out = f;
    out.set_domain(Domain::Physical);
    for (Half h : out.halves())
        detail::transform_rows(out.block(h), f.torus(), false);
    return out;
}

inline VectorField to_spectral(const VectorField& v) {
    VectorField out = v;
    for (int i = 0; i < 3; ++i)
        out[i] = to_spectral(v[i]);
    return out;
}

inline VectorField to_physical(const VectorField& v) {
    VectorField out = v;
    for (int i = 0; i < 3; ++i)
        out[i] = to_physical(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// arithmetic (same representation on both operands)

inline SurfaceField operator+(const SurfaceField& a, const SurfaceField& b) {
    require_same_grid(a, b);
    SurfaceField out = a;
    out.data() += b.data();
    return out;
}

inline SurfaceField operator-(const SurfaceField& a, const SurfaceField& b) {
    require_same_grid(a, b);
    SurfaceField out = a;
    out.data() -= b.data();
    return out;
}

inline SurfaceField operator*(Real s, const SurfaceField& a) {
    SurfaceField out = a;
    out.data() *= s;
    return out;
}

inline SurfaceField operator*(const SurfaceField& a, Real s) { return s * a; }

inline VolumeField operator+(const VolumeField& a, const VolumeField& b) {
    require_same_layout(a, b);
    VolumeField out = a;
    for (Half h : out.halves())
        out.block(h) += b.block(h);
    return out;
}

inline VolumeField operator-(const VolumeField& a, const VolumeField& b) {
    require_same_layout(a, b);
    VolumeField out = a;
    for (Half h : out.halves())
        out.block(h) -= b.block(h);
    return out;
}

inline VolumeField operator*(Real s, const VolumeField& a) {
    VolumeField out = a;
    for (Half h : out.halves())
        out.block(h) *= s;
    return out;
}

inline VolumeField operator*(const VolumeField& a, Real s) { return s * a; }

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    VectorField out = a;
    for (int i = 0; i < 3; ++i)
        out[i] = a[i] + b[i];
    return out;
}

inline VectorField operator-(const VectorField& a, const VectorField& b) {
    VectorField out = a;
    for (int i = 0; i < 3; ++i)
        out[i] = a[i] - b[i];
    return out;
}

inline VectorField operator*(Real s, const VectorField& a) {
    VectorField out = a;
    for (int i = 0; i < 3; ++i)
        out[i] = s * a[i];
    return out;
}

// ---------------------------------------------------------------------------
// pointwise products (computed in physical space; caller dealiases)

inline SurfaceField multiply(const SurfaceField& a, const SurfaceField& b) {
    SurfaceField pa = to_physical(a), pb = to_physical(b);
    SurfaceField out = pa;
    out.data().array() *= pb.data().array();
    return to_spectral(out);
}

inline VolumeField multiply(const VolumeField& a, const VolumeField& b) {
    require_same_layout(a, b);
    VolumeField pa = to_physical(a), pb = to_physical(b);
    VolumeField out = pa;
    for (Half h : out.halves())
        out.block(h).array() *= pb.block(h).array();
    return to_spectral(out);
}

// ---------------------------------------------------------------------------
// dealiasing and symmetry

inline void dealias(SurfaceField& f) {
    if (f.domain() != Domain::Spectral)
        throw ConfigError("dealias expects a spectral field");
    for (int m = 0; m < f.grid().modes(); ++m)
        if (!f.grid().in_dealias_band(m))
            f.data()[m] = 0;
}

inline void dealias(VolumeField& f) {
    if (f.domain() != Domain::Spectral)
        throw ConfigError("dealias expects a spectral field");
    for (int m = 0; m < f.torus().modes(); ++m)
        if (!f.torus().in_dealias_band(m))
            for (Half h : f.halves())
                f.block(h).col(m).setZero();
}

inline void dealias(VectorField& v) {
    for (int i = 0; i < 3; ++i)
        dealias(v[i]);
}

/// Projects a spectral field onto the real-valued (Hermitian) subspace.
inline void enforce_hermitian(SurfaceField& f) {
    const TorusGrid& g = f.grid();
    VectorXcd fixed = f.data();
    for (int m = 0; m < g.modes(); ++m) {
        int mc = g.index_of(-g.xi1(m), -g.xi2(m));
        fixed[m] = 0.5 * (f.data()[m] + std::conj(f.data()[mc]));
    }
    f.data() = fixed;
}

inline void enforce_hermitian(VolumeField& f) {
    const TorusGrid& g = f.torus();
    for (Half h : f.halves()) {
        MatrixXcd fixed = f.block(h);
        for (int m = 0; m < g.modes(); ++m) {
            int mc = g.index_of(-g.xi1(m), -g.xi2(m));
            fixed.col(m) = 0.5 * (f.block(h).col(m) + f.block(h).col(mc).conjugate());
        }
        f.block(h) = fixed;
    }
}

// ---------------------------------------------------------------------------
// traces and slices

enum class Boundary { SigmaMinus, Sigma, SigmaPlus };

/// Boundary trace of a volume field as a surface field (spectral).
/// For Boundary::Sigma on a Both-region field, `h` selects the side.
inline SurfaceField trace(const VolumeField& f, Boundary where, Half h = Half::Lower) {
    VolumeField fs = to_spectral(f);
    SurfaceField out(f.torus(), Domain::Spectral);
    switch (where) {
        case Boundary::SigmaMinus:
            if (!f.has_lower())
                throw ConfigError("trace: field has no lower half");
            out.data() = fs.lower().row(0).transpose();
            break;
        case Boundary::Sigma: {
            Half use = f.has_lower() && f.has_upper() ? h : (f.has_lower() ? Half::Lower : Half::Upper);
            const MatrixXcd& blk = fs.block(use);
            out.data() = (use == Half::Lower ? blk.row(blk.rows() - 1) : blk.row(0)).transpose();
            break;
        }
        case Boundary::SigmaPlus:
            if (!f.has_upper())
                throw ConfigError("trace: field has no upper half");
            out.data() = fs.upper().row(fs.upper().rows() - 1).transpose();
            break;
    }
    return out;
}

/// Interface jump [[f]] = f|upper(Sigma) - f|lower(Sigma) of a Both-region field.
inline SurfaceField interface_jump(const VolumeField& f) {
    if (!f.has_lower() || !f.has_upper())
        throw ConfigError("interface_jump needs a Both-region field");
    return trace(f, Boundary::Sigma, Half::Upper) - trace(f, Boundary::Sigma, Half::Lower);
}

// ---------------------------------------------------------------------------
// resampling (spectral zero-padding / truncation, exact for resolved content)

inline SurfaceField resample(const SurfaceField& f, TorusGrid target) {
    SurfaceField src = to_spectral(f);
    SurfaceField out(target, Domain::Spectral);
    const TorusGrid& g = f.grid();
    for (int m = 0; m < g.modes(); ++m) {
        Complex c = src.data()[m];
        if (c == Complex(0, 0))
            continue;
        int x1 = g.xi1(m), x2 = g.xi2(m);
        bool ny1 = std::abs(x1) == g.n1 / 2, ny2 = std::abs(x2) == g.n2 / 2;
        if ((ny1 && target.n1 > g.n1) || (ny2 && target.n2 > g.n2)) {
            // split a source Nyquist coefficient symmetrically
            Real w = (ny1 && target.n1 > g.n1 ? 0.5 : 1.0) * (ny2 && target.n2 > g.n2 ? 0.5 : 1.0);
            for (int s1 : (ny1 && target.n1 > g.n1) ? std::vector<int>{x1, -x1} : std::vector<int>{x1})
                for (int s2 : (ny2 && target.n2 > g.n2) ? std::vector<int>{x2, -x2} : std::vector<int>{x2})
                    out.data()[target.index_of(s1, s2)] += w * c;
        } else if (std::abs(x1) <= target.n1 / 2 && std::abs(x2) <= target.n2 / 2) {
            out.data()[target.index_of(x1, x2)] += c;
        }
    }
    return out;
}

inline VolumeField resample_vertical(const VolumeField& f, SlabGrid target) {
    if (target.torus != f.torus())
        throw ConfigError("resample_vertical changes only the vertical grids");
    VolumeField src = to_spectral(f);
    VolumeField out(target, f.region(), Domain::Spectral);
    if (f.has_lower())
        out.lower() = src.basis(Half::Lower)->resample_matrix(*lower_basis(target.nz_lower)) * src.lower();
    if (f.has_upper())
        out.upper() = src.basis(Half::Upper)->resample_matrix(*upper_basis(target.nz_upper)) * src.upper();
    return out;
}

}  // namespace slabmhd
