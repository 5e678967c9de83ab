#pragma once

#include "slabmhd/core.hpp"

namespace slabmhd {

/// Uniform grid on the unit torus T^2 = (R/Z)^2. Collocation points are
/// x_k = k/n in each direction; modes are integer wavevectors xi with the
/// frequency factor 2*pi (basis e^{2*pi*i*xi.x}).
struct TorusGrid {
    int n1 = 0;
    int n2 = 0;

    TorusGrid() = default;
    TorusGrid(int n1_, int n2_) : n1(n1_), n2(n2_) {
        if (n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0)
            throw ConfigError("TorusGrid: mode counts must be even and >= 4");
    }

    int modes() const { return n1 * n2; }

    /// Signed integer mode for storage index j in [0, n).
    static int signed_mode(int j, int n) { return j <= n / 2 ? j : j - n; }

    int xi1(int m) const { return signed_mode(m % n1, n1); }
    int xi2(int m) const { return signed_mode(m / n1, n2); }

    /// Horizontal wavenumbers 2*pi*xi of storage index m.
    Real k1(int m) const { return two_pi * xi1(m); }
    Real k2(int m) const { return two_pi * xi2(m); }
    Real ksq(int m) const {
        Real a = k1(m), b = k2(m);
        return a * a + b * b;
    }
    Real kabs(int m) const { return std::sqrt(ksq(m)); }

    /// Storage index of mode (xi1, xi2); wraps negative modes.
    int index_of(int xi1_, int xi2_) const {
        int j1 = ((xi1_ % n1) + n1) % n1;
        int j2 = ((xi2_ % n2) + n2) % n2;
        return j1 + n1 * j2;
    }

    bool is_nyquist(int m) const { return (m % n1) == n1 / 2 || (m / n1) == n2 / 2; }

    /// 2/3-rule survivor: |xi_i| <= floor(n_i/3) and not a Nyquist line.
    bool in_dealias_band(int m) const {
        return !is_nyquist(m) && std::abs(xi1(m)) <= n1 / 3 && std::abs(xi2(m)) <= n2 / 3;
    }

    bool operator==(const TorusGrid& o) const { return n1 == o.n1 && n2 == o.n2; }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

/// Two-phase slab: Omega_- = T^2 x (-1,0) and Omega_+ = T^2 x (0,1),
/// Chebyshev-Gauss-Lobatto points on each half. x3 = 0 is a collocation
/// point of both halves.
struct SlabGrid {
    TorusGrid torus;
    int nz_lower = 0;
    int nz_upper = 0;

    SlabGrid() = default;
    SlabGrid(TorusGrid t, int nzl, int nzu) : torus(t), nz_lower(nzl), nz_upper(nzu) {
        if (nzl < 5 || nzu < 5)
            throw ConfigError("SlabGrid: need at least 5 Chebyshev points per half");
    }
    SlabGrid(int n1, int n2, int nzl, int nzu) : SlabGrid(TorusGrid(n1, n2), nzl, nzu) {}

    bool operator==(const SlabGrid& o) const {
        return torus == o.torus && nz_lower == o.nz_lower && nz_upper == o.nz_upper;
    }
    bool operator!=(const SlabGrid& o) const { return !(*this == o); }
};

}  // namespace slabmhd
