#pragma once

#include <functional>

#include "slabmhd/calculus.hpp"
#include "slabmhd/norms.hpp"

namespace slabmhd {

/// Vertical cutoff profile: chi(0) = 1, chi(+-1) = 0, |chi| <= 1.
class CutoffProfile {
  public:
    CutoffProfile() : CutoffProfile([](Real z) { return std::pow((1.0 - z) * (1.0 + z), 4); }) {}

    explicit CutoffProfile(std::function<Real(Real)> chi) : chi_(std::move(chi)) {
        if (std::abs(chi_(0.0) - 1.0) > 1e-12 || std::abs(chi_(1.0)) > 1e-12 || std::abs(chi_(-1.0)) > 1e-12)
            throw ConfigError("CutoffProfile: need chi(0)=1 and chi(+-1)=0");
        for (int i = 0; i <= 64; ++i)
            if (std::abs(chi_(-1.0 + i / 32.0)) > 1.0 + 1e-12)
                throw ConfigError("CutoffProfile: |chi| must not exceed 1");
    }

    Real operator()(Real z) const { return chi_(z); }

  private:
    std::function<Real(Real)> chi_;
};

/// Decay rates and matching weights of the specialized Poisson sum. The
/// weights make the two-sided kernel C^m across x3 = 0: the lower kernel is
/// e^{2 pi |xi| x3}, the upper one sum_j alpha_j e^{-lambda_j |xi| x3}, and
/// equality of the first m one-sided derivatives for every xi is the
/// Vandermonde system sum_j alpha_j (-lambda_j / 2 pi)^k = 1, k = 0..m.
struct PoissonWeights {
    int m = 0;
    VectorXd lambda;
    VectorXd alpha;
};

inline PoissonWeights poisson_weights(int m, const VectorXd& lambda) {
    if (lambda.size() != m + 1)
        throw ConfigError("poisson_weights: need m+1 decay rates");
    for (int j = 0; j <= m; ++j) {
        if (lambda[j] <= 0)
            throw ConfigError("poisson_weights: decay rates must be positive");
        if (j > 0 && lambda[j] <= lambda[j - 1])
            throw ConfigError("poisson_weights: decay rates must be strictly increasing");
    }
    // The Vandermonde system in mu_j = -lambda_j / 2 pi with right-hand side
    // (1,...,1) is interpolation of the point 1: its exact solution is the
    // Lagrange weight alpha_j = prod_{i != j} (1 - mu_i) / (mu_j - mu_i).
    // This form evaluates without the cancellation a generic LU solve incurs,
    // which matters because high kernel derivatives amplify any alpha error.
    VectorXd mu = -lambda / two_pi;
    VectorXd alpha(m + 1);
    for (int j = 0; j <= m; ++j) {
        Real num = 1, den = 1;
        for (int i = 0; i <= m; ++i) {
            if (i == j)
                continue;
            num *= 1.0 - mu[i];
            den *= mu[j] - mu[i];
        }
        alpha[j] = num / den;
    }
    MatrixXd vandermonde(m + 1, m + 1);
    for (int k = 0; k <= m; ++k)
        for (int j = 0; j <= m; ++j)
            vandermonde(k, j) = std::pow(mu[j], k);
    if ((vandermonde * alpha - VectorXd::Ones(m + 1)).cwiseAbs().maxCoeff() > 1e-8)
        throw PreconditionError("poisson_weights: matching system is numerically singular");
    PoissonWeights w;
    w.m = m;
    w.lambda = lambda;
    w.alpha = alpha;
    return w;
}

/// Default per the construction used throughout: C^4 matching with
/// lambda_j = 2 pi (j+1).
inline PoissonWeights default_poisson_weights(int m = 4) {
    VectorXd lambda(m + 1);
    for (int j = 0; j <= m; ++j)
        lambda[j] = two_pi * (j + 1);
    return poisson_weights(m, lambda);
}

namespace detail {

/// One-sided vertical kernel of the Poisson sum for |xi| = kabs, evaluated
/// at x3 (x3 <= 0 on the lower side, >= 0 on the upper side).
inline Real poisson_kernel(const PoissonWeights& w, Real kabs, Real x3) {
    if (kabs == 0.0)
        return 1.0;
    if (x3 <= 0.0)
        return std::exp(two_pi * kabs * x3);
    Real acc = 0;
    for (int j = 0; j <= w.m; ++j)
        acc += w.alpha[j] * std::exp(-w.lambda[j] * kabs * x3);
    return acc;
}

/// k-th x3-derivative of the kernel at 0 from the given side.
inline Real poisson_kernel_derivative(const PoissonWeights& w, Real kabs, int k, bool upper_side) {
    if (kabs == 0.0)
        return k == 0 ? 1.0 : 0.0;
    if (!upper_side)
        return std::pow(two_pi * kabs, k);
    Real acc = 0;
    for (int j = 0; j <= w.m; ++j)
        acc += w.alpha[j] * std::pow(-w.lambda[j] * kabs, k);
    return acc;
}

}  // namespace detail

/// The specialized Poisson sum P eta on both slab halves (no cutoff).
inline VolumeField poisson_extend(const SurfaceField& eta, const PoissonWeights& w, const SlabGrid& grid) {
    if (eta.grid() != grid.torus)
        throw ConfigError("poisson_extend: surface and slab grids disagree");
    SurfaceField es = to_spectral(eta);
    VolumeField out(grid, Region::Both, Domain::Spectral);
    for (Half h : out.halves()) {
        const VectorXd& z = out.basis(h)->points;
        for (int m = 0; m < grid.torus.modes(); ++m) {
            Real kabs = std::sqrt(Real(grid.torus.xi1(m) * grid.torus.xi1(m) +
                                       grid.torus.xi2(m) * grid.torus.xi2(m)));
            for (int i = 0; i < z.size(); ++i)
                out.block(h)(i, m) = es.data()[m] * detail::poisson_kernel(w, kabs, z[i]);
        }
    }
    return out;
}

/// eta_bar = chi * P eta: the harmonic-type extension entering the flattening map.
inline VolumeField harmonic_extend(const SurfaceField& eta, const PoissonWeights& w,
                                   const CutoffProfile& chi, const SlabGrid& grid) {
    VolumeField out = poisson_extend(eta, w, grid);
    for (Half h : out.halves()) {
        const VectorXd& z = out.basis(h)->points;
        for (int i = 0; i < z.size(); ++i)
            out.block(h).row(i) *= chi(z[i]);
    }
    return out;
}

/// Per-mode one-sided derivative mismatch of P eta at x3 = 0, evaluated from
/// the analytic kernels: max over modes of |fhat| * |jump of the k-th kernel
/// derivative|. The C^m property of the weights makes this vanish for k <= m.
inline Real extension_derivative_jump(const SurfaceField& eta, const PoissonWeights& w, int k) {
    SurfaceField es = to_spectral(eta);
    const TorusGrid& g = eta.grid();
    Real worst = 0;
    for (int m = 0; m < g.modes(); ++m) {
        Real kabs = std::sqrt(Real(g.xi1(m) * g.xi1(m) + g.xi2(m) * g.xi2(m)));
        Real jump = detail::poisson_kernel_derivative(w, kabs, k, true) -
                    detail::poisson_kernel_derivative(w, kabs, k, false);
        worst = std::max(worst, std::abs(es.data()[m]) * std::abs(jump));
    }
    return worst;
}

}  // namespace slabmhd
