#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "slabmhd/core.hpp"

namespace slabmhd {

/// Chebyshev-Gauss-Lobatto collocation basis on an interval [a, b].
/// Points are stored in ascending order; all operators are dense and exact
/// for polynomials of degree < n.
struct ChebyshevBasis {
    int n = 0;
    Real a = 0, b = 0;
    VectorXd points;       // ascending CGL points in [a, b]
    MatrixXd diff;         // first-derivative collocation matrix
    MatrixXd diff2;        // second derivative
    MatrixXd to_coeff;     // point values -> Chebyshev coefficients
    MatrixXd mass;         // exact Gram matrix: integral of f*g = f^T mass g
    VectorXd quadrature;   // exact integration weights: integral of f = q . f

    ChebyshevBasis(int n_, Real a_, Real b_) : n(n_), a(a_), b(b_) {
        if (n < 2)
            throw ConfigError("ChebyshevBasis: need at least 2 points");
        const int N = n - 1;
        points.resize(n);
        for (int i = 0; i < n; ++i) {
            Real s = std::cos(pi * Real(N - i) / N);  // ascending in [-1, 1]
            points[i] = a + (b - a) * (s + 1.0) / 2.0;
        }

        // Barycentric weights of CGL points: (-1)^j, halved at the ends.
        VectorXd w(n);
        for (int i = 0; i < n; ++i)
            w[i] = ((N - i) % 2 == 0 ? 1.0 : -1.0) * ((i == 0 || i == N) ? 0.5 : 1.0);
        diff.setZero(n, n);
        for (int i = 0; i < n; ++i) {
            Real rowsum = 0;
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                diff(i, j) = (w[j] / w[i]) / (points[i] - points[j]);
                rowsum += diff(i, j);
            }
            diff(i, i) = -rowsum;
        }
        diff2 = diff * diff;

        // DCT-I style map from point values to Chebyshev coefficients.
        to_coeff.resize(n, n);
        for (int k = 0; k < n; ++k) {
            Real ck = (k == 0 || k == N) ? 2.0 : 1.0;
            for (int i = 0; i < n; ++i) {
                Real cj = (i == 0 || i == N) ? 2.0 : 1.0;
                to_coeff(k, i) = 2.0 / (N * ck * cj) * std::cos(pi * k * Real(N - i) / N);
            }
        }

        // Exact integrals of T_k T_l over [-1, 1].
        auto integral_T = [](int m) -> Real { return m % 2 == 0 ? 2.0 / (1.0 - Real(m) * m) : 0.0; };
        MatrixXd gram(n, n);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                gram(k, l) = 0.5 * (integral_T(k + l) + integral_T(std::abs(k - l)));
        mass = 0.5 * (b - a) * to_coeff.transpose() * gram * to_coeff;
        mass = 0.5 * (mass + mass.transpose()).eval();
        quadrature = mass * VectorXd::Ones(n);
    }

    /// Values at the CGL points of a finer/coarser basis on the same interval
    /// (exact polynomial resampling).
    MatrixXd resample_matrix(const ChebyshevBasis& target) const {
        const int N = n - 1;
        MatrixXd vandermonde(target.n, n);
        for (int i = 0; i < target.n; ++i) {
            Real s = 2.0 * (target.points[i] - a) / (b - a) - 1.0;
            for (int k = 0; k <= N; ++k)
                vandermonde(i, k) = std::cos(k * std::acos(std::min(1.0, std::max(-1.0, s))));
        }
        return vandermonde * to_coeff;
    }
};

/// Memoized basis lookup; bases are immutable and shared.
inline std::shared_ptr<const ChebyshevBasis> cheb_basis(int n, Real a, Real b) {
    static std::mutex mtx;
    static std::map<std::tuple<int, Real, Real>, std::shared_ptr<const ChebyshevBasis>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(n, a, b);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    auto basis = std::make_shared<const ChebyshevBasis>(n, a, b);
    cache.emplace(key, basis);
    return basis;
}

inline std::shared_ptr<const ChebyshevBasis> lower_basis(int nz) { return cheb_basis(nz, -1.0, 0.0); }
inline std::shared_ptr<const ChebyshevBasis> upper_basis(int nz) { return cheb_basis(nz, 0.0, 1.0); }

}  // namespace slabmhd
