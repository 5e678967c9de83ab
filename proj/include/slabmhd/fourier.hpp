#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "slabmhd/core.hpp"
#include "slabmhd/grids.hpp"

namespace slabmhd {

/// Dense DFT operators for one direction. Grids here are tiny (n <= 64),
/// so cached matrix products beat an FFT and keep Eigen the only dependency.
struct DftPlan {
    int n;
    MatrixXcd forward;   // includes the 1/n normalization
    MatrixXcd backward;  // unnormalized synthesis

    explicit DftPlan(int n_) : n(n_), forward(n_, n_), backward(n_, n_) {
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) {
                Real phase = -two_pi * Real(m) * Real(j) / n;
                forward(m, j) = Complex(std::cos(phase), std::sin(phase)) / Real(n);
                backward(j, m) = Complex(std::cos(phase), -std::sin(phase));
            }
    }
};

inline std::shared_ptr<const DftPlan> dft_plan(int n) {
    static std::mutex mtx;
    static std::map<int, std::shared_ptr<const DftPlan>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    auto plan = std::make_shared<const DftPlan>(n);
    cache.emplace(n, plan);
    return plan;
}

namespace detail {

/// In-place 2D transform of a flat (j1 + n1*j2)-indexed line.
inline void transform_line(VectorXcd& line, const TorusGrid& g, bool to_spectral) {
    auto p1 = dft_plan(g.n1);
    auto p2 = dft_plan(g.n2);
    Eigen::Map<MatrixXcd> grid(line.data(), g.n1, g.n2);
    if (to_spectral)
        grid = (p1->forward * grid * p2->forward.transpose()).eval();
    else
        grid = (p1->backward * grid * p2->backward.transpose()).eval();
}

/// Applies the 2D transform to every row of a (nz x modes) matrix.
inline void transform_rows(MatrixXcd& rows, const TorusGrid& g, bool to_spectral) {
    VectorXcd line(g.modes());
    for (int i = 0; i < rows.rows(); ++i) {
        line = rows.row(i).transpose();
        transform_line(line, g, to_spectral);
        rows.row(i) = line.transpose();
    }
}

}  // namespace detail

}  // namespace slabmhd
