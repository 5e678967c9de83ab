#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace slabmhd {

using Real = double;
using Complex = std::complex<Real>;

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr Real pi = 3.14159265358979323846264338327950288;
inline constexpr Real two_pi = 2.0 * pi;

/// Thrown when grids, regions or parameters are inconsistent.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a mathematical precondition (compatibility condition,
/// metric bound, convergence) fails.
class PreconditionError : public std::runtime_error {
  public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline int max_threads() {
    if (const char* env = std::getenv("SLABMHD_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace detail

/// Runs body(i) for i in [0, n). Work is chunked over at most
/// SLABMHD_THREADS workers; with one worker the loop runs inline.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    int nthreads = std::min(detail::max_threads(), n);
    if (nthreads <= 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        workers.emplace_back([=, &body] {
            for (int i = t; i < n; i += nthreads)
                body(i);
        });
    }
    for (auto& w : workers)
        w.join();
}

/// Deterministic uniform stream; identical output on every platform for a
/// fixed seed (std::uniform_real_distribution is not portable).
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [-1, 1).
    Real next_sym() { return 2.0 * (Real(next_u64() >> 11) * 0x1.0p-53) - 1.0; }

    /// Uniform in [0, 1).
    Real next_unit() { return Real(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

}  // namespace slabmhd
