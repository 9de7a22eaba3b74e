#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace levyhom {

// Points and wavevectors are small runtime-d vectors; d is 2 or 3 in
// practice, so plain std::vector<double> keeps the API simple.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// Error taxonomy mirrors the CLI exit codes: config/usage problems,
// invariant violations, and numerical non-convergence.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_residual(achieved) {}
    double achieved_residual;
};

class QuadratureError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

// Minimal fixed-chunk parallel map. Chunk boundaries depend only on
// (n_items, n_threads), so results are independent of thread scheduling.
inline void parallel_for_chunks(std::size_t n_items, int n_threads,
                                const std::function<void(std::size_t, std::size_t)>& body) {
    if (n_threads <= 1 || n_items <= 1) {
        body(0, n_items);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(n_threads, n_items);
    const std::size_t chunk = (n_items + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n_items, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace levyhom
