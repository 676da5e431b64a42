#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace stadlab {

using Complex = std::complex<double>;
using Field = Eigen::VectorXcd;      ///< complex-valued grid function (interior nodes)
using RealField = Eigen::VectorXd;   ///< real-valued grid function (interior nodes)

inline constexpr double kPi = 3.14159265358979323846;

/// Error type thrown by all stadlab operations on contract violations
/// (bad parameters, solver breakdown, non-convergence).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Format a double with 12 significant digits ("%.12g"); the fixed CSV
/// number format that makes re-runs byte-comparable.
inline std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// FNV-1a 64-bit hash; used to fingerprint configuration files in summaries.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Map a 64-bit word to a double in [0, 1) using the top 53 bits.
/// mt19937_64 output is fully specified by the standard, so fields built this
/// way are bit-reproducible across platforms and runs.
inline double unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Deterministic complex field with entries uniform in [-1,1) x [-1,1)i.
inline Field random_complex_field(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    Field v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double re = 2.0 * unit_double(eng()) - 1.0;
        double im = 2.0 * unit_double(eng()) - 1.0;
        v[i] = Complex(re, im);
    }
    return v;
}

/// Run fn(i) for i in [0, n) on up to `jobs` worker threads. Results must be
/// written to pre-sized slots indexed by i so the output order is independent
/// of scheduling. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next(0);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    int n_threads = std::min(jobs, n);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stadlab
