#ifndef LOOPSOLITON_COMMON_HPP
#define LOOPSOLITON_COMMON_HPP

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace loopsoliton {

using cx = std::complex<double>;
using cvec = std::vector<cx>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline const cx iu{0.0, 1.0};

inline double sq(double x) { return x * x; }
inline cx sq(const cx& z) { return z * z; }

inline double abs2(const cx& z) { return z.real() * z.real() + z.imag() * z.imag(); }

// Max thread count for embarrassingly parallel sweeps, capped by
// LOOPSOLITON_THREADS when set.  Results are written to preassigned
// slots so the outcome does not depend on the thread count.
inline unsigned thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("LOOPSOLITON_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    unsigned nt = thread_cap();
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (nt > n) nt = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace loopsoliton

#endif
