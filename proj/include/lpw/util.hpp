#pragma once
#include <cstdint>
#include <cstddef>
#include <vector>
#include <thread>
#include <functional>
#include <stdexcept>
#include <string>
#include <cmath>

namespace lpw {

// dense row-major matrix, just enough for kernel stacks and power iteration
struct Mat {
    std::size_t nr = 0, nc = 0;
    std::vector<double> a;
    Mat() = default;
    Mat(std::size_t r, std::size_t c) : nr(r), nc(c), a(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * nc + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * nc + j]; }
    double* row(std::size_t i) { return a.data() + i * nc; }
    const double* row(std::size_t i) const { return a.data() + i * nc; }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// stable seed for work block b of a run seeded with s; identical regardless
// of how blocks are scheduled across threads
inline std::uint64_t block_seed(std::uint64_t s, std::uint64_t b) {
    return splitmix64(s ^ splitmix64(b + 0x51ed2701ULL));
}

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// run fn(i) for i in [0, n) on up to nthreads workers; fn must only touch
// disjoint output slots. nthreads <= 1 degrades to a plain loop.
inline void parallel_for(std::size_t n, int nthreads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (nthreads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(nthreads), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += nw) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline double sqr(double x) { return x * x; }

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

} // namespace lpw
