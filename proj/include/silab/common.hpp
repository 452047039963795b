#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace silab {

// ============================================================================
// Small shared pieces: plane geometry, error type, worker pool.
// ============================================================================

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    // counter-clockwise orthogonal companion
    Vec2 perp() const { return {-y, x}; }
};

// Thrown whenever a caller violates a documented precondition; the message
// states the condition that failed.
class guard_error : public std::runtime_error {
  public:
    explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw guard_error(msg);
}

// ----------------------------------------------------------------------------
// Worker pool.  Static partition so results never depend on the job count:
// every item writes only to its own slot.
// ----------------------------------------------------------------------------

int worker_count();          // current setting (defaults to hardware concurrency)
void set_worker_count(int n);

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int jobs = worker_count();
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nthread = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> pool;
    pool.reserve(nthread);
    std::exception_ptr first_error = nullptr;
    std::mutex err_mtx;
    for (std::size_t t = 0; t < nthread; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += nthread) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mtx);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Least-squares line fit through (x_i, y_i); returns {slope, intercept}.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace silab
