#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cogmac {

struct Maximum {
    double x = 0;
    double f = 0;
};

// golden-section maximization on [a, b]; the endpoints are compared as well
inline Maximum golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        // ties move left so flat plateaus resolve toward smaller x
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    Maximum best{c, fc};
    if (fd > best.f) best = {d, fd};
    return best;
}

// coarse scan then golden refinement around the best scan point. handles the
// sawtooth produced by floor() terms as long as the grid is not aliased badly
inline Maximum scan_then_golden(const std::function<double(double)>& f, double a, double b, int n, double tol) {
    std::vector<double> xs(n + 1), fs(n + 1);
    int best = 0;
    for (int k = 0; k <= n; ++k) {
        xs[k] = a + (b - a) * k / n;
        fs[k] = f(xs[k]);
        if (fs[k] > fs[best]) best = k;
    }
    double lo = xs[std::max(0, best - 1)], hi = xs[std::min(n, best + 1)];
    Maximum g = golden_max(f, lo, hi, tol);
    Maximum r{xs[best], fs[best]};
    if (g.f > r.f || (g.f == r.f && g.x < r.x)) r = g;
    return r;
}

// run body(i) for i in [0, n) on up to `jobs` threads; each index runs exactly once
template <class Body>
void parallel_for(int n, int jobs, Body&& body) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    int workers = std::min(jobs, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) body(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace cogmac
