#pragma once

#include <cmath>
#include <exception>
#include <limits>
#include <utility>

namespace relsim::detail {

struct RootResult {
    double x = 0.0;
    double f = 0.0;
    int iterations = 0;
    bool bracketed = false;
    bool converged = false;
    double lo = 0.0;
    double hi = 0.0;
};

/// Root of a strictly increasing function `fn(x) -> {f, f'}`.
///
/// Starts at `x0`, expands a bracket away from it in steps of `step0`
/// (doubling), then runs Newton safeguarded by bisection. Stops when the
/// Newton update is below a few ulps of x or f vanishes exactly.
///
/// If `fn` throws while the bracket is growing, the step is halved and retried;
/// the exception propagates only once the expansion budget is spent.
template <class Fn>
RootResult solve_increasing(Fn&& fn, double x0, double step0, int max_iter, int max_doublings)
{
    RootResult res;
    auto [f0, d0] = fn(x0);
    if (f0 == 0.0) {
        res.x = res.lo = res.hi = x0;
        res.bracketed = res.converged = true;
        return res;
    }
    double step = (step0 > 0.0 && std::isfinite(step0)) ? step0 : 1.0;
    double lo = x0;
    double hi = x0;
    double flo = f0;
    double fhi = f0;
    int doublings = 0;
    std::exception_ptr failure;
    if (f0 < 0.0) {
        for (;;) {
            if (doublings++ >= max_doublings) {
                if (failure) {
                    std::rethrow_exception(failure);
                }
                res.x = x0;
                res.f = f0;
                return res;
            }
            hi = lo + step;
            try {
                fhi = fn(hi).first;
            } catch (...) {
                if (!failure) {
                    failure = std::current_exception();
                }
                step *= 0.5;
                continue;
            }
            if (fhi >= 0.0) {
                break;
            }
            lo = hi;
            flo = fhi;
            step *= 2.0;
        }
    } else {
        for (;;) {
            if (doublings++ >= max_doublings) {
                if (failure) {
                    std::rethrow_exception(failure);
                }
                res.x = x0;
                res.f = f0;
                return res;
            }
            lo = hi - step;
            try {
                flo = fn(lo).first;
            } catch (...) {
                if (!failure) {
                    failure = std::current_exception();
                }
                step *= 0.5;
                continue;
            }
            if (flo <= 0.0) {
                break;
            }
            hi = lo;
            fhi = flo;
            step *= 2.0;
        }
    }
    res.bracketed = true;
    if (flo == 0.0 || fhi == 0.0) {
        res.x = (flo == 0.0) ? lo : hi;
        res.lo = res.hi = res.x;
        res.converged = true;
        return res;
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double x = (-flo < fhi) ? lo : hi;
    for (int it = 1; it <= max_iter; ++it) {
        res.iterations = it;
        auto [f, df] = fn(x);
        res.x = x;
        res.f = f;
        if (f == 0.0) {
            res.converged = true;
            break;
        }
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double xn = (df > 0.0 && std::isfinite(df)) ? x - f / df : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) {
            xn = 0.5 * (lo + hi);
        }
        const double scale = std::max(std::abs(lo), std::abs(hi));
        if (std::abs(xn - x) <= 4.0 * eps * std::abs(x) || hi - lo <= 4.0 * eps * scale) {
            res.x = xn;
            res.f = fn(xn).first;
            res.converged = true;
            break;
        }
        x = xn;
    }
    res.lo = lo;
    res.hi = hi;
    return res;
}

} // namespace relsim::detail
