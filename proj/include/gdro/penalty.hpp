#ifndef GDRO_PENALTY_HPP
#define GDRO_PENALTY_HPP

#include "gdro/gcore.hpp"

#include <algorithm>
#include <cmath>

namespace gdro {

struct NodeUpdate {
    double value = 0.0;
    double a_plus = 0.0;   ///< lower push on this step (>= 0)
    double a_minus = 0.0;  ///< upper push on this step (>= 0)
};

inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }
inline double negative_part(double a) { return a < 0.0 ? -a : 0.0; }

namespace detail {

// Root of y = a + dt m (y - h)^- - dt n (y - h')^+ for fixed a, by cases.
inline double solve_piecewise(double a, double dt, double h, double hp, double m, double n) {
    if (m > 0.0 && a < h) return (a + dt * m * h) / (1.0 + dt * m);
    if (n > 0.0 && a > hp) return (a + dt * n * hp) / (1.0 + dt * n);
    return a;
}

}  // namespace detail

/// Pointwise generator + obstacle step shared by both solvers.
///
/// explicit:          y = base + dt f(ref) + dt m (ref - h)^- - dt n (ref - h')^+
/// nodewise-implicit: y = base + dt f(y)   + dt m (y - h)^-   - dt n (y - h')^+
///
/// followed by projection onto h and/or h' where requested. `f` maps y to
/// f(t, x, y, z) at the node. When `f_uses_y` is false the implicit equation
/// is piecewise linear and solved exactly; otherwise by bisection on the
/// strictly increasing residual (dt kappa_f < 1 is checked upstream).
template <class Generator>
NodeUpdate penalty_update(double base, double ref, double dt, double h, double hp, const PenaltyParams& p,
                          Generator&& f, bool f_uses_y) {
    const double m = p.lower.projection ? 0.0 : p.lower.intensity;
    const double n = p.upper.projection ? 0.0 : p.upper.intensity;
    NodeUpdate out;
    double y;
    if (p.mode == PenaltyMode::explicit_step) {
        y = base + dt * f(ref);
        out.a_plus = dt * m * negative_part(ref - h);
        out.a_minus = dt * n * positive_part(ref - hp);
        y = y + out.a_plus - out.a_minus;
    } else {
        if (!f_uses_y) {
            y = detail::solve_piecewise(base + dt * f(ref), dt, h, hp, m, n);
        } else {
            auto residual = [&](double v) {
                return v - dt * f(v) - dt * m * negative_part(v - h) + dt * n * positive_part(v - hp) - base;
            };
            const double guess = detail::solve_piecewise(base + dt * f(ref), dt, h, hp, m, n);
            double lo = guess, hi = guess;
            double r = residual(guess);
            double step = std::abs(r) + 1e-12 * (1.0 + std::abs(guess));
            if (r == 0.0) {
                lo = hi = guess;
            } else if (r > 0.0) {
                do {
                    hi = lo;
                    lo -= step;
                    step *= 2.0;
                } while (residual(lo) > 0.0);
            } else {
                do {
                    lo = hi;
                    hi += step;
                    step *= 2.0;
                } while (residual(hi) < 0.0);
            }
            for (;;) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (residual(mid) > 0.0 ? hi : lo) = mid;
            }
            y = std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
        }
        out.a_plus = dt * m * negative_part(y - h);
        out.a_minus = dt * n * positive_part(y - hp);
    }
    if (p.lower.projection) {
        if (y < h) {
            out.a_plus += h - y;
            y = h;
        }
    }
    if (p.upper.projection) {
        if (y > hp) {
            out.a_minus += y - hp;
            y = hp;
        }
    }
    out.value = y;
    return out;
}

}  // namespace gdro

#endif  // GDRO_PENALTY_HPP
