#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace boundwalk {

/// Golden-section maximization on [a, b]; returns (x*, f(x*)).
inline std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                                    double a, double b, double xtol,
                                                    int max_iter = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

/// Bisection root of f on [a, b]; requires a sign change.
inline double bisect_root(const std::function<double(double)>& f, double a, double b,
                          double xtol, int max_iter = 200) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::runtime_error("bisect_root: no sign change in bracket");
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

/// Scans [a, b] for a sign change of f, then bisects. Returns the root.
inline double scan_and_bisect(const std::function<double(double)>& f, double a, double b,
                              int scan_points, double xtol) {
    double x_prev = a;
    double f_prev = f(a);
    if (f_prev == 0.0) return a;
    for (int i = 1; i <= scan_points; ++i) {
        const double x = a + (b - a) * static_cast<double>(i) / scan_points;
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (f_prev * fx < 0.0) return bisect_root(f, x_prev, x, xtol);
        x_prev = x;
        f_prev = fx;
    }
    throw std::runtime_error("scan_and_bisect: no sign change found in bracket");
}

}  // namespace boundwalk
