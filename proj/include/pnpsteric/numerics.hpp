/**
 * @file numerics.hpp
 * @brief Bracketed root finding and adaptive Simpson quadrature.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace pnpsteric::numerics {

/// Width at which a bracket is considered resolved.
inline double bracket_tolerance(double a, double b) {
    return 1e-13 * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

/**
 * Bisection on [a, b] (f(a), f(b) of opposite sign or zero) followed by one
 * secant polish step that is only accepted when it stays inside the final
 * bracket and lowers |f|.
 */
double bisect(const std::function<double(double)>& f, double a, double b);

/**
 * Newton iteration safeguarded by a bracket. Falls back to bisection whenever
 * the Newton step leaves the bracket or fails to halve the bracket fast enough.
 * fdf returns (f, f').
 */
double safeguarded_newton(const std::function<std::pair<double, double>(double)>& fdf,
                          double a, double b);

/**
 * Expand hi geometrically from lo until f changes sign. Returns the upper end.
 * Throws NonconvergenceError after max_steps expansions.
 */
double grow_bracket_up(const std::function<double(double)>& f, double lo, double hi,
                       double factor = 2.0, int max_steps = 200);

struct SimpsonOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-8;
    int max_depth = 40;
};

/// Adaptive Simpson quadrature of f over [a, b] (b < a gives the negated integral).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        SimpsonOptions opt = {});

} // namespace pnpsteric::numerics
