// Independent reference computations for the tests. Nothing here calls the library.
#pragma once

#include <quadmath.h>

#include <cmath>
#include <functional>

namespace oracle {

using quad = __float128;

// plain bisection, no polish; f(a) and f(b) must differ in sign
template <class T, class F>
T bisect(F f, T a, T b, int iterations = 200) {
    T fa = f(a);
    for (int i = 0; i < iterations; ++i) {
        T m = (a + b) / 2;
        T fm = f(m);
        if (fm == 0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return (a + b) / 2;
}

// principal Lambert W for x > 0 by Halley iteration
inline double lambert_w(double x) {
    double w = std::log1p(x);
    for (int i = 0; i < 60; ++i) {
        double ew = std::exp(w);
        double f = w * ew - x;
        double wp1 = w + 1.0;
        double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if (std::fabs(dw) < 1e-17 * std::max(1.0, std::fabs(w))) break;
    }
    return w;
}

// root of Sigma = 2 exp(-k Sigma / 2) in quad precision
inline quad sigma_z(quad k) {
    if (k == 0) return 2;
    return bisect<quad>([k](quad s) { return s - 2 * expq(-k * s / 2); }, quad(0), quad(2), 220);
}

// Both branch potentials straight from the defining formulas, in quad precision.
inline quad phi_A(quad sigma, quad g, quad z, quad q) {
    quad k = g + z;
    quad r = sqrtq(sigma * sigma - 4 * expq(-k * sigma));
    return (logq((sigma + r) / 2) + k * sigma / 2 + (g - z) / 2 * r) / q;
}

inline quad phi_B(quad sigma, quad g, quad z, quad q) {
    quad k = g + z;
    quad r = sqrtq(sigma * sigma - 4 * expq(-k * sigma));
    // (sigma - r)/2 written as the product partner to avoid cancellation
    quad small = 2 * expq(-k * sigma) / (sigma + r);
    return (logq(small) + k * sigma / 2 + (z - g) / 2 * r) / q;
}

inline quad c_diff_A(quad sigma, quad g, quad z) {
    quad k = g + z;
    return sqrtq(sigma * sigma - 4 * expq(-k * sigma));
}

// Critical cross coupling through the substitution u = g_c - g:
// the crossing conditions reduce to u (ln u - 1) = 2 g with u > e.
inline double g_crit_closed(double g) {
    auto h = [g](quad u) { return u * (logq(u) - 1) - 2 * quad(g); };
    quad lo = expq(quad(1));
    quad hi = lo + 1;
    while (h(hi) < 0) hi *= 2;
    return static_cast<double>(quad(g) + bisect<quad>(h, lo, hi, 220));
}

// turning point from the log form, bisected in quad
inline quad sigma_c(quad g, quad z) {
    quad k = g + z;
    quad l = logq(z * z - g * g);
    return bisect<quad>([&](quad s) { return log1pq(g * s) + k * s - l; }, quad(0), l / k, 220);
}

// composite Simpson with many panels (even n)
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace oracle
