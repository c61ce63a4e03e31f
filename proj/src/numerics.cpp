#include "pnpsteric/numerics.hpp"

#include "pnpsteric/errors.hpp"

#include <algorithm>
#include <vector>
#include <string>

namespace pnpsteric::numerics {

double bisect(const std::function<double(double)>& f, double a, double b) {
    if (a > b) std::swap(a, b);
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw NonconvergenceError("bisect: no sign change on bracket");

    for (int it = 0; it < 400 && b - a > bracket_tolerance(a, b); ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }

    double best = std::fabs(fa) < std::fabs(fb) ? a : b;
    double fbest = std::min(std::fabs(fa), std::fabs(fb));
    if (fb != fa) {
        double s = a - fa * (b - a) / (fb - fa);
        if (s > a && s < b) {
            double fs = f(s);
            if (std::fabs(fs) < fbest) return s;
        }
    }
    return best;
}

double safeguarded_newton(const std::function<std::pair<double, double>(double)>& fdf,
                          double a, double b) {
    if (a > b) std::swap(a, b);
    auto [fa, da] = fdf(a);
    auto [fb, db] = fdf(b);
    (void)da;
    (void)db;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw NonconvergenceError("safeguarded_newton: no sign change on bracket");
    const bool rising = fb > 0;

    double x = 0.5 * (a + b);
    double last_width = b - a;
    for (int it = 0; it < 400; ++it) {
        auto [fx, dx] = fdf(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == rising)
            b = x;
        else
            a = x;

        double width = b - a;
        if (width <= bracket_tolerance(a, b)) {
            // polish: one Newton step if it stays in the bracket
            if (dx != 0.0 && std::isfinite(dx)) {
                double y = x - fx / dx;
                if (y > a && y < b) return y;
            }
            return x;
        }

        double next = (dx != 0.0 && std::isfinite(dx)) ? x - fx / dx : a - 1.0;
        bool newton_ok = next > a && next < b && width < 0.75 * last_width;
        if (it == 0) newton_ok = next > a && next < b;
        if (newton_ok) {
            if (std::fabs(next - x) <= 0.25 * bracket_tolerance(a, b)) return next;
            x = next;
        } else {
            x = 0.5 * (a + b);
        }
        last_width = width;
    }
    return x;
}

double grow_bracket_up(const std::function<double(double)>& f, double lo, double hi,
                       double factor, int max_steps) {
    double flo = f(lo);
    double span = hi - lo;
    for (int i = 0; i < max_steps; ++i) {
        double fhi = f(hi);
        if (flo == 0.0 || fhi == 0.0 || (flo > 0) != (fhi > 0)) return hi;
        span *= factor;
        hi = lo + span;
    }
    throw NonconvergenceError("grow_bracket_up: no sign change after " +
                              std::to_string(max_steps) + " expansions");
}

namespace {

struct Simpson {
    const std::function<double(double)>& f;
    int max_depth;

    double run(double a, double fa, double m, double fm, double b, double fb, double whole,
               double tol, int depth) const {
        double lm = 0.5 * (a + m);
        double rm = 0.5 * (m + b);
        double flm = f(lm);
        double frm = f(rm);
        double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        double diff = left + right - whole;
        if (depth >= max_depth || std::fabs(diff) <= 15.0 * tol)
            return left + right + diff / 15.0;
        return run(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
               run(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
    }
};

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        SimpsonOptions opt) {
    if (a == b) return 0.0;
    if (b < a) return -adaptive_simpson(f, b, a, opt);

    // coarse pass sets the scale for the relative target
    const int n = 16;
    double h = (b - a) / n;
    double coarse = 0.0;
    std::vector<double> fx(n + 1);
    for (int i = 0; i <= n; ++i) fx[i] = f(a + i * h);
    for (int i = 0; i < n; i += 2) coarse += h / 3.0 * (fx[i] + 4.0 * fx[i + 1] + fx[i + 2]);
    double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(coarse));

    Simpson s{f, opt.max_depth};
    double total = 0.0;
    for (int i = 0; i < n; i += 2) {
        double x0 = a + i * h;
        double x2 = (i + 2 == n) ? b : a + (i + 2) * h;
        double whole = (x2 - x0) / 6.0 * (fx[i] + 4.0 * fx[i + 1] + fx[i + 2]);
        total += s.run(x0, fx[i], a + (i + 1) * h, fx[i + 1], x2, fx[i + 2], whole,
                       tol / (n / 2), 1);
    }
    return total;
}

} // namespace pnpsteric::numerics
