#include "pnpsteric/bvp_solver.hpp"

#include "pnpsteric/errors.hpp"
#include "pnpsteric/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

namespace pnpsteric {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

std::vector<double> uniform_nodes(std::size_t n) {
    std::vector<double> x(n);
    const double h = 2.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = -1.0 + h * static_cast<double>(i);
    x.back() = 1.0;
    return x;
}

// Interior margin used when clamping iterates into the rhs domain; at a finite
// endpoint of a branch rhs the derivative is unbounded.
Interval clamp_window(const Interval& dom) {
    auto margin = [](double v) { return 1e-9 * std::max(1.0, std::fabs(v)); };
    Interval w = dom;
    if (std::isfinite(w.lo)) w.lo += margin(w.lo);
    if (std::isfinite(w.hi)) w.hi -= margin(w.hi);
    return w;
}

struct Evaluated {
    std::vector<double> r;  // residual
    std::vector<double> df; // f' at nodes
    double fscale = 0.0;    // max |f|
};

Evaluated evaluate(double eps, const RhsFunction& rhs, const RobinBC& bc,
                   const std::vector<double>& u) {
    const std::size_t n = u.size();
    const double h = 2.0 / static_cast<double>(n - 1);
    const double e2 = eps / (h * h);
    const double k = bc.eta / (2.0 * h);
    Evaluated ev;
    ev.r.assign(n, 0.0);
    ev.df.assign(n, 0.0);
    ev.r[0] = u[0] - k * (-3.0 * u[0] + 4.0 * u[1] - u[2]) - bc.phi0_left;
    ev.r[n - 1] = u[n - 1] + k * (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) - bc.phi0_right;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        RhsValue fv = rhs.evaluate(u[i]);
        ev.df[i] = fv.df;
        ev.fscale = std::max(ev.fscale, std::fabs(fv.f));
        ev.r[i] = e2 * (u[i - 1] - 2.0 * u[i] + u[i + 1]) - fv.f;
    }
    return ev;
}

double tolerance_for(double eps, double eta, std::size_t n, double fscale, double unorm) {
    const double h = 2.0 / static_cast<double>(n - 1);
    double stencil = std::max({1.0, eps / (h * h), eta / h});
    return 1e-10 * std::max(1.0, fscale) + 16.0 * DBL_EPSILON * stencil * std::max(1.0, unorm);
}

// Solve J d = rhs where J is tridiagonal plus one corner entry in each boundary row.
std::vector<double> solve_bordered(std::vector<double> a, std::vector<double> b,
                                   std::vector<double> c, double e_first, double e_last,
                                   std::vector<double> rhs) {
    const std::size_t n = b.size();
    // row 0 has e_first at column 2; remove it with row 1
    {
        double m = e_first / c[1];
        b[0] -= m * a[1];
        c[0] -= m * b[1];
        rhs[0] -= m * rhs[1];
    }
    // row n-1 has e_last at column n-3; remove it with row n-2
    {
        double m = e_last / a[n - 2];
        a[n - 1] -= m * b[n - 2];
        b[n - 1] -= m * c[n - 2];
        rhs[n - 1] -= m * rhs[n - 2];
    }
    for (std::size_t i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

struct NewtonResult {
    std::vector<double> u;
    double rnorm;
    double tol;
    int iterations;
};

NewtonResult newton(double eps, const RhsFunction& rhs, const RobinBC& bc, std::vector<double> u,
                    int max_iterations) {
    const std::size_t n = u.size();
    const double h = 2.0 / static_cast<double>(n - 1);
    const double e2 = eps / (h * h);
    const double k = bc.eta / (2.0 * h);
    const Interval win = clamp_window(rhs.domain());

    Evaluated cur = evaluate(eps, rhs, bc, u);
    double rnorm = sup_norm(cur.r);
    int clamp_run = 0;

    for (int it = 0; it <= max_iterations; ++it) {
        double tol = tolerance_for(eps, bc.eta, n, cur.fscale, sup_norm(u));
        if (rnorm <= tol) return {std::move(u), rnorm, tol, it};
        if (it == max_iterations) break;

        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), rr(n);
        b[0] = 1.0 + 3.0 * k;
        c[0] = -4.0 * k;
        double e_first = k;
        b[n - 1] = 1.0 + 3.0 * k;
        a[n - 1] = -4.0 * k;
        double e_last = k;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            a[i] = e2;
            c[i] = e2;
            b[i] = -2.0 * e2 - cur.df[i];
        }
        for (std::size_t i = 0; i < n; ++i) rr[i] = -cur.r[i];
        std::vector<double> d = solve_bordered(a, b, c, e_first, e_last, rr);
        for (double v : d)
            if (!std::isfinite(v))
                throw NonconvergenceError("Newton step is not finite (singular Jacobian)");

        double lambda = 1.0;
        bool accepted = false;
        bool clamped = false;
        std::vector<double> trial(n);
        Evaluated next;
        while (lambda >= std::ldexp(1.0, -20)) {
            clamped = false;
            for (std::size_t i = 0; i < n; ++i) {
                double v = u[i] + lambda * d[i];
                if (v < win.lo) { v = win.lo; clamped = true; }
                if (v > win.hi) { v = win.hi; clamped = true; }
                trial[i] = v;
            }
            next = evaluate(eps, rhs, bc, trial);
            double tn = sup_norm(next.r);
            if (std::isfinite(tn) && tn <= (1.0 - 1e-4 * lambda) * rnorm) {
                accepted = true;
                rnorm = tn;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw NonconvergenceError("line search stalled at residual " + fmt(rnorm) +
                                      " (tolerance " + fmt(tol) + ")");
        clamp_run = clamped ? clamp_run + 1 : 0;
        if (clamp_run >= 5)
            throw DomainEscapeError("Newton iterates left the rhs domain on 5 consecutive steps");
        u.swap(trial);
        cur = std::move(next);
    }
    throw NonconvergenceError("no convergence after " + std::to_string(max_iterations) +
                              " Newton iterations (residual " + fmt(rnorm) + ")");
}

bool nondecreasing(const std::vector<double>& v, std::size_t from, std::size_t to, double slack) {
    for (std::size_t i = from; i + 1 <= to && i + 1 < v.size(); ++i)
        if (v[i + 1] < v[i] - slack) return false;
    return true;
}

bool nonincreasing(const std::vector<double>& v, std::size_t from, std::size_t to, double slack) {
    for (std::size_t i = from; i + 1 <= to && i + 1 < v.size(); ++i)
        if (v[i + 1] > v[i] + slack) return false;
    return true;
}

bool valley(const std::vector<double>& v, double slack) {
    auto it = std::min_element(v.begin(), v.end());
    auto m = static_cast<std::size_t>(it - v.begin());
    return nonincreasing(v, 0, m, slack) && nondecreasing(v, m, v.size() - 1, slack);
}

bool ridge(const std::vector<double>& v, double slack) {
    auto it = std::max_element(v.begin(), v.end());
    auto m = static_cast<std::size_t>(it - v.begin());
    return nondecreasing(v, 0, m, slack) && nonincreasing(v, m, v.size() - 1, slack);
}

// shape read from the profile alone, used when no root is known
Profile detect_shape(const std::vector<double>& v, double slack) {
    const std::size_t last = v.size() - 1;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi - *lo <= slack) return Profile::Constant;
    if (nondecreasing(v, 0, last, slack)) return Profile::Increasing;
    if (nonincreasing(v, 0, last, slack)) return Profile::Decreasing;
    if (valley(v, slack)) return Profile::InteriorMin;
    if (ridge(v, slack)) return Profile::InteriorMax;
    throw InconsistentProfileError("profile has more than one interior extremum");
}

void check_problem(const BvpProblem& pb) {
    if (!(pb.epsilon > 0.0) || !std::isfinite(pb.epsilon))
        throw DomainError("epsilon must be positive and finite");
    if (!(pb.bc.eta >= 0.0) || !std::isfinite(pb.bc.eta))
        throw DomainError("eta must be >= 0 and finite");
    if (!std::isfinite(pb.bc.phi0_left) || !std::isfinite(pb.bc.phi0_right))
        throw DomainError("boundary data must be finite");
    const Interval& d = pb.rhs.domain();
    for (double v : {pb.bc.phi0_left, pb.bc.phi0_right})
        if (v < d.lo || v > d.hi)
            throw DomainError("boundary datum " + fmt(v) + " outside rhs domain [" + fmt(d.lo) +
                              ", " + fmt(d.hi) + "]");
    if (pb.n_nodes && *pb.n_nodes < 5) throw DomainError("n_nodes must be at least 5");
}

} // namespace

std::string to_string(Profile p) {
    switch (p) {
    case Profile::InteriorMin: return "interior-min";
    case Profile::InteriorMax: return "interior-max";
    case Profile::Increasing: return "increasing";
    case Profile::Decreasing: return "decreasing";
    case Profile::Constant: return "constant";
    }
    return "?";
}

double min_derivative(const std::function<double(double)>& fprime, double lo, double hi,
                      int samples) {
    if (hi < lo) std::swap(lo, hi);
    double m = std::numeric_limits<double>::infinity();
    if (hi == lo) return fprime(lo);
    for (int i = 0; i < samples; ++i) {
        double x = lo + (hi - lo) * i / (samples - 1);
        double v = fprime(x);
        if (!std::isnan(v)) m = std::min(m, v);
    }
    return m;
}

std::size_t default_node_count(double epsilon, double alpha0) {
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) return 201;
    double layers = std::ceil(1.0 / std::sqrt(epsilon / alpha0));
    double n = std::max(201.0, 20.0 * layers);
    return static_cast<std::size_t>(n);
}

std::vector<double> discrete_residual(double epsilon, const RhsFunction& rhs, const RobinBC& bc,
                                      const std::vector<double>& values) {
    if (values.size() < 3) throw DomainError("discrete_residual needs at least 3 nodes");
    return evaluate(epsilon, rhs, bc, values).r;
}

BvpSolution solve(const BvpProblem& pb, const SolveOptions& opts) {
    check_problem(pb);
    const auto root = pb.rhs.root();
    const Interval win = clamp_window(pb.rhs.domain());

    std::size_t n;
    if (pb.n_nodes) {
        n = *pb.n_nodes;
    } else if (opts.initial_guess) {
        n = opts.initial_guess->size();
    } else {
        double lo = std::min(pb.bc.phi0_left, pb.bc.phi0_right);
        double hi = std::max(pb.bc.phi0_left, pb.bc.phi0_right);
        if (root) {
            lo = std::min(lo, *root);
            hi = std::max(hi, *root);
        }
        lo = std::clamp(lo, win.lo, win.hi);
        hi = std::clamp(hi, win.lo, win.hi);
        double a0 = min_derivative([&](double p) { return pb.rhs.derivative(p); }, lo, hi);
        n = default_node_count(pb.epsilon, a0);
    }

    std::vector<double> u;
    if (opts.initial_guess) {
        if (opts.initial_guess->size() != n)
            throw DomainError("initial guess length does not match node count");
        u = *opts.initial_guess;
    } else {
        double c0 = opts.initial_constant ? *opts.initial_constant
                    : root ? *root
                           : 0.5 * (pb.bc.phi0_left + pb.bc.phi0_right);
        u.assign(n, std::clamp(c0, win.lo, win.hi));
    }

    std::vector<double> eps_chain{pb.epsilon};
    if (pb.epsilon < opts.continuation_threshold) {
        double e = pb.epsilon;
        while (e < opts.continuation_threshold) {
            e *= 2.0;
            eps_chain.push_back(e);
        }
        std::reverse(eps_chain.begin(), eps_chain.end());
    }

    NewtonResult nr{};
    int total = 0;
    for (double e : eps_chain) {
        nr = newton(e, pb.rhs, pb.bc, std::move(u), opts.max_iterations);
        total += nr.iterations;
        u = nr.u;
    }

    BvpSolution sol;
    sol.nodes = uniform_nodes(n);
    sol.values = std::move(nr.u);
    sol.residual_norm = nr.rnorm;
    sol.tolerance = nr.tol;
    sol.iterations = total;
    sol.epsilon = pb.epsilon;
    sol.bc = pb.bc;
    sol.classification = root ? classify_solution(sol, *root) : detect_shape(sol.values, 1e-8);
    return sol;
}

Profile classify_solution(const BvpSolution& sol, double c, double slack) {
    const auto& v = sol.values;
    const double l = sol.bc.phi0_left;
    const double r = sol.bc.phi0_right;
    const std::size_t last = v.size() - 1;

    if (std::fabs(l - c) <= slack && std::fabs(r - c) <= slack) {
        for (double x : v)
            if (std::fabs(x - c) > slack)
                throw InconsistentProfileError("data equal the root but profile is not constant");
        return Profile::Constant;
    }

    Profile expected;
    bool ok;
    if (l > c && r > c) {
        expected = Profile::InteriorMin;
        ok = valley(v, slack) && *std::min_element(v.begin(), v.end()) > c - slack;
    } else if (l < c && r < c) {
        expected = Profile::InteriorMax;
        ok = ridge(v, slack) && *std::max_element(v.begin(), v.end()) < c + slack;
    } else if (l <= c && c <= r) {
        expected = Profile::Increasing;
        ok = nondecreasing(v, 0, last, slack);
    } else {
        expected = Profile::Decreasing;
        ok = nonincreasing(v, 0, last, slack);
    }
    if (!ok)
        throw InconsistentProfileError("profile does not follow the " + to_string(expected) +
                                       " pattern implied by its boundary data");
    return expected;
}

EnvelopeReport envelope_check(const BvpSolution& sol, const RhsFunction& rhs, double c,
                              double slack) {
    const auto& v = sol.values;
    auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = std::min(*lo_it, c);
    double hi = std::max(*hi_it, c);
    auto fp = [&](double p) { return rhs.derivative(p); };
    double a0 = min_derivative(fp, lo, hi);
    for (double x : v) a0 = std::min(a0, fp(x));

    EnvelopeReport rep;
    rep.alpha0 = a0;
    rep.amplitude = std::max({std::fabs(sol.bc.phi0_left - c), std::fabs(sol.bc.phi0_right - c)});
    if (!(a0 > 0.0))
        throw DomainError("envelope_check: min f' over the attained range is not positive");
    const double kappa = std::sqrt(2.0 * a0 / sol.epsilon);
    const double A2 = rep.amplitude * rep.amplitude;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = sol.nodes[i];
        double env = A2 * (std::exp(-(1.0 + x) * kappa) + std::exp(-(1.0 - x) * kappa));
        double margin = env - (v[i] - c) * (v[i] - c);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_index = i;
        }
    }
    rep.satisfied = rep.worst_margin >= -slack;
    return rep;
}

std::pair<double, double> boundary_layer_limits(const RhsFunction& rhs, double c,
                                                const RobinBC& bc, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    const double sg = std::sqrt(gamma);
    auto F = [&](double s) {
        return numerics::adaptive_simpson([&](double t) { return rhs(t); }, c, s);
    };
    auto limit = [&](double phi0, const char* side) {
        if (phi0 == c)
            throw SignError(std::string("boundary datum at ") + side +
                            " equals the root; no layer forms there");
        auto g = [&](double s) {
            return sg * std::fabs(phi0 - s) - std::sqrt(std::max(0.0, F(s)));
        };
        return numerics::bisect(g, c, phi0);
    };
    return {limit(bc.phi0_left, "x = -1"), limit(bc.phi0_right, "x = +1")};
}

EigenReport linearized_smallest_eigenvalue(const BvpSolution& sol,
                                           const std::function<double(double)>& fprime) {
    const auto& u = sol.values;
    const std::size_t n = u.size();
    if (n < 5) throw DomainError("eigenvalue needs at least 5 nodes");
    const double h = sol.h();
    const double e2 = sol.epsilon / (h * h);
    const double alpha = sol.bc.eta / (2.0 * h + 3.0 * sol.bc.eta);

    // unknowns are interior nodes 1..n-2; boundary values eliminated
    const std::size_t m = n - 2;
    std::vector<double> d(m), off(m > 0 ? m - 1 : 0);
    for (std::size_t j = 0; j < m; ++j) d[j] = 2.0 * e2 + fprime(u[j + 1]);
    for (std::size_t j = 0; j + 1 < m; ++j) off[j] = -e2;
    d[0] -= 4.0 * alpha * e2;
    d[m - 1] -= 4.0 * alpha * e2;
    off[0] = -e2 * std::sqrt(1.0 - alpha);
    off[m - 2] = -e2 * std::sqrt(1.0 - alpha);
    if (m == 2) off[0] = -e2 * (1.0 - alpha);

    // Sturm count of eigenvalues below x
    auto count_below = [&](double x) {
        std::size_t cnt = 0;
        double q = d[0] - x;
        if (q < 0.0) ++cnt;
        for (std::size_t j = 1; j < m; ++j) {
            if (q == 0.0) q = DBL_EPSILON * (std::fabs(d[j - 1]) + 1.0);
            q = d[j] - x - off[j - 1] * off[j - 1] / q;
            if (q < 0.0) ++cnt;
        }
        return cnt;
    };

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < m; ++j) {
        double r = (j > 0 ? std::fabs(off[j - 1]) : 0.0) + (j + 1 < m ? std::fabs(off[j]) : 0.0);
        lo = std::min(lo, d[j] - r);
        hi = std::max(hi, d[j] + r);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    double lambda = 0.5 * (lo + hi);

    // inverse iteration at the bisected shift, then Rayleigh quotient
    std::vector<double> v(m, 1.0);
    const double shift = lambda - 1e-9 * std::max(1.0, std::fabs(lambda));
    for (int it = 0; it < 3; ++it) {
        std::vector<double> b(m), c(m, 0.0), a(m, 0.0), y = v;
        for (std::size_t j = 0; j < m; ++j) b[j] = d[j] - shift;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            c[j] = off[j];
            a[j + 1] = off[j];
        }
        for (std::size_t j = 1; j < m; ++j) {
            double f = a[j] / b[j - 1];
            b[j] -= f * c[j - 1];
            y[j] -= f * y[j - 1];
        }
        y[m - 1] /= b[m - 1];
        for (std::size_t j = m - 1; j-- > 0;) y[j] = (y[j] - c[j] * y[j + 1]) / b[j];
        double nrm = 0.0;
        for (double t : y) nrm += t * t;
        nrm = std::sqrt(nrm);
        for (std::size_t j = 0; j < m; ++j) v[j] = y[j] / nrm;
    }
    double num = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double Av = d[j] * v[j];
        if (j > 0) Av += off[j - 1] * v[j - 1];
        if (j + 1 < m) Av += off[j] * v[j + 1];
        num += v[j] * Av;
    }
    if (std::isfinite(num) && count_below(num + 1e-12 * std::max(1.0, std::fabs(num))) >= 1 &&
        count_below(num - 1e-9 * std::max(1.0, std::fabs(num))) == 0)
        lambda = num;

    auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
    double mu0 = min_derivative(fprime, *lo_it, *hi_it);
    for (double x : u) mu0 = std::min(mu0, fprime(x));
    return {lambda, mu0};
}

GrowthReport unbounded_growth_probe(const RhsFunction& rhs, const std::vector<double>& epsilons,
                                    const RobinBC& bc) {
    if (rhs.root()) throw RootPresentError("rhs has a root; growth probe needs a rootless rhs");
    const Interval& dom = rhs.domain();
    double lo = std::isfinite(dom.lo) ? dom.lo : -100.0;
    double hi = std::isfinite(dom.hi) ? dom.hi : 100.0;
    lo = std::max(lo, hi - 200.0);
    double f0 = rhs(lo);
    for (int i = 1; i <= 2000; ++i) {
        double f = rhs(lo + (hi - lo) * i / 2000.0);
        if ((f > 0) != (f0 > 0) || f == 0.0)
            throw RootPresentError("rhs changes sign on its domain near phi = " +
                                   fmt(lo + (hi - lo) * i / 2000.0));
    }

    GrowthReport rep;
    rep.epsilons = epsilons;
    for (double e : epsilons) {
        BvpSolution s = solve(BvpProblem{e, rhs, bc, std::nullopt});
        rep.sup_norms.push_back(sup_norm(s.values));
    }
    for (std::size_t i = 1; i < rep.sup_norms.size(); ++i)
        rep.growth_factors.push_back(rep.sup_norms[i] / rep.sup_norms[i - 1]);
    rep.growth_confirmed = !rep.growth_factors.empty() && rep.growth_factors.back() >= 1.5;
    return rep;
}

} // namespace pnpsteric
