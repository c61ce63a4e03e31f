#include "pnpsteric/excess_current.hpp"

#include "pnpsteric/errors.hpp"
#include "pnpsteric/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pnpsteric {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// true when the interval is empty (x1 == x2); throws on bad bounds
bool check_bounds(double x1, double x2) {
    if (!std::isfinite(x1) || !std::isfinite(x2))
        throw BoundsError("integration bounds must be finite");
    if (x1 > x2)
        throw BoundsError("x1 = " + fmt(x1) + " > x2 = " + fmt(x2) +
                          "; bounds must be ordered (swap them and negate)");
    if (!(x1 > -1.0) || !(x2 < 1.0))
        throw BoundsError("bounds must lie strictly inside (-1, 1)");
    return x1 == x2;
}

void check_on_segment(const std::vector<double>& phi, const BranchCurves& bc, Segment s) {
    Interval dom = bc.segment_domain(s);
    for (double v : phi)
        if (v < dom.lo - 1e-12 || v > dom.hi + 1e-12)
            throw BranchMismatchError("phi = " + fmt(v) + " leaves segment " + to_string(s));
}

double segment_sigma_integral(const BranchCurves& bc, Segment s, double d_lo, double d_hi,
                              double phi1, double phi2, std::vector<std::string>* warnings) {
    Interval dom = bc.segment_domain(s);
    for (double v : {phi1, phi2})
        if (v < dom.lo - 1e-12 || v > dom.hi + 1e-12)
            throw BranchMismatchError("phi = " + fmt(v) + " leaves segment " + to_string(s));
    const auto& p = bc.params();
    double s1 = bc.inverse_sigma(phi1, s);
    double s2 = bc.inverse_sigma(phi2, s);
    const double sc = bc.sigma_c();
    if (warnings) {
        for (double sv : {s1, s2})
            if (std::fabs(sv - sc) <= 1e-10)
                warnings->push_back("EndpointSingularityWarning: Sigma endpoint " + fmt(sv) +
                                    " within 1e-10 of Sigma_c on segment " + to_string(s));
    }
    const Branch b = branch_of(s);
    auto f = [&](double sigma) { return pair_sigma_integrand(sigma, p, b, d_lo, d_hi); };
    return p.q * numerics::adaptive_simpson(f, s1, s2);
}

} // namespace

void DiffusionSet::validate(std::size_t species) const {
    if (d.size() != species)
        throw DomainError("expected " + std::to_string(species) + " diffusion constants, got " +
                          std::to_string(d.size()));
    for (double v : d)
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError("diffusion constants must be positive");
    if (!(charge_scale > 0.0) || !std::isfinite(charge_scale))
        throw DomainError("charge_scale must be positive");
}

std::vector<double> grid_derivative(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = y.size();
    if (n < 3 || x.size() != n) throw DomainError("grid_derivative needs >= 3 matching nodes");
    const double h = (x.back() - x.front()) / static_cast<double>(n - 1);
    std::vector<double> d(n);
    // differenced form so flat data give exactly zero
    d[0] = (4.0 * (y[1] - y[0]) - (y[2] - y[0])) / (2.0 * h);
    d[n - 1] = (4.0 * (y[n - 1] - y[n - 2]) - (y[n - 1] - y[n - 3])) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    return d;
}

// ---------------------------------------------------------------------------

PiecewiseQuadratic::PiecewiseQuadratic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 3 || x_.size() != y_.size())
        throw DomainError("PiecewiseQuadratic needs >= 3 matching nodes");
}

std::size_t PiecewiseQuadratic::center_of(std::size_t panel) const {
    const std::size_t full = (x_.size() - 1) / 2;
    return panel < full ? 2 * panel + 1 : x_.size() - 2;
}

std::size_t PiecewiseQuadratic::panel_of(double t) const {
    const std::size_t n = x_.size();
    const std::size_t full = (n - 1) / 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, n - 2);
    if ((n - 1) % 2 == 1 && i == n - 2) return full;
    return std::min(i / 2, full - 1);
}

double PiecewiseQuadratic::operator()(double t) const {
    std::size_t c = center_of(panel_of(t));
    double h = 0.5 * (x_[c + 1] - x_[c - 1]);
    double s = (t - x_[c]) / h;
    double y0 = y_[c - 1], y1 = y_[c], y2 = y_[c + 1];
    return y1 + 0.5 * s * (y2 - y0) + 0.5 * s * s * (y2 - 2.0 * y1 + y0);
}

double PiecewiseQuadratic::integral(double a, double b) const {
    if (a == b) return 0.0;
    const std::size_t n = x_.size();
    const std::size_t full = (n - 1) / 2;
    const std::size_t panels = full + ((n - 1) % 2);
    double total = 0.0;
    for (std::size_t p = panel_of(a); p < panels; ++p) {
        double L = p < full ? x_[2 * p] : x_[n - 2];
        double R = p < full ? x_[2 * p + 2] : x_[n - 1];
        if (L >= b) break;
        double lo = std::max(L, a);
        double hi = std::min(R, b);
        if (hi <= lo) continue;
        std::size_t c = center_of(p);
        double h = 0.5 * (x_[c + 1] - x_[c - 1]);
        double y0 = y_[c - 1], y1 = y_[c], y2 = y_[c + 1];
        auto F = [&](double t) {
            double s = (t - x_[c]) / h;
            return h * s * (y1 + s * ((y2 - y0) / 4.0 + s * (y2 - 2.0 * y1 + y0) / 6.0));
        };
        total += F(hi) - F(lo);
    }
    return total;
}

// ---------------------------------------------------------------------------

double pair_current_density(double sigma, const TwoSpeciesParams& p, Branch b, double d_lo,
                            double d_hi) {
    const double r = std::fabs(c_diff(sigma, p, Branch::A));
    const double k = p.k();
    const double e = std::exp(-k * sigma);
    const double T = turning_factor(sigma, p);
    const double sum = 0.5 * (d_lo + d_hi);
    const double skew = b == Branch::A ? 0.5 * (d_hi - d_lo) : 0.5 * (d_lo - d_hi);
    double F = (skew * r - sum * (sigma + 2.0 * k * e)) / T;
    double G = sum * sigma - skew * r;
    return p.q * (F + G);
}

double pair_sigma_integrand(double sigma, const TwoSpeciesParams& p, Branch b, double d_lo,
                            double d_hi) {
    const double r = std::fabs(c_diff(sigma, p, Branch::A));
    const double g = p.g;
    const double z = p.z;
    const double k = p.k();
    const double e = std::exp(-k * sigma);
    double first = 0.5 * (d_hi - d_lo) * (-g * sigma - (g * g - z * z) * e);
    double second = 0.5 * (d_lo + d_hi) / r * (g * sigma * sigma - k * (2.0 - (g - z) * sigma) * e);
    return b == Branch::A ? first + second : first - second;
}

CurrentProfile pointwise_current_three(const BvpSolution& sol, const ThreeSpeciesModel& model,
                                       const DiffusionSet& diff, Branch label) {
    diff.validate(3);
    const BranchCurves& bc = model.curves();
    const Segment seg = primary_segment(label);
    check_on_segment(sol.values, bc, seg);
    const auto& p = bc.params();
    std::vector<double> dphi = grid_derivative(sol.nodes, sol.values);

    CurrentProfile out;
    out.x = sol.nodes;
    out.phi = sol.values;
    out.current.resize(sol.values.size());
    out.last_accurate = sol.values.size() - 2;
    for (std::size_t i = 0; i < sol.values.size(); ++i) {
        if (dphi[i] == 0.0) {
            out.current[i] = 0.0;
            continue;
        }
        double sigma = bc.inverse_sigma(sol.values[i], seg);
        double dens = pair_current_density(sigma, p, branch_of(seg), diff.d[0], diff.d[1]);
        out.current[i] = p.q * diff.charge_scale * dens * dphi[i];
    }
    return out;
}

CurrentProfile pointwise_current_four(const BvpSolution& sol, const FourSpeciesModel& model,
                                      const DiffusionSet& diff, Branch label) {
    diff.validate(4);
    const Segment s12 = primary_segment(label);
    const Segment s34 = partner_segment(label);
    check_on_segment(sol.values, model.curves12(), s12);
    check_on_segment(sol.values, model.curves34(), s34);
    const auto& p12 = model.curves12().params();
    const auto& p34 = model.curves34().params();
    std::vector<double> dphi = grid_derivative(sol.nodes, sol.values);

    CurrentProfile out;
    out.x = sol.nodes;
    out.phi = sol.values;
    out.current.resize(sol.values.size());
    out.last_accurate = sol.values.size() - 2;
    for (std::size_t i = 0; i < sol.values.size(); ++i) {
        if (dphi[i] == 0.0) {
            out.current[i] = 0.0;
            continue;
        }
        double sa = model.curves12().inverse_sigma(sol.values[i], s12);
        double sb = model.curves34().inverse_sigma(sol.values[i], s34);
        double ia = p12.q * pair_current_density(sa, p12, branch_of(s12), diff.d[0], diff.d[1]);
        double ib = p34.q * pair_current_density(sb, p34, branch_of(s34), diff.d[2], diff.d[3]);
        out.current[i] = diff.charge_scale * (ia + ib) * dphi[i];
    }
    return out;
}

double integral_current_x(const CurrentProfile& profile, double x1, double x2) {
    if (check_bounds(x1, x2)) return 0.0;
    return PiecewiseQuadratic(profile.x, profile.current).integral(x1, x2);
}

double integral_current_sigma_three(const BvpSolution& sol, const ThreeSpeciesModel& model,
                                    const DiffusionSet& diff, Branch label, double x1, double x2,
                                    std::vector<std::string>* warnings) {
    diff.validate(3);
    if (check_bounds(x1, x2)) return 0.0;
    PiecewiseQuadratic phi(sol.nodes, sol.values);
    return diff.charge_scale * segment_sigma_integral(model.curves(), primary_segment(label),
                                                      diff.d[0], diff.d[1], phi(x1), phi(x2),
                                                      warnings);
}

FourSpeciesIntegral integral_current_four(const BvpSolution& sol, const FourSpeciesModel& model,
                                          const DiffusionSet& diff, Branch label, double x1,
                                          double x2, std::vector<std::string>* warnings) {
    diff.validate(4);
    if (check_bounds(x1, x2)) return {0.0, 0.0};
    PiecewiseQuadratic phi(sol.nodes, sol.values);
    double p1 = phi(x1), p2 = phi(x2);
    double a = segment_sigma_integral(model.curves12(), primary_segment(label), diff.d[0],
                                      diff.d[1], p1, p2, warnings);
    double b = segment_sigma_integral(model.curves34(), partner_segment(label), diff.d[2],
                                      diff.d[3], p1, p2, warnings);
    double xr = integral_current_x(pointwise_current_four(sol, model, diff, label), x1, x2);
    return {diff.charge_scale * (a + b), xr};
}

// ---------------------------------------------------------------------------

GenericCurrent generic_current(const std::vector<double>& x, const std::vector<double>& phi,
                               const std::vector<std::vector<double>>& conc,
                               const SpeciesSystem& sys, const DiffusionSet& diff, double tol) {
    const std::size_t N = conc.size();
    const std::size_t n = phi.size();
    if (sys.valences.size() != N || sys.coupling.size() != N)
        throw DomainError("species system does not match concentration profiles");
    diff.validate(N);
    for (const auto& c : conc)
        if (c.size() != n) throw DomainError("concentration profile length mismatch");

    GenericCurrent out;
    out.total.assign(n, 0.0);
    out.per_species.assign(N, std::vector<double>(n, 0.0));

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < N; ++i) {
            if (!(conc[i][j] > 0.0))
                throw ConsistencyError("non-positive concentration in species " +
                                       std::to_string(i + 1));
            double res = std::log(conc[i][j]) + sys.valences[i] * phi[j];
            for (std::size_t k = 0; k < N; ++k) res += sys.coupling[i][k] * conc[k][j];
            out.max_algebraic_residual = std::max(out.max_algebraic_residual, std::fabs(res));
            if (std::fabs(res) > tol)
                throw ConsistencyError("algebraic residual " + fmt(res) + " for species " +
                                       std::to_string(i + 1) + " at node " + std::to_string(j));
        }
    }

    for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> mu(n);
        for (std::size_t j = 0; j < n; ++j)
            mu[j] = std::log(conc[i][j]) + sys.valences[i] * phi[j];
        std::vector<double> dmu = grid_derivative(x, mu);
        const double pref = sys.valences[i] * diff.charge_scale * diff.d[i];
        for (std::size_t j = 0; j < n; ++j) {
            out.per_species[i][j] = pref * conc[i][j] * dmu[j];
            out.total[j] += out.per_species[i][j];
        }
    }
    return out;
}

SpeciesSystem three_species_system(const ThreeSpeciesConfig& cfg) {
    const auto& p = cfg.pair;
    return {{-p.q, p.q, cfg.z3}, {{p.g, p.z, 0.0}, {p.z, p.g, 0.0}, {0.0, 0.0, 0.0}}};
}

SpeciesSystem four_species_system(const FourSpeciesConfig& cfg) {
    const auto& a = cfg.pair12;
    const auto& b = cfg.pair34;
    return {{-a.q, a.q, -b.q, b.q},
            {{a.g, a.z, 0.0, 0.0}, {a.z, a.g, 0.0, 0.0}, {0.0, 0.0, b.g, b.z}, {0.0, 0.0, b.z, b.g}}};
}

CurrentReport current_report(const BvpSolution& sol, const ThreeSpeciesModel& model,
                             const DiffusionSet& diff, Branch label, double x1, double x2) {
    CurrentReport rep;
    rep.label = label;
    rep.x1 = x1;
    rep.x2 = x2;
    rep.pointwise = pointwise_current_three(sol, model, diff, label);
    rep.integral_x = integral_current_x(rep.pointwise, x1, x2);
    rep.integral_sigma =
        integral_current_sigma_three(sol, model, diff, label, x1, x2, &rep.warnings);
    return rep;
}

CurrentReport current_report(const BvpSolution& sol, const FourSpeciesModel& model,
                             const DiffusionSet& diff, Branch label, double x1, double x2) {
    CurrentReport rep;
    rep.label = label;
    rep.x1 = x1;
    rep.x2 = x2;
    rep.pointwise = pointwise_current_four(sol, model, diff, label);
    auto r = integral_current_four(sol, model, diff, label, x1, x2, &rep.warnings);
    rep.integral_x = r.x_route;
    rep.integral_sigma = r.sigma_route;
    return rep;
}

} // namespace pnpsteric
